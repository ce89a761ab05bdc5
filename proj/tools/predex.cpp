// predex: find the conjunctive predicate whose removal best moves a query
// result. Subcommands: explain, eval, synth, bench.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "predex/baselines.hpp"
#include "predex/engine.hpp"
#include "predex/experiment.hpp"
#include "predex/synth.hpp"
#include "predex/version.hpp"

namespace {

using namespace predex;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, ','))
    if (!cur.empty()) out.push_back(cur);
  return out;
}

std::map<std::string, CsvType> parse_hints(const std::vector<std::string>& specs) {
  std::map<std::string, CsvType> hints;
  for (const std::string& spec : specs) {
    auto eq = spec.rfind('=');
    if (eq == std::string::npos || eq == 0)
      throw CLI::ValidationError("--hint", "expected <column>=<numeric|categorical|date>");
    std::string col = spec.substr(0, eq);
    std::string kind = spec.substr(eq + 1);
    CsvType t;
    if (kind == "numeric") t = CsvType::numeric;
    else if (kind == "categorical") t = CsvType::categorical;
    else if (kind == "date") t = CsvType::date;
    else throw CLI::ValidationError("--hint", "unknown kind \"" + kind + "\"");
    hints[col] = t;
  }
  return hints;
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return nlohmann::json::parse(in);
}

// Common knobs shared by explain and eval.
struct ObjectiveArgs {
  std::string expr_file;
  std::string bench_file;
  std::string command;
  double timeout_s = 300.0;
  std::string direction = "low";

  void attach(CLI::App* app) {
    auto* grp = app->add_option_group("objective", "what to optimize (exactly one)");
    grp->add_option("--objective", expr_file, "query expression JSON file");
    grp->add_option("--bench", bench_file, "benchmark objective spec JSON file");
    grp->add_option("--objective-cmd", command, "external evaluator command");
    grp->require_option(1);
    app->add_option("--timeout", timeout_s, "external evaluator timeout, seconds")
        ->check(CLI::PositiveNumber);
    app->add_option("--direction", direction, "low or high")
        ->check(CLI::IsMember({"low", "high"}));
  }

  ObjectiveSpec build(const Relation& r) const {
    ObjectiveSpec spec;
    spec.direction = direction_from_string(direction);
    if (!expr_file.empty()) {
      auto expr = read_json_file(expr_file).get<QueryExpr>();
      validate_expr(expr, r);
      spec.kind = expr;
    } else if (!bench_file.empty()) {
      spec.kind = read_json_file(bench_file).get<BenchObjectiveSpec>();
    } else {
      spec.kind = ExternalObjective{command, timeout_s};
    }
    return spec;
  }
};

std::uint64_t seed_or_env(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("PREDEX_SEED")) return std::stoull(env);
  return 0;
}

void write_output(const nlohmann::json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
  } else {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << j.dump(2) << '\n';
  }
}

int cmd_explain(const std::string& data, const std::string& vars_csv,
                const std::vector<std::string>& hints, const ObjectiveArgs& obj,
                const std::string& strategy, std::optional<std::uint64_t> iters,
                std::optional<double> budget, std::optional<std::uint64_t> seed,
                std::size_t n_init, std::size_t n_ei, double gamma, std::size_t model_window,
                std::size_t restart_after, std::size_t population, double start_fraction,
                const std::string& output,
                const std::string& trace_path, bool quiet, bool no_timestamps) {
  Relation r = load_csv(data, parse_hints(hints));
  ObjectiveSpec spec = obj.build(r);

  EngineConfig cfg;
  cfg.strategy = strategy_from_string(strategy);
  cfg.n_init = n_init;
  cfg.n_ei = n_ei;
  cfg.gamma = gamma;
  cfg.model_window = model_window;
  cfg.restart_after = restart_after;
  cfg.population = population;
  cfg.start_fraction = start_fraction;
  cfg.max_iters = iters;
  cfg.time_budget_s = budget;
  cfg.seed = seed_or_env(seed);
  cfg.keep_trace = false;

  std::ofstream trace;
  if (!trace_path.empty()) {
    trace.open(trace_path, std::ios::binary | std::ios::trunc);
    if (!trace) throw std::runtime_error("cannot open " + trace_path);
  }
  double best_seen = std::numeric_limits<double>::quiet_NaN();
  ProgressFn on_trial = [&](const TraceRow& row) {
    if (trace.is_open()) {
      nlohmann::json j;
      TraceRow copy = row;
      if (no_timestamps) copy.wall_s = 0.0;
      to_json(j, copy);
      trace << j.dump() << '\n';
    }
    if (!quiet && !row.failed &&
        (std::isnan(best_seen) || row.best != best_seen)) {
      best_seen = row.best;
      std::cerr << "it " << row.iteration << " [" << row.phase << "] best " << row.best << '\n';
    }
  };

  ExplainResult res = explain(r, split_list(vars_csv), spec, cfg, on_trial);

  nlohmann::json config{{"strategy", strategy}, {"seed", cfg.seed},
                        {"n_init", cfg.n_init}, {"n_ei", cfg.n_ei},
                        {"gamma", cfg.gamma},   {"model_window", cfg.model_window},
                        {"restart_after", cfg.restart_after}};
  if (cfg.strategy == Strategy::hyperband) {
    config["population"] = cfg.population;
    config["start_fraction"] = cfg.start_fraction;
  }
  if (cfg.max_iters) config["max_iters"] = *cfg.max_iters;
  if (cfg.time_budget_s) config["time_budget_s"] = *cfg.time_budget_s;

  nlohmann::json out;
  out["best_predicate"] = res.best_predicate;
  out["best_value"] = res.best_value;
  out["direction"] = obj.direction;
  out["iterations"] = res.iterations;
  out["wall_time_s"] = no_timestamps ? 0.0 : res.wall_time_s;
  out["config"] = config;
  out["versions"] = nlohmann::json{{"predex", PREDEX_VERSION}};
  write_output(out, output);
  if (!quiet)
    std::cerr << "done: " << res.iterations << " evaluations, best " << res.best_value << '\n';
  return 0;
}

int cmd_eval(const std::string& data, const std::vector<std::string>& hints,
             const std::string& predicate_file, const ObjectiveArgs& obj,
             const std::string& output) {
  Relation r = load_csv(data, parse_hints(hints));
  auto p = read_json_file(predicate_file).get<Predicate>();
  validate_predicate(p, r);
  ObjectiveSpec spec = obj.build(r);
  auto v = evaluate(spec, r, p);
  nlohmann::json out;
  out["predicate"] = p;
  out["removed_rows"] = count_satisfying(r, p);
  if (v) {
    out["value"] = *v;
  } else {
    out["value"] = nullptr;
    out["failed"] = true;
  }
  write_output(out, output);
  return v ? 0 : 2;
}

int cmd_synth(const std::string& out_csv, const std::string& truth_file,
              const std::string& objective_file, std::size_t dims, const std::string& difficulty,
              std::uint64_t seed, std::size_t groups, std::size_t tuples, double penalty_c,
              double lambda) {
  SyntheticSpec spec;
  spec.n_dims = dims;
  spec.mu = difficulty == "hard" ? 30.0 : 80.0;
  spec.groups = groups;
  spec.tuples_per_group = tuples;
  spec.seed = seed;
  spec.penalty_c = penalty_c;
  spec.lambda = lambda;
  SyntheticDataset d = gen_scorpion_synthetic(spec);
  write_csv(d.relation, out_csv);
  if (!objective_file.empty()) {
    nlohmann::json j = d.objective;
    std::ofstream out(objective_file, std::ios::binary | std::ios::trunc);
    out << j.dump(2) << '\n';
  }
  if (!truth_file.empty()) {
    nlohmann::json j;
    j["predicates"] = d.truth.predicates;
    j["mask_rows"] = [&] {
      std::vector<std::size_t> rows;
      for (std::size_t i = 0; i < d.truth.mask.size(); ++i)
        if (d.truth.mask[i]) rows.push_back(i);
      return rows;
    }();
    std::ofstream out(truth_file, std::ios::binary | std::ios::trunc);
    out << j.dump() << '\n';
  }
  std::cerr << "wrote " << d.relation.row_count() << " rows to " << out_csv << '\n';
  return 0;
}

int cmd_bench(std::size_t dims, const std::string& difficulty, const std::string& methods_csv,
              std::size_t runs, std::optional<std::uint64_t> iters, std::optional<double> budget,
              const std::string& out_dir, double penalty_c, std::uint64_t data_seed,
              std::uint64_t base_seed, double interval, std::size_t jobs, std::size_t population,
              std::size_t model_window, std::size_t restart_after, std::size_t tuples,
              bool no_traces) {
  SyntheticSpec sp;
  sp.n_dims = dims;
  sp.mu = difficulty == "hard" ? 30.0 : 80.0;
  sp.tuples_per_group = tuples;
  sp.seed = data_seed;
  sp.penalty_c = penalty_c;
  SyntheticDataset d = gen_scorpion_synthetic(sp);

  ObjectiveSpec spec;
  spec.direction = Direction::high;
  spec.kind = d.objective;

  ExperimentConfig cfg;
  for (const std::string& m : split_list(methods_csv))
    cfg.methods.push_back(strategy_from_string(m));
  cfg.runs = runs;
  cfg.base_seed = base_seed;
  cfg.max_iters = iters;
  cfg.time_budget_s = budget;
  cfg.sample_interval_s = interval;
  cfg.jobs = jobs;
  cfg.out_dir = out_dir;
  cfg.write_traces = !no_traces;
  cfg.population = population;
  cfg.model_window = model_window;
  cfg.restart_after = restart_after;

  ExperimentReport rep = run_experiment(d.relation, d.variables, spec, &d.truth, cfg);
  std::cout << "method            completed  mean_final      mean_F\n";
  for (const MethodSummary& m : rep.methods) {
    char line[128];
    std::snprintf(line, sizeof line, "%-18s%9zu%12.4f%12.4f\n", m.method.c_str(), m.completed,
                  m.mean_final_value, m.mean_scores.f_score);
    std::cout << line;
  }
  std::cout << "artifacts in " << out_dir << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"black-box query explanations over tabular data"};
  app.set_version_flag("--version", PREDEX_VERSION);
  app.require_subcommand(1);

  // explain
  auto* ex = app.add_subcommand("explain", "search for the best explanation predicate");
  std::string data, vars_csv, strategy = "tpe_ic_ws", output, trace_path;
  std::vector<std::string> hints;
  std::optional<std::uint64_t> iters, seed;
  std::optional<double> budget;
  std::size_t n_init = 10, n_ei = 24, population = 64, model_window = 128;
  std::size_t restart_after = 1500;
  double gamma = 0.1, start_fraction = 0.125;
  bool quiet = false, no_timestamps = false;
  ObjectiveArgs ex_obj;
  ex->add_option("--data", data, "input CSV")->required()->check(CLI::ExistingFile);
  ex->add_option("--vars", vars_csv, "comma-separated explanation columns")->required();
  ex->add_option("--hint", hints, "<column>=<numeric|categorical|date>, repeatable");
  ex_obj.attach(ex);
  ex->add_option("--strategy", strategy, "tpe_ic_ws | tpe_ws_only | tpe_plain | random | hyperband");
  ex->add_option("--iters", iters, "evaluation budget");
  ex->add_option("--time-budget", budget, "wall-clock budget, seconds")->check(CLI::PositiveNumber);
  ex->add_option("--seed", seed, "RNG seed (default: $PREDEX_SEED or 0)");
  ex->add_option("--n-init", n_init, "startup evaluations")->check(CLI::PositiveNumber);
  ex->add_option("--n-ei", n_ei, "candidates per TPE step")->check(CLI::PositiveNumber);
  ex->add_option("--gamma", gamma, "good/bad split fraction");
  ex->add_option("--model-window", model_window, "TPE model history cap");
  ex->add_option("--restart-after", restart_after, "TPE stall restart threshold, 0 = off");
  ex->add_option("--population", population, "hyperband round-one predicates");
  ex->add_option("--start-fraction", start_fraction, "hyperband first data fraction");
  ex->add_option("--output", output, "result JSON file (default stdout)");
  ex->add_option("--trace", trace_path, "write per-trial JSON lines here");
  ex->add_flag("--quiet", quiet, "no stderr progress");
  ex->add_flag("--no-timestamps", no_timestamps, "zero wall-clock fields for stable output");

  // eval
  auto* ev = app.add_subcommand("eval", "score one predicate without searching");
  std::string ev_data, ev_pred, ev_output;
  std::vector<std::string> ev_hints;
  ObjectiveArgs ev_obj;
  ev->add_option("--data", ev_data, "input CSV")->required()->check(CLI::ExistingFile);
  ev->add_option("--predicate", ev_pred, "predicate JSON file")->required()->check(CLI::ExistingFile);
  ev->add_option("--hint", ev_hints, "<column>=<numeric|categorical|date>, repeatable");
  ev_obj.attach(ev);
  ev->add_option("--output", ev_output, "result JSON file (default stdout)");

  // synth
  auto* sy = app.add_subcommand("synth", "generate the synthetic outlier benchmark");
  std::string sy_out, sy_truth, sy_objective, sy_difficulty = "easy";
  std::size_t sy_dims = 2, sy_groups = 10, sy_tuples = 2000;
  std::uint64_t sy_seed = 0;
  double sy_c = 0.2, sy_lambda = 1.0;
  sy->add_option("--out", sy_out, "output CSV")->required();
  sy->add_option("--truth", sy_truth, "ground-truth JSON file");
  sy->add_option("--objective", sy_objective, "benchmark objective spec JSON file");
  sy->add_option("--dims", sy_dims, "attribute dimensions")->check(CLI::PositiveNumber);
  sy->add_option("--difficulty", sy_difficulty)->check(CLI::IsMember({"easy", "hard"}));
  sy->add_option("--seed", sy_seed);
  sy->add_option("--groups", sy_groups)->check(CLI::PositiveNumber);
  sy->add_option("--tuples-per-group", sy_tuples)->check(CLI::PositiveNumber);
  sy->add_option("--penalty-c", sy_c);
  sy->add_option("--lambda", sy_lambda);

  // bench
  auto* be = app.add_subcommand("bench", "method comparison on a synthetic dataset");
  auto* sc = be->add_subcommand("scorpion", "nested-hypercube outlier benchmark");
  be->require_subcommand(1);
  std::string sc_difficulty = "easy", sc_methods = "tpe_ic_ws,random", sc_out;
  std::size_t sc_dims = 2, sc_runs = 10, sc_jobs = 1, sc_population = 64,
              sc_model_window = 128, sc_restart_after = 1500, sc_tuples = 2000;
  std::optional<std::uint64_t> sc_iters;
  std::optional<double> sc_budget;
  std::uint64_t sc_seed = 0, sc_base_seed = 1;
  double sc_c = 0.2, sc_interval = 5.0;
  bool sc_no_traces = false;
  sc->add_option("--dims", sc_dims)->check(CLI::PositiveNumber);
  sc->add_option("--difficulty", sc_difficulty)->check(CLI::IsMember({"easy", "hard"}));
  sc->add_option("--methods", sc_methods, "comma-separated strategies");
  sc->add_option("--runs", sc_runs)->check(CLI::PositiveNumber);
  sc->add_option("--iters", sc_iters, "evaluation budget per run");
  sc->add_option("--time-budget", sc_budget, "wall-clock budget per run, seconds");
  sc->add_option("--out-dir", sc_out, "artifact directory")->required();
  sc->add_option("--penalty-c", sc_c);
  sc->add_option("--seed", sc_seed, "dataset seed");
  sc->add_option("--base-seed", sc_base_seed, "first run seed");
  sc->add_option("--interval", sc_interval, "curve sample spacing, seconds");
  sc->add_option("--jobs", sc_jobs, "concurrent cells")->check(CLI::PositiveNumber);
  sc->add_option("--population", sc_population, "hyperband population");
  sc->add_option("--model-window", sc_model_window, "TPE model history cap");
  sc->add_option("--restart-after", sc_restart_after, "TPE stall restart threshold, 0 = off");
  sc->add_option("--tuples-per-group", sc_tuples)->check(CLI::PositiveNumber);
  sc->add_flag("--no-traces", sc_no_traces, "skip per-run trace files");

  CLI11_PARSE(app, argc, argv);

  try {
    if (ex->parsed())
      return cmd_explain(data, vars_csv, hints, ex_obj, strategy, iters, budget, seed, n_init,
                         n_ei, gamma, model_window, restart_after, population,
                         start_fraction, output,
                         trace_path, quiet, no_timestamps);
    if (ev->parsed()) return cmd_eval(ev_data, ev_hints, ev_pred, ev_obj, ev_output);
    if (sy->parsed())
      return cmd_synth(sy_out, sy_truth, sy_objective, sy_dims, sy_difficulty, sy_seed, sy_groups,
                       sy_tuples, sy_c, sy_lambda);
    if (sc->parsed())
      return cmd_bench(sc_dims, sc_difficulty, sc_methods, sc_runs, sc_iters, sc_budget, sc_out,
                       sc_c, sc_seed, sc_base_seed, sc_interval, sc_jobs, sc_population,
                       sc_model_window, sc_restart_after, sc_tuples, sc_no_traces);
  } catch (const predex::NoResultError& e) {
    std::cerr << "no result: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
