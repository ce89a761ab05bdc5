#include "predex/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <thread>

namespace predex {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Best value at or before time t in a (wall, best) step function; NaN before
// the first success.
double sample_curve(const std::vector<std::pair<double, double>>& bsf, double t) {
  double v = kNan;
  for (const auto& [wall, best] : bsf) {
    if (wall > t) break;
    v = best;
  }
  return v;
}

std::string cell_trace_name(const std::string& method, std::size_t run) {
  return "trace_" + method + "_" + std::to_string(run) + ".jsonl";
}

}  // namespace

ExperimentReport run_experiment(const Relation& r, const std::vector<std::string>& variables,
                                const ObjectiveSpec& spec, const GroundTruth* truth,
                                const ExperimentConfig& cfg) {
  if (cfg.methods.empty()) throw std::invalid_argument("experiment: no methods");
  if (cfg.runs == 0) throw std::invalid_argument("experiment: runs must be positive");
  if (cfg.jobs == 0) throw std::invalid_argument("experiment: jobs must be positive");
  if (!(cfg.sample_interval_s > 0.0))
    throw std::invalid_argument("experiment: sample_interval_s must be positive");
  const bool write_files = !cfg.out_dir.empty();
  if (write_files) std::filesystem::create_directories(cfg.out_dir);

  struct Cell {
    Strategy method;
    std::size_t run;
  };
  std::vector<Cell> cells;
  for (Strategy m : cfg.methods)
    for (std::size_t run = 0; run < cfg.runs; ++run) cells.push_back({m, run});

  std::vector<CellResult> results(cells.size());
  // Raw step curves, resampled after all cells finish when the grid cannot
  // be fixed up front (no time budget).
  std::vector<std::vector<std::pair<double, double>>> raw_curves(cells.size());

  std::vector<double> grid;
  if (cfg.time_budget_s) {
    auto k = static_cast<std::size_t>(std::floor(*cfg.time_budget_s / cfg.sample_interval_s + 1e-9));
    for (std::size_t i = 1; i <= k; ++i) grid.push_back(cfg.sample_interval_s * static_cast<double>(i));
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      const Cell& cell = cells[i];
      CellResult& out = results[i];
      out.method = to_string(cell.method);
      out.run = cell.run;
      out.seed = cfg.base_seed + cell.run;

      EngineConfig ec;
      ec.strategy = cell.method;
      ec.n_init = cfg.n_init;
      ec.n_ei = cfg.n_ei;
      ec.gamma = cfg.gamma;
      ec.population = cfg.population;
      ec.model_window = cfg.model_window;
      ec.restart_after = cfg.restart_after;
      ec.max_iters = cfg.max_iters;
      ec.time_budget_s = cfg.time_budget_s;
      ec.seed = out.seed;
      ec.keep_trace = false;

      std::ofstream trace;
      ProgressFn observer;
      if (write_files && cfg.write_traces) {
        trace.open(cfg.out_dir / cell_trace_name(out.method, cell.run),
                   std::ios::binary | std::ios::trunc);
        observer = [&trace](const TraceRow& row) {
          nlohmann::json j;
          to_json(j, row);
          trace << j.dump() << '\n';
        };
      }
      try {
        ExplainResult res = explain(r, variables, spec, ec, observer);
        out.ok = true;
        out.final_value = res.best_value;
        out.iterations = res.iterations;
        out.wall_time_s = res.wall_time_s;
        if (truth) out.scores = prf(res.best_predicate, r, *truth);
        if (!grid.empty()) {
          for (double t : grid) out.curve.push_back(sample_curve(res.best_so_far, t));
        } else {
          raw_curves[i] = std::move(res.best_so_far);
        }
      } catch (const std::exception& e) {
        out.ok = false;
        out.error = e.what();
      }
    }
  };

  if (cfg.jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(cfg.jobs, cells.size()); ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  if (grid.empty()) {
    double horizon = 0.0;
    for (const CellResult& c : results)
      if (c.ok) horizon = std::max(horizon, c.wall_time_s);
    auto k = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(horizon / cfg.sample_interval_s - 1e-9)));
    for (std::size_t i = 1; i <= k; ++i) grid.push_back(cfg.sample_interval_s * static_cast<double>(i));
    for (std::size_t i = 0; i < results.size(); ++i) {
      if (!results[i].ok) continue;
      for (double t : grid) results[i].curve.push_back(sample_curve(raw_curves[i], t));
    }
  }

  ExperimentReport rep;
  rep.curve_times = grid;
  rep.cells = std::move(results);
  for (Strategy m : cfg.methods) {
    MethodSummary s;
    s.method = to_string(m);
    s.mean_curve.assign(grid.size(), kNan);
    s.curve_runs.assign(grid.size(), 0);
    std::vector<double> sums(grid.size(), 0.0);
    for (const CellResult& c : rep.cells) {
      if (c.method != s.method || !c.ok) continue;
      ++s.completed;
      s.mean_final_value += c.final_value;
      s.mean_scores.precision += c.scores.precision;
      s.mean_scores.recall += c.scores.recall;
      s.mean_scores.f_score += c.scores.f_score;
      s.mean_iterations += static_cast<double>(c.iterations);
      for (std::size_t k = 0; k < grid.size() && k < c.curve.size(); ++k) {
        if (std::isnan(c.curve[k])) continue;
        sums[k] += c.curve[k];
        ++s.curve_runs[k];
      }
    }
    if (s.completed > 0) {
      auto n = static_cast<double>(s.completed);
      s.mean_final_value /= n;
      s.mean_scores.precision /= n;
      s.mean_scores.recall /= n;
      s.mean_scores.f_score /= n;
      s.mean_iterations /= n;
    }
    for (std::size_t k = 0; k < grid.size(); ++k)
      if (s.curve_runs[k] > 0) s.mean_curve[k] = sums[k] / static_cast<double>(s.curve_runs[k]);
    rep.methods.push_back(std::move(s));
  }

  if (write_files) {
    nlohmann::json j;
    to_json(j, rep);
    j["config"] = {{"runs", cfg.runs},
                   {"base_seed", cfg.base_seed},
                   {"sample_interval_s", cfg.sample_interval_s},
                   {"jobs", cfg.jobs},
                   {"n_init", cfg.n_init},
                   {"n_ei", cfg.n_ei},
                   {"gamma", cfg.gamma},
                   {"population", cfg.population},
                   {"model_window", cfg.model_window},
                   {"restart_after", cfg.restart_after}};
    if (cfg.max_iters) j["config"]["max_iters"] = *cfg.max_iters;
    if (cfg.time_budget_s) j["config"]["time_budget_s"] = *cfg.time_budget_s;
    std::ofstream report(cfg.out_dir / "report.json", std::ios::binary | std::ios::trunc);
    report << j.dump(2) << '\n';

    std::ofstream curves(cfg.out_dir / "curves.csv", std::ios::binary | std::ios::trunc);
    curves << "method,t_seconds,mean_best,runs_reporting\n";
    for (const MethodSummary& s : rep.methods) {
      for (std::size_t k = 0; k < grid.size(); ++k) {
        curves << s.method << ',' << grid[k] << ',';
        if (!std::isnan(s.mean_curve[k])) curves << s.mean_curve[k];
        curves << ',' << s.curve_runs[k] << '\n';
      }
    }
  }
  return rep;
}

namespace {

nlohmann::json prf_json(const Prf& p) {
  return {{"precision", p.precision}, {"recall", p.recall}, {"f_score", p.f_score}};
}

nlohmann::json nan_to_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

}  // namespace

void to_json(nlohmann::json& j, const ExperimentReport& rep) {
  j = nlohmann::json::object();
  j["curve_times"] = rep.curve_times;
  auto& methods = j["methods"] = nlohmann::json::array();
  for (const MethodSummary& s : rep.methods) {
    nlohmann::json jm{{"method", s.method},
                      {"completed", s.completed},
                      {"mean_final_value", s.mean_final_value},
                      {"mean_scores", prf_json(s.mean_scores)},
                      {"mean_iterations", s.mean_iterations},
                      {"curve_runs", s.curve_runs}};
    nlohmann::json curve = nlohmann::json::array();
    for (double v : s.mean_curve) curve.push_back(nan_to_null(v));
    jm["mean_curve"] = std::move(curve);
    methods.push_back(std::move(jm));
  }
  auto& cells = j["cells"] = nlohmann::json::array();
  for (const CellResult& c : rep.cells) {
    nlohmann::json jc{{"method", c.method},   {"run", c.run},
                      {"seed", c.seed},       {"ok", c.ok},
                      {"iterations", c.iterations}, {"wall_time_s", c.wall_time_s}};
    if (c.ok) {
      jc["final_value"] = c.final_value;
      jc["scores"] = prf_json(c.scores);
      nlohmann::json curve = nlohmann::json::array();
      for (double v : c.curve) curve.push_back(nan_to_null(v));
      jc["curve"] = std::move(curve);
    } else {
      jc["error"] = c.error;
    }
    cells.push_back(std::move(jc));
  }
}

}  // namespace predex
