// Acceptance gate: one line per criterion, exit 0 only when every criterion
// holds. Runtime bounds are part of the criteria and enforced.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "helpers.hpp"
#include "predex/baselines.hpp"
#include "predex/categorical.hpp"
#include "predex/engine.hpp"
#include "predex/experiment.hpp"
#include "predex/synth.hpp"
#include "predex/tpe.hpp"

using namespace predex;
using predex::testing::TempDir;
using predex::testing::profiles;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void expect(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

ObjectiveSpec rate_spec(std::string target_col, std::string good_value) {
  QueryExpr num;
  num.node = QueryExpr::Node::agg;
  num.agg.agg = AggKind::count;
  Condition c;
  c.column = std::move(target_col);
  c.op = CmpOp::eq;
  c.operand = std::move(good_value);
  num.agg.where = c;
  QueryExpr den;
  den.node = QueryExpr::Node::agg;
  den.agg.agg = AggKind::count;
  QueryExpr e;
  e.node = QueryExpr::Node::divide;
  e.kids = {num, den};
  ObjectiveSpec s;
  s.kind = e;
  return s;
}

bool near(double a, double b, double tol = 1e-12) { return std::abs(a - b) <= tol; }

// ---- criterion 1: worked-example exactness ---------------------------------

void criterion_worked_examples(Check& c) {
  Relation r = profiles();
  ObjectiveSpec rate = rate_spec("M.predict(I)", "repeat");

  ICObjective obj = [&](const Relation& filtered, const Predicate&) -> std::optional<double> {
    return eval_expr(filtered, std::get<QueryExpr>(rate.kind));
  };
  ICMap occ = compute_ic(r, "Occupation", obj);
  c.expect(near(occ.scores.at("Athlete"), 0.5) && near(occ.scores.at("Artist"), 0.75) &&
               near(occ.scores.at("Writer"), 1.0),
           "Occupation IC values");
  ICEncoding enc = ic_encode(occ);
  c.expect(enc.rank_of.at("Athlete") == 1 && enc.rank_of.at("Artist") == 2 &&
               enc.rank_of.at("Writer") == 3,
           "Occupation IC encoding");

  SmoothedCategorical sm = fit_categorical({"a", "a", "c"}, {"a", "b", "c", "d"});
  c.expect(near(sm.probs[0], 3.0 / 7.0) && near(sm.probs[1], 1.0 / 7.0) &&
               near(sm.probs[2], 2.0 / 7.0) && near(sm.probs[3], 1.0 / 7.0),
           "categorical smoothing (2,0,1,0)");

  ICMap sex = compute_ic(r, "Sex", obj);
  WarmStart ws = warm_start_combos({occ, sex}, 2, Direction::low);
  c.expect(ws.combos.size() == 2 &&
               ws.combos[0] == std::vector<std::string>{"Athlete", "F"} &&
               ws.combos[1] == std::vector<std::string>{"Artist", "F"},
           "warm start order");

  History h;
  long it = 0;
  for (double x : {-5.0, -3.0, -1.0, 2.0, 3.0, 3.5})
    h.trials.push_back({{{"x", ParamValue{x}}}, x * x, it++});
  auto [good, bad] = split_history(h, 0.35);
  c.expect(good.size() == 2 && near(good[0].value, 1.0) && near(good[1].value, 4.0) &&
               near(std::get<double>(good[0].assignment.at("x")), -1.0) &&
               near(std::get<double>(good[1].assignment.at("x")), 2.0),
           "gamma=0.35 split");

  ParamSpace space = build_param_space(r, {"State", "Age"});
  bool ok_space = space.params.size() == 3;
  if (ok_space) {
    const auto* dom = std::get_if<CategoricalDomain>(&space.params[0].domain);
    const auto* mn = std::get_if<ContinuousInterval>(&space.params[1].domain);
    const auto* ln = std::get_if<ContinuousInterval>(&space.params[2].domain);
    ok_space = dom && mn && ln && dom->choices == std::vector<std::string>{"AZ", "FL"} &&
               near(mn->lo, 40) && near(mn->hi, 48) && near(ln->lo, 0) && near(ln->hi, 8);
  }
  c.expect(ok_space, "Table 2 param space");
}

// ---- criterion 2: optimizer sanity -----------------------------------------

void criterion_tpe_quadratic(Check& c) {
  ParamSpace space;
  space.params.push_back({"x", ContinuousInterval{-10.0, 10.0}});
  int hits = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed);
    History h;
    double best = std::numeric_limits<double>::infinity();
    for (long it = 0; it < 100; ++it) {
      Assignment a;
      if (it < 10)
        a["x"] = ParamValue{uniform_in(rng, -10.0, 10.0)};
      else
        a = suggest(h, space, 0.1, 24, rng);
      double x = std::get<double>(a.at("x"));
      h.trials.push_back({std::move(a), x * x, it});
      best = std::min(best, std::abs(x));
    }
    hits += best < 0.5;
  }
  c.expect(hits >= 9, "only " + std::to_string(hits) + "/10 seeds reached |x| < 0.5");
}

// ---- criterion 3: oracle equivalence ---------------------------------------

void criterion_oracle_equivalence(Check& c) {
  Rng rng(2024);
  for (int inst = 0; inst < 20 && c.ok; ++inst) {
    // 1-2 categorical columns, 2-4 values each, product <= 20, 60 rows
    std::size_t ncols = 1 + inst % 2;
    std::vector<std::size_t> nvals(ncols);
    do {
      for (auto& v : nvals) v = 2 + uniform_index(rng, 3);
    } while (std::accumulate(nvals.begin(), nvals.end(), std::size_t{1},
                             std::multiplies<>()) > 20);

    std::vector<Column> cols;
    for (std::size_t k = 0; k < ncols; ++k) {
      Column col;
      col.name = "c" + std::to_string(k);
      col.kind = ColumnKind::categorical;
      cols.push_back(col);
    }
    Column outcome;
    outcome.name = "y";
    outcome.kind = ColumnKind::categorical;
    for (std::size_t row = 0; row < 60; ++row) {
      double bias = 0.0;
      for (std::size_t k = 0; k < ncols; ++k) {
        std::size_t v = uniform_index(rng, nvals[k]);
        cols[k].cats.push_back("v" + std::to_string(v));
        bias += static_cast<double>(v) / static_cast<double>(nvals[k]);
      }
      bool bad = uniform01(rng) < 0.15 + 0.6 * bias / static_cast<double>(ncols);
      outcome.cats.push_back(bad ? "bad" : "ok");
    }
    cols.push_back(outcome);
    Relation r(std::move(cols));
    ObjectiveSpec spec = rate_spec("y", "bad");
    std::vector<std::string> vars;
    for (std::size_t k = 0; k < ncols; ++k) vars.push_back("c" + std::to_string(k));

    // warm start vs. brute-force Cartesian sort
    ICObjective icobj = [&](const Relation& filtered, const Predicate&) -> std::optional<double> {
      return eval_expr(filtered, std::get<QueryExpr>(spec.kind));
    };
    std::vector<ICMap> ics;
    for (const std::string& v : vars) ics.push_back(compute_ic(r, v, icobj));
    std::size_t product = 1;
    for (const ICMap& m : ics) product *= m.scores.size();

    struct BruteCombo {
      double sum;
      std::vector<std::string> tuple;
    };
    std::vector<BruteCombo> brute;
    std::vector<std::size_t> idx(ics.size(), 0);
    for (;;) {
      BruteCombo bc;
      bc.sum = 0.0;
      for (std::size_t k = 0; k < ics.size(); ++k) {
        auto it = ics[k].scores.begin();
        std::advance(it, static_cast<long>(idx[k]));
        bc.tuple.push_back(it->first);
        bc.sum += it->second;
      }
      brute.push_back(std::move(bc));
      std::size_t k = ics.size();
      while (k > 0) {
        if (++idx[k - 1] < ics[k - 1].scores.size()) break;
        idx[k - 1] = 0;
        --k;
      }
      if (k == 0) break;
    }
    std::stable_sort(brute.begin(), brute.end(), [](const BruteCombo& a, const BruteCombo& b) {
      if (a.sum != b.sum) return a.sum < b.sum;
      return a.tuple < b.tuple;
    });
    WarmStart ws = warm_start_combos(ics, product, Direction::low);
    bool same = ws.combos.size() == brute.size();
    for (std::size_t i = 0; same && i < brute.size(); ++i) same = ws.combos[i] == brute[i].tuple;
    c.expect(same, "warm start != brute Cartesian sort on instance " + std::to_string(inst));
    if (!c.ok) return;

    // every candidate predicate the engine can see: singles and full combos
    std::vector<Predicate> cands;
    for (std::size_t k = 0; k < ics.size(); ++k)
      for (const auto& [v, s] : ics[k].scores)
        cands.push_back(Predicate{{CategoricalEq{vars[k], v}}});
    for (const BruteCombo& bc : brute) {
      Predicate p;
      for (std::size_t k = 0; k < bc.tuple.size(); ++k)
        p.clauses.push_back(CategoricalEq{vars[k], bc.tuple[k]});
      cands.push_back(std::move(p));
    }
    double best = std::numeric_limits<double>::infinity();
    for (const Predicate& p : cands) {
      auto v = evaluate(spec, r, p);
      if (v) best = std::min(best, *v);
    }

    std::size_t ic_total = 0;
    for (const ICMap& m : ics) ic_total += m.scores.size();
    EngineConfig cfg;
    cfg.strategy = Strategy::tpe_ic_ws;
    cfg.n_init = product;
    cfg.max_iters = ic_total + product;
    cfg.seed = 1000 + static_cast<std::uint64_t>(inst);
    cfg.keep_trace = false;
    ExplainResult res = explain(r, vars, spec, cfg);
    c.expect(res.best_value == best, "engine missed the exhaustive optimum on instance " +
                                         std::to_string(inst) + " (engine " +
                                         std::to_string(res.best_value) + " vs " +
                                         std::to_string(best) + ")");
  }
}

// ---- criterion 4: method comparison ----------------------------------------

double method_mean(const ExperimentReport& rep, const std::string& method, bool f_score) {
  for (const MethodSummary& m : rep.methods)
    if (m.method == method) return f_score ? m.mean_scores.f_score : m.mean_final_value;
  return std::numeric_limits<double>::quiet_NaN();
}

void criterion_method_comparison(Check& c, std::string& note) {
  // 4a: tpe_ic_ws vs random search, 10 paired seeds, 60 s wall each
  SyntheticSpec sp;
  sp.n_dims = 2;
  sp.mu = 80.0;
  sp.penalty_c = 0.2;
  sp.seed = 7;
  SyntheticDataset d = gen_scorpion_synthetic(sp);
  ObjectiveSpec spec;
  spec.direction = Direction::high;
  spec.kind = d.objective;

  ExperimentConfig cfg;
  cfg.methods = {Strategy::tpe_ic_ws, Strategy::random_search};
  cfg.runs = 10;
  cfg.base_seed = 1;
  cfg.time_budget_s = 60.0;
  cfg.jobs = 2;  // two paired cells at a time; budgets are per run
  cfg.write_traces = false;
  ExperimentReport rep = run_experiment(d.relation, d.variables, spec, &d.truth, cfg);
  for (const CellResult& cell : rep.cells)
    c.expect(cell.ok, "cell " + cell.method + "/" + std::to_string(cell.run) + ": " + cell.error);
  double tpe = method_mean(rep, "tpe_ic_ws", false);
  double rnd = method_mean(rep, "random", false);
  {
    std::ostringstream os;
    os << "scorpion tpe_ic_ws " << tpe << " vs random " << rnd;
    note = os.str();
  }
  c.expect(tpe >= rnd, note);

  // 4b: rank encoding vs plain TPE on a planted categorical corruption,
  // 3 columns x 20 labels, 5% of rows corrupted via one label of c0
  Rng rng(5);
  std::vector<Column> cols(4);
  const std::size_t rows = 3000;
  for (std::size_t k = 0; k < 3; ++k) {
    cols[k].name = "c" + std::to_string(k);
    cols[k].kind = ColumnKind::categorical;
    for (std::size_t i = 0; i < rows; ++i) {
      char buf[8];
      std::snprintf(buf, sizeof buf, "v%02zu", uniform_index(rng, 20));
      cols[k].cats.push_back(buf);
    }
  }
  cols[3].name = "x";
  cols[3].kind = ColumnKind::numeric;
  for (std::size_t i = 0; i < rows; ++i) cols[3].nums.push_back(draw_normal(rng, 10.0, 1.0));
  Relation clean(std::move(cols));
  Corrupted corrupted = corrupt(clean, Predicate{{CategoricalEq{"c0", "v03"}}},
                                ScaleNumeric{"x", 10.0});

  ObjectiveSpec avg_spec;
  QueryExpr avg;
  avg.node = QueryExpr::Node::agg;
  avg.agg.agg = AggKind::avg;
  avg.agg.target = "x";
  avg_spec.kind = avg;
  avg_spec.direction = Direction::low;

  ExperimentConfig cfg_b;
  cfg_b.methods = {Strategy::tpe_ic_ws, Strategy::tpe_plain};
  cfg_b.runs = 10;
  cfg_b.base_seed = 21;
  cfg_b.max_iters = 150;
  cfg_b.jobs = 2;
  cfg_b.write_traces = false;
  cfg_b.sample_interval_s = 1.0;
  ExperimentReport rep_b = run_experiment(corrupted.relation, {"c0", "c1", "c2"}, avg_spec,
                                          &corrupted.truth, cfg_b);
  for (const CellResult& cell : rep_b.cells)
    c.expect(cell.ok, "cell " + cell.method + "/" + std::to_string(cell.run) + ": " + cell.error);
  double f_ic = method_mean(rep_b, "tpe_ic_ws", true);
  double f_plain = method_mean(rep_b, "tpe_plain", true);
  {
    std::ostringstream os;
    os << note << "; corruption F tpe_ic_ws " << f_ic << " vs tpe_plain " << f_plain;
    note = os.str();
  }
  c.expect(f_ic >= f_plain, note);
}

// ---- criterion 5: property suites ------------------------------------------

void criterion_properties(Check& c) {
  Rng rng(77);

  // filter complementarity on random predicates over the profile table
  Relation r = profiles();
  for (int i = 0; i < 200 && c.ok; ++i) {
    Predicate p;
    if (uniform_index(rng, 2)) {
      double lo = uniform_in(rng, 38.0, 50.0);
      p.clauses.push_back(NumericRange{"Age", lo, lo + uniform_in(rng, 0.0, 10.0)});
    }
    if (uniform_index(rng, 2) || p.clauses.empty()) {
      auto vals = unique_values(r, "Occupation");
      p.clauses.push_back(CategoricalEq{"Occupation", vals[uniform_index(rng, vals.size())]});
    }
    std::size_t matched = count_satisfying(r, p);
    Relation kept = filter_not(r, p);
    c.expect(matched + kept.row_count() == r.row_count(), "filter complementarity");
    auto mask = satisfies_mask(r, p);
    c.expect(static_cast<std::size_t>(std::count(mask.begin(), mask.end(), char(1))) == matched,
             "mask/count agreement");
  }

  // best_so_far monotone in the optimization direction
  ObjectiveSpec rate = rate_spec("M.predict(I)", "repeat");
  for (Direction dir : {Direction::low, Direction::high}) {
    ObjectiveSpec spec = rate;
    spec.direction = dir;
    EngineConfig cfg;
    cfg.strategy = Strategy::tpe_ic_ws;
    cfg.max_iters = 40;
    cfg.seed = 3;
    ExplainResult res = explain(r, {"Occupation", "Sex", "Age"}, spec, cfg);
    for (std::size_t i = 1; i < res.best_so_far.size(); ++i) {
      const auto& [w0, b0] = res.best_so_far[i - 1];
      const auto& [w1, b1] = res.best_so_far[i];
      c.expect(w1 >= w0, "best_so_far wall times must not decrease");
      c.expect(dir == Direction::low ? b1 <= b0 : b1 >= b0, "best_so_far not monotone");
    }
  }

  // EI monotone in g/b over 1e4 random triples
  for (int i = 0; i < 10000 && c.ok; ++i) {
    double g1 = uniform_in(rng, 1e-12, 2.0), b1 = uniform_in(rng, 1e-12, 2.0);
    double g2 = uniform_in(rng, 1e-12, 2.0), b2 = uniform_in(rng, 1e-12, 2.0);
    double gamma = uniform_in(rng, 0.01, 0.99);
    if (g1 / b1 >= g2 / b2)
      c.expect(ei_score(g1, b1, gamma) >= ei_score(g2, b2, gamma), "EI not monotone in g/b");
    else
      c.expect(ei_score(g1, b1, gamma) <= ei_score(g2, b2, gamma), "EI not monotone in g/b");
  }

  // Parzen mixtures integrate to 1 over a wide support (Simpson)
  for (int m = 0; m < 12 && c.ok; ++m) {
    std::size_t n = 2 + uniform_index(rng, 10);
    std::vector<double> values;
    for (std::size_t i = 0; i < n; ++i) values.push_back(uniform_in(rng, -5.0, 5.0));
    ContinuousInterval support{-200.0, 200.0};
    ParzenMixture mix = fit_parzen(values, support);
    const std::size_t steps = 1 << 17;  // even
    double h = (support.hi - support.lo) / static_cast<double>(steps);
    double integral = density(mix, support.lo) + density(mix, support.hi);
    for (std::size_t i = 1; i < steps; ++i) {
      double x = support.lo + h * static_cast<double>(i);
      integral += density(mix, x) * (i % 2 ? 4.0 : 2.0);
    }
    integral *= h / 3.0;
    c.expect(std::abs(integral - 1.0) < 1e-6,
             "Parzen integral " + std::to_string(integral) + " != 1");
  }

  // hyperband evaluation-count identity
  for (std::size_t p : {8u, 16u, 32u, 64u}) {
    EngineConfig cfg;
    cfg.strategy = Strategy::hyperband;
    cfg.population = p;
    cfg.max_iters = 100000;
    cfg.seed = 1;
    cfg.keep_trace = true;
    ExplainResult res = explain(r, {"Occupation", "Sex"}, rate, cfg);
    c.expect(res.iterations == 15 * p / 8, "hyperband count != 15P/8 for P=" + std::to_string(p));
    std::vector<double> fracs;
    for (const TraceRow& t : res.trials)
      if (fracs.empty() || fracs.back() != t.data_fraction) fracs.push_back(t.data_fraction);
    c.expect(fracs == std::vector<double>{0.125, 0.25, 0.5, 1.0}, "hyperband fractions");
  }

  // determinism: identical seed and config give identical traces
  for (Strategy s : {Strategy::tpe_ic_ws, Strategy::tpe_plain, Strategy::random_search,
                     Strategy::hyperband}) {
    EngineConfig cfg;
    cfg.strategy = s;
    cfg.max_iters = 60;
    cfg.population = 16;
    cfg.seed = 12;
    ExplainResult a = explain(r, {"Occupation", "Sex", "Age"}, rate, cfg);
    ExplainResult b = explain(r, {"Occupation", "Sex", "Age"}, rate, cfg);
    c.expect(a.trials.size() == b.trials.size(), "trace length differs");
    for (std::size_t i = 0; c.ok && i < a.trials.size(); ++i) {
      nlohmann::json ja, jb;
      to_json(ja, a.trials[i]);
      to_json(jb, b.trials[i]);
      ja["wall_s"] = 0.0;
      jb["wall_s"] = 0.0;
      c.expect(ja == jb, "trace row differs under " + to_string(s));
    }
  }
}

// ---- criterion 6: external round trip --------------------------------------

void criterion_external(Check& c) {
  TempDir tmp;
  auto script = tmp.write("count.py",
                          "import json, sys\n"
                          "for line in sys.stdin:\n"
                          "    req = json.loads(line)\n"
                          "    if req.get('shutdown'):\n"
                          "        break\n"
                          "    with open(req['data_path']) as f:\n"
                          "        rows = sum(1 for _ in f) - 1\n"
                          "    print(json.dumps({'id': req['id'], 'value': float(rows)}),\n"
                          "          flush=True)\n");

  // 20 rows; the most frequent single value is unique: a=x on 8 rows
  std::ostringstream csv;
  csv << "a,b\n";
  const char* as[20] = {"x", "x", "x", "x", "x", "x", "x", "x", "y", "y",
                        "y", "y", "y", "y", "z", "z", "z", "z", "z", "w"};
  const char* bs[20] = {"p", "p", "q", "q", "r", "r", "p", "q", "p", "p",
                        "q", "r", "r", "r", "p", "q", "q", "r", "p", "q"};
  for (int i = 0; i < 20; ++i) csv << as[i] << ',' << bs[i] << '\n';
  auto data = tmp.write("d.csv", csv.str());
  Relation r = load_csv(data, {});

  // brute force over everything the engine can express: singles and pairs
  std::size_t max_removed = 0;
  for (const std::string& av : unique_values(r, "a"))
    max_removed = std::max(max_removed,
                           count_satisfying(r, Predicate{{CategoricalEq{"a", av}}}));
  for (const std::string& bv : unique_values(r, "b"))
    max_removed = std::max(max_removed,
                           count_satisfying(r, Predicate{{CategoricalEq{"b", bv}}}));
  for (const std::string& av : unique_values(r, "a"))
    for (const std::string& bv : unique_values(r, "b"))
      max_removed = std::max(
          max_removed, count_satisfying(r, Predicate{{CategoricalEq{"a", av},
                                                      CategoricalEq{"b", bv}}}));

  ObjectiveSpec spec;
  spec.direction = Direction::low;  // minimize remaining = maximize removed
  spec.kind = ExternalObjective{"python3 " + script.string(), 60.0};

  EngineConfig cfg;
  cfg.strategy = Strategy::tpe_ic_ws;
  cfg.n_init = 12;  // all 4x3 combos
  cfg.max_iters = 7 + 12;
  cfg.seed = 9;
  ExplainResult res = explain(r, {"a", "b"}, spec, cfg);
  c.expect(count_satisfying(r, res.best_predicate) == max_removed,
           "engine removed " + std::to_string(count_satisfying(r, res.best_predicate)) +
               " rows, brute force " + std::to_string(max_removed));
  c.expect(near(res.best_value, static_cast<double>(20 - max_removed)),
           "reported value != remaining row count");
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<void(Check&, std::string&)> fn;
};

}  // namespace

int main() {
  std::vector<Criterion> criteria = {
      {1, "worked-example exactness", 5.0,
       [](Check& c, std::string&) { criterion_worked_examples(c); }},
      {2, "TPE minimizes x^2 in >= 9/10 seeds", 30.0,
       [](Check& c, std::string&) { criterion_tpe_quadratic(c); }},
      {3, "warm start and engine match exhaustive oracles", 10.0,
       [](Check& c, std::string&) { criterion_oracle_equivalence(c); }},
      {4, "tpe_ic_ws >= baselines at desk scale", 900.0, criterion_method_comparison},
      {5, "property suites", 60.0, [](Check& c, std::string&) { criterion_properties(c); }},
      {6, "external objective round trip", 10.0,
       [](Check& c, std::string&) { criterion_external(c); }},
  };

  bool all_ok = true;
  for (Criterion& cr : criteria) {
    Check check;
    std::string note;
    auto t0 = std::chrono::steady_clock::now();
    try {
      cr.fn(check, note);
    } catch (const std::exception& e) {
      check.ok = false;
      check.detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool in_time = secs < cr.limit_s;
    bool ok = check.ok && in_time;
    all_ok = all_ok && ok;
    std::printf("%s criterion %d: %s (%.2f s)%s%s%s\n", ok ? "PASS" : "FAIL", cr.id, cr.name,
                secs, !in_time ? " [over time limit]" : "",
                !check.ok ? (" -- " + check.detail).c_str() : "",
                !note.empty() && check.ok ? (" [" + note + "]").c_str() : "");
    std::fflush(stdout);
  }
  return all_ok ? 0 : 1;
}
