#include <doctest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "helpers.hpp"
#include "predex/baselines.hpp"
#include "predex/engine.hpp"
#include "predex/synth.hpp"

using namespace predex;
using predex::testing::profiles;

namespace {

ObjectiveSpec rate_spec() {
  QueryExpr num;
  num.node = QueryExpr::Node::agg;
  num.agg.agg = AggKind::count;
  Condition c;
  c.column = "M.predict(I)";
  c.op = CmpOp::eq;
  c.operand = std::string("repeat");
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

std::string dump(const Predicate& p) {
  nlohmann::json j = p;
  return j.dump();
}

}  // namespace

TEST_CASE("random search explores and stays deterministic") {
  Relation r = profiles();
  EngineConfig cfg;
  cfg.strategy = Strategy::random_search;
  cfg.max_iters = 40;
  cfg.seed = 17;
  ExplainResult a = explain(r, {"Occupation", "Sex", "Age"}, rate_spec(), cfg);
  CHECK(a.iterations == 40);
  REQUIRE(a.trials.size() == 40);
  for (const TraceRow& t : a.trials) {
    CHECK(t.phase == "random");
    CHECK(t.predicate.clauses.size() == 3);
    CHECK(t.data_fraction == doctest::Approx(1.0));
  }
  CHECK(a.best_value <= 0.8);

  // the dispatcher and the direct entry point agree
  ExplainResult b = random_search(r, {"Occupation", "Sex", "Age"}, rate_spec(), cfg);
  REQUIRE(b.trials.size() == a.trials.size());
  for (std::size_t i = 0; i < a.trials.size(); ++i) {
    CHECK(dump(a.trials[i].predicate) == dump(b.trials[i].predicate));
    CHECK(a.trials[i].value == b.trials[i].value);
  }
}

TEST_CASE("random search draws labels and numbers inside their domains") {
  Relation r = profiles();
  EngineConfig cfg;
  cfg.strategy = Strategy::random_search;
  cfg.max_iters = 60;
  cfg.seed = 4;
  ExplainResult res = explain(r, {"Age", "State"}, rate_spec(), cfg);
  for (const TraceRow& t : res.trials) {
    double lo = std::get<double>(t.assignment.at("Age_min"));
    double len = std::get<double>(t.assignment.at("Age_length"));
    CHECK(lo >= 40.0);
    CHECK(lo <= 48.0);
    CHECK(len >= 0.0);
    CHECK(len <= 8.0);
    auto st = std::get<std::string>(t.assignment.at("State"));
    CHECK((st == "AZ" || st == "FL"));
  }
}

TEST_CASE("hyperband runs 15P/8 evaluations over doubling fractions") {
  Relation r = profiles();
  EngineConfig cfg;
  cfg.strategy = Strategy::hyperband;
  cfg.population = 32;
  cfg.max_iters = 1000;
  cfg.seed = 21;
  ExplainResult res = explain(r, {"Occupation", "Sex", "Age"}, rate_spec(), cfg);
  CHECK(res.iterations == 60);  // 32 + 16 + 8 + 4
  REQUIRE(res.trials.size() == 60);
  auto frac_at = [&](std::size_t i) { return res.trials[i].data_fraction; };
  for (std::size_t i = 0; i < 32; ++i) CHECK(frac_at(i) == doctest::Approx(0.125));
  for (std::size_t i = 32; i < 48; ++i) CHECK(frac_at(i) == doctest::Approx(0.25));
  for (std::size_t i = 48; i < 56; ++i) CHECK(frac_at(i) == doctest::Approx(0.5));
  for (std::size_t i = 56; i < 60; ++i) CHECK(frac_at(i) == doctest::Approx(1.0));
  for (const TraceRow& t : res.trials) CHECK(t.phase == "hyperband");

  // the winner is a full-data evaluation from the last round
  bool found = false;
  for (std::size_t i = 56; i < 60; ++i)
    if (!res.trials[i].failed && dump(res.trials[i].predicate) == dump(res.best_predicate)) {
      CHECK(res.best_value == res.trials[i].value);
      found = true;
    }
  CHECK(found);
}

TEST_CASE("hyperband eval-count identity for divisible populations") {
  Relation r = profiles();
  for (std::size_t p : {8u, 16u, 64u}) {
    EngineConfig cfg;
    cfg.strategy = Strategy::hyperband;
    cfg.population = p;
    cfg.max_iters = 10000;
    cfg.seed = 2;
    cfg.keep_trace = false;
    ExplainResult res = explain(r, {"Occupation", "Sex"}, rate_spec(), cfg);
    CHECK(res.iterations == 15 * p / 8);
  }
}

TEST_CASE("hyperband with a shallower start fraction") {
  Relation r = profiles();
  EngineConfig cfg;
  cfg.strategy = Strategy::hyperband;
  cfg.population = 8;
  cfg.start_fraction = 0.25;
  cfg.max_iters = 1000;
  cfg.seed = 6;
  ExplainResult res = explain(r, {"Occupation", "Sex"}, rate_spec(), cfg);
  CHECK(res.iterations == 14);  // 8 + 4 + 2 over {0.25, 0.5, 1}
  CHECK(res.trials[0].data_fraction == doctest::Approx(0.25));
  CHECK(res.trials[13].data_fraction == doctest::Approx(1.0));
}

TEST_CASE("hyperband interrupted by budget re-scores the front-runner") {
  Relation r = profiles();
  EngineConfig cfg;
  cfg.strategy = Strategy::hyperband;
  cfg.population = 32;
  cfg.max_iters = 40;  // inside round 2 of 32/16/8/4
  cfg.seed = 11;
  ExplainResult res = explain(r, {"Occupation", "Sex", "Age"}, rate_spec(), cfg);
  CHECK(res.iterations == 41);  // 40 + the allowed full-data re-score
  REQUIRE(!res.trials.empty());
  const TraceRow& last = res.trials.back();
  CHECK(last.data_fraction == doctest::Approx(1.0));
  CHECK(dump(last.predicate) == dump(res.best_predicate));
  CHECK(res.best_value == last.value);
}

TEST_CASE("hyperband on the synthetic benchmark produces a scored predicate") {
  SyntheticSpec sp;
  sp.tuples_per_group = 100;
  sp.groups = 4;
  sp.n_dims = 1;
  sp.seed = 12;
  SyntheticDataset d = gen_scorpion_synthetic(sp);
  ObjectiveSpec spec;
  spec.direction = Direction::high;
  spec.kind = d.objective;
  EngineConfig cfg;
  cfg.strategy = Strategy::hyperband;
  cfg.population = 16;
  cfg.max_iters = 200;
  cfg.seed = 5;
  ExplainResult res = explain(d.relation, d.variables, spec, cfg);
  CHECK(res.iterations == 30);
  CHECK(std::isfinite(res.best_value));
  validate_predicate(res.best_predicate, d.relation);
  // direct call agrees with the dispatcher
  ExplainResult direct = hyperband(d.relation, d.variables, spec, cfg);
  CHECK(direct.best_value == res.best_value);
}
