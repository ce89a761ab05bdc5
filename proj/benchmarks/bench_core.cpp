#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "predex/categorical.hpp"
#include "predex/engine.hpp"
#include "predex/rng.hpp"
#include "predex/synth.hpp"
#include "predex/tpe.hpp"

namespace {

using namespace predex;

const SyntheticDataset& scorpion() {
  static SyntheticDataset d = [] {
    SyntheticSpec sp;
    sp.n_dims = 2;
    sp.seed = 11;
    return gen_scorpion_synthetic(sp);
  }();
  return d;
}

Predicate mid_box() {
  return Predicate{{NumericRange{"A_1", 25.0, 75.0}, NumericRange{"A_2", 25.0, 75.0}}};
}

void BM_FilterNot20k(benchmark::State& state) {
  const Relation& r = scorpion().relation;
  Predicate p = mid_box();
  for (auto _ : state) {
    Relation kept = filter_not(r, p);
    benchmark::DoNotOptimize(kept.row_count());
  }
}
BENCHMARK(BM_FilterNot20k);

void BM_BenchObjective20k(benchmark::State& state) {
  ObjectiveSpec spec;
  spec.direction = Direction::high;
  spec.kind = scorpion().objective;
  const Relation& r = scorpion().relation;
  Predicate p = mid_box();
  for (auto _ : state) {
    auto v = evaluate(spec, r, p);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_BenchObjective20k);

// Cost of one proposal as history grows; this is the dominant engine
// overhead on long time-budgeted runs.
void BM_Suggest(benchmark::State& state) {
  ParamSpace space = build_param_space(scorpion().relation, scorpion().variables);
  Rng rng(1);
  History h;
  for (long it = 0; it < state.range(0); ++it) {
    Assignment a;
    for (const Param& p : space.params) {
      const auto& iv = std::get<ContinuousInterval>(p.domain);
      a[p.name] = uniform_in(rng, iv.lo, iv.hi);
    }
    h.trials.push_back({std::move(a), uniform01(rng), it});
  }
  for (auto _ : state) {
    Assignment a = suggest(h, space, 0.1, 24, rng);
    benchmark::DoNotOptimize(a.size());
  }
}
BENCHMARK(BM_Suggest)->Arg(100)->Arg(1000)->Arg(5000);

std::vector<ICMap> synthetic_ics(std::size_t cols, std::size_t values) {
  Rng rng(3);
  std::vector<ICMap> ics(cols);
  for (std::size_t k = 0; k < cols; ++k) {
    ics[k].column = "c" + std::to_string(k);
    for (std::size_t v = 0; v < values; ++v)
      ics[k].scores["v" + std::to_string(v)] = uniform01(rng);
  }
  return ics;
}

// 4 columns x 30 values = 810k combinations; n_init is tiny, so the lazy
// frontier should beat materializing the product.
void BM_WarmStartFrontier(benchmark::State& state) {
  auto ics = synthetic_ics(4, 30);
  for (auto _ : state) {
    WarmStart ws = warm_start_combos(ics, 10, Direction::low, /*enumeration_limit=*/1);
    benchmark::DoNotOptimize(ws.combos.size());
  }
}
BENCHMARK(BM_WarmStartFrontier);

void BM_WarmStartEnumerate(benchmark::State& state) {
  auto ics = synthetic_ics(4, 30);
  for (auto _ : state) {
    WarmStart ws = warm_start_combos(ics, 10, Direction::low);
    benchmark::DoNotOptimize(ws.combos.size());
  }
}
BENCHMARK(BM_WarmStartEnumerate);

}  // namespace

BENCHMARK_MAIN();
