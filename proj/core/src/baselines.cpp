#include "predex/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "run_support.hpp"

namespace predex {

ExplainResult random_search(const Relation& r, const std::vector<std::string>& variables,
                            const ObjectiveSpec& spec, const EngineConfig& cfg,
                            const ProgressFn& on_trial) {
  validate_config(cfg);
  Rng rng(cfg.seed);
  auto proc = detail::spawn_if_external(spec);
  detail::BoundObjective obj(spec, r, proc.get());
  detail::RunState st(cfg, spec.direction, on_trial);
  ParamSpace space = build_param_space(r, variables);
  while (st.budget_left()) {
    Assignment a = detail::random_assignment(space, rng);
    Predicate p = decode(space, a);
    std::optional<double> user = obj.eval_pred(p);
    st.record("random", p, std::move(a), user);
  }
  return st.finish();
}

namespace {

// Rows sampled without replacement, original order kept so per-round
// evaluations stay deterministic for a given seed.
Relation subsample(const Relation& r, double fraction, Rng& rng) {
  std::size_t n = r.row_count();
  auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  k = std::clamp<std::size_t>(k, 1, n);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + uniform_index(rng, n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  std::vector<Column> cols;
  cols.reserve(r.column_count());
  for (const Column& c : r.columns()) {
    Column nc;
    nc.name = c.name;
    nc.kind = c.kind;
    if (c.kind == ColumnKind::numeric) {
      nc.nums.reserve(k);
      for (std::size_t i : idx) nc.nums.push_back(c.nums[i]);
    } else {
      nc.cats.reserve(k);
      for (std::size_t i : idx) nc.cats.push_back(c.cats[i]);
    }
    cols.push_back(std::move(nc));
  }
  return Relation(std::move(cols));
}

struct Scored {
  double internal;
  std::size_t idx;
  bool ok;
  bool operator<(const Scored& o) const {
    if (internal != o.internal) return internal < o.internal;
    return idx < o.idx;
  }
};

}  // namespace

ExplainResult hyperband(const Relation& r, const std::vector<std::string>& variables,
                        const ObjectiveSpec& spec, const EngineConfig& cfg,
                        const ProgressFn& on_trial) {
  validate_config(cfg);
  if (cfg.population < 8)
    throw std::invalid_argument("hyperband: population must be at least 8");
  Rng rng(cfg.seed);
  auto proc = detail::spawn_if_external(spec);
  detail::RunState st(cfg, spec.direction, on_trial);
  ParamSpace space = build_param_space(r, variables);

  std::vector<Assignment> candidates;
  candidates.reserve(cfg.population);
  for (std::size_t i = 0; i < cfg.population; ++i)
    candidates.push_back(detail::random_assignment(space, rng));

  std::vector<double> fractions;
  for (double f = cfg.start_fraction; f < 1.0; f *= 2.0) fractions.push_back(f);
  fractions.push_back(1.0);

  std::vector<std::size_t> alive(candidates.size());
  std::iota(alive.begin(), alive.end(), 0);

  // Best successful evaluation at the largest fraction reached, for the
  // interrupted case.
  bool have_partial = false;
  Scored partial{0.0, 0, true};
  double partial_fraction = -1.0;

  std::vector<Scored> last_round;
  bool interrupted = false;
  for (std::size_t round = 0; round < fractions.size() && !interrupted; ++round) {
    double f = fractions[round];
    Relation sub;
    const Relation* data = &r;
    if (f < 1.0) {
      sub = subsample(r, f, rng);
      data = &sub;
    }
    detail::BoundObjective obj(spec, *data, proc.get());
    std::vector<Scored> scored;
    scored.reserve(alive.size());
    for (std::size_t idx : alive) {
      if (!st.budget_left()) {
        interrupted = true;
        break;
      }
      Predicate p = decode(space, candidates[idx]);
      std::optional<double> user = obj.eval_pred(p);
      double internal = st.record("hyperband", p, candidates[idx], user, f);
      scored.push_back({internal, idx, user.has_value()});
      if (user && (f > partial_fraction ||
                   (f == partial_fraction && internal < partial.internal))) {
        have_partial = true;
        partial = {internal, idx, true};
        partial_fraction = f;
      }
    }
    if (interrupted) break;
    std::sort(scored.begin(), scored.end());
    if (round + 1 == fractions.size()) {
      last_round = std::move(scored);
    } else {
      // Failed evaluations carry penalty values and drop out first.
      std::size_t keep = std::max<std::size_t>(1, scored.size() / 2);
      alive.clear();
      for (std::size_t i = 0; i < keep; ++i) alive.push_back(scored[i].idx);
      std::sort(alive.begin(), alive.end());  // evaluation order stays by index
    }
  }

  // Pick the winner before finish() seals the trace.
  bool have_override = false;
  Predicate best_pred;
  double best_value = 0.0;
  if (!last_round.empty()) {
    // Normal completion: best successful entry of the full-data round.
    for (const Scored& s : last_round) {
      if (!s.ok) continue;
      best_pred = decode(space, candidates[s.idx]);
      best_value = detail::user_scale(spec.direction, s.internal);
      have_override = true;
      break;
    }
  } else if (have_partial) {
    Predicate p = decode(space, candidates[partial.idx]);
    if (partial_fraction < 1.0) {
      // Interrupted before any full-data evaluation: re-score the
      // front-runner on all rows (the one evaluation past the budget the
      // stop rule allows).
      detail::BoundObjective full(spec, r, proc.get());
      std::optional<double> user = full.eval_pred(p);
      double internal = st.record("hyperband", p, candidates[partial.idx], user, 1.0);
      if (user) {
        best_pred = p;
        best_value = detail::user_scale(spec.direction, internal);
        have_override = true;
      }
    } else {
      best_pred = p;
      best_value = detail::user_scale(spec.direction, partial.internal);
      have_override = true;
    }
  }

  ExplainResult res = st.finish();  // throws NoResultError when nothing succeeded
  if (have_override) {
    res.best_predicate = std::move(best_pred);
    res.best_value = best_value;
  }
  return res;
}

}  // namespace predex
