#include "predex/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "predex/rng.hpp"

namespace predex {

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw std::invalid_argument(msg); }

}  // namespace

SyntheticDataset gen_scorpion_synthetic(const SyntheticSpec& spec) {
  if (spec.n_dims < 1) invalid("synth: n_dims must be at least 1");
  if (spec.groups < 2) invalid("synth: need at least 2 groups");
  if (spec.tuples_per_group < 1) invalid("synth: tuples_per_group must be positive");
  if (!(spec.attr_lo < spec.attr_hi)) invalid("synth: empty attribute range");
  if (!(spec.inner_fraction > 0.0 && spec.inner_fraction < 1.0) ||
      !(spec.outer_fraction > 0.0 && spec.outer_fraction < 1.0) ||
      spec.inner_fraction + spec.outer_fraction > 1.0)
    invalid("synth: cube fractions must lie in (0, 1) and sum to at most 1");
  const std::size_t tpg = spec.tuples_per_group;
  auto n_in = static_cast<std::size_t>(std::llround(spec.inner_fraction * static_cast<double>(tpg)));
  auto n_cum = static_cast<std::size_t>(
      std::llround((spec.inner_fraction + spec.outer_fraction) * static_cast<double>(tpg)));
  n_in = std::clamp<std::size_t>(n_in, 1, tpg);
  n_cum = std::clamp<std::size_t>(n_cum, n_in, tpg);

  const std::size_t n_rows = spec.groups * tpg;
  const std::size_t n_outliers = spec.groups / 2;
  Rng rng(spec.seed);

  Column group_col;
  group_col.name = "A_d";
  group_col.kind = ColumnKind::categorical;
  group_col.cats.reserve(n_rows);
  std::vector<Column> attrs(spec.n_dims);
  for (std::size_t d = 0; d < spec.n_dims; ++d) {
    attrs[d].name = "A_" + std::to_string(d + 1);
    attrs[d].kind = ColumnKind::numeric;
    attrs[d].nums.reserve(n_rows);
  }
  Column value_col;
  value_col.name = "A_v";
  value_col.kind = ColumnKind::numeric;
  value_col.nums.reserve(n_rows);

  GroundTruth truth;
  truth.mask.assign(n_rows, 0);

  const double holdout_mu = 10.0;
  const double shell_mu = (spec.mu + holdout_mu) / 2.0;
  const double sigma = 10.0;

  for (std::size_t g = 0; g < spec.groups; ++g) {
    std::string label = "g" + std::to_string(g);
    std::size_t base = g * tpg;
    for (std::size_t t = 0; t < tpg; ++t) {
      group_col.cats.push_back(label);
      for (std::size_t d = 0; d < spec.n_dims; ++d)
        attrs[d].nums.push_back(uniform_in(rng, spec.attr_lo, spec.attr_hi));
    }
    if (g < n_outliers) {
      std::vector<double> center(spec.n_dims);
      for (std::size_t d = 0; d < spec.n_dims; ++d)
        center[d] = uniform_in(rng, spec.attr_lo, spec.attr_hi);
      // Chebyshev order statistics give the half-widths that the target
      // cumulative masses ask for, exact within one tuple.
      std::vector<double> dist(tpg);
      for (std::size_t t = 0; t < tpg; ++t) {
        double m = 0.0;
        for (std::size_t d = 0; d < spec.n_dims; ++d)
          m = std::max(m, std::abs(attrs[d].nums[base + t] - center[d]));
        dist[t] = m;
      }
      std::vector<double> sorted = dist;
      std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(n_in - 1), sorted.end());
      double w_in = sorted[n_in - 1];
      std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(n_cum - 1), sorted.end());
      double w_out = sorted[n_cum - 1];
      for (std::size_t t = 0; t < tpg; ++t) {
        double mu;
        if (dist[t] <= w_in) {
          mu = spec.mu;
        } else if (dist[t] <= w_out) {
          mu = shell_mu;
        } else {
          mu = holdout_mu;
        }
        value_col.nums.push_back(draw_normal(rng, mu, sigma));
        if (dist[t] <= w_out) truth.mask[base + t] = 1;
      }
      Predicate p;
      p.clauses.push_back(CategoricalEq{"A_d", label});
      for (std::size_t d = 0; d < spec.n_dims; ++d)
        p.clauses.push_back(NumericRange{attrs[d].name, center[d] - w_out, center[d] + w_out});
      truth.predicates.push_back(std::move(p));
    } else {
      for (std::size_t t = 0; t < tpg; ++t)
        value_col.nums.push_back(draw_normal(rng, holdout_mu, sigma));
    }
  }

  std::vector<Column> columns;
  columns.reserve(2 + spec.n_dims);
  columns.push_back(std::move(group_col));
  for (Column& c : attrs) columns.push_back(std::move(c));
  columns.push_back(std::move(value_col));

  SyntheticDataset out;
  out.relation = Relation(std::move(columns));

  // Clamp generating predicates to the observed attribute ranges so they
  // are valid against the relation; the selected row set is unchanged.
  for (Predicate& p : truth.predicates) {
    for (Clause& c : p.clauses) {
      if (auto* nr = std::get_if<NumericRange>(&c)) {
        auto [lo, hi] = column_range(out.relation, nr->column);
        nr->lo = std::max(nr->lo, lo);
        nr->hi = std::min(nr->hi, hi);
      }
    }
  }
  out.truth = std::move(truth);

  out.objective.group_col = "A_d";
  out.objective.value_col = "A_v";
  for (std::size_t g = 0; g < spec.groups; ++g)
    (g < n_outliers ? out.objective.outliers : out.objective.holdouts)
        .push_back("g" + std::to_string(g));
  out.objective.penalty_c = spec.penalty_c;
  out.objective.lambda = spec.lambda;

  for (std::size_t d = 0; d < spec.n_dims; ++d)
    out.variables.push_back("A_" + std::to_string(d + 1));
  return out;
}

Corrupted corrupt(const Relation& r, const Predicate& p, const CorruptAction& action) {
  std::vector<char> mask = satisfies_mask(r, p);
  if (std::count(mask.begin(), mask.end(), char(1)) == 0)
    invalid("corrupt: predicate matches no rows");
  std::vector<Column> cols = r.columns();
  if (const auto* scale = std::get_if<ScaleNumeric>(&action)) {
    bool found = false;
    for (Column& c : cols) {
      if (c.name != scale->column) continue;
      if (c.kind != ColumnKind::numeric)
        invalid("corrupt: column \"" + scale->column + "\" is not numeric");
      for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i] && !missing_numeric(c.nums[i])) c.nums[i] *= scale->factor;
      found = true;
    }
    if (!found) invalid("corrupt: no column \"" + scale->column + "\"");
  } else {
    const auto& set = std::get<SetCategorical>(action);
    if (set.value.empty()) invalid("corrupt: replacement value is empty");
    bool found = false;
    for (Column& c : cols) {
      if (c.name != set.column) continue;
      if (c.kind != ColumnKind::categorical)
        invalid("corrupt: column \"" + set.column + "\" is not categorical");
      for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) c.cats[i] = set.value;
      found = true;
    }
    if (!found) invalid("corrupt: no column \"" + set.column + "\"");
  }
  Corrupted out;
  out.relation = Relation(std::move(cols));
  out.truth.mask = std::move(mask);
  out.truth.predicates.push_back(p);
  return out;
}

Prf prf(const Predicate& p, const Relation& r, const GroundTruth& truth) {
  if (truth.mask.size() != r.row_count())
    invalid("prf: ground-truth mask does not match the relation");
  std::vector<char> sel = satisfies_mask(r, p);
  std::size_t n_sel = 0, n_truth = 0, n_both = 0;
  for (std::size_t i = 0; i < sel.size(); ++i) {
    if (sel[i]) ++n_sel;
    if (truth.mask[i]) ++n_truth;
    if (sel[i] && truth.mask[i]) ++n_both;
  }
  Prf out;
  out.precision = n_sel == 0 ? 1.0 : static_cast<double>(n_both) / static_cast<double>(n_sel);
  out.recall = n_truth == 0 ? 1.0 : static_cast<double>(n_both) / static_cast<double>(n_truth);
  double pr = out.precision + out.recall;
  out.f_score = pr > 0.0 ? 2.0 * out.precision * out.recall / pr : 0.0;
  return out;
}

}  // namespace predex
