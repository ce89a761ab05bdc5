#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "predex/predicate.hpp"
#include "predex/query.hpp"
#include "predex/relation.hpp"

namespace predex {

// Synthetic outlier benchmark: `groups` groups of `tuples_per_group` rows,
// attribute columns A_1..A_n uniform in [attr_lo, attr_hi]. The first
// groups/2 groups are outliers; each hides a nested pair of hypercubes
// around a random center holding inner_fraction / outer_fraction of the
// group's rows (Chebyshev order statistics, exact within one tuple). A_v is
// N(mu, 10) inside the inner cube, N((mu+10)/2, 10) in the outer shell, and
// N(10, 10) elsewhere and in holdout groups.
struct SyntheticSpec {
  std::size_t n_dims = 2;
  double mu = 80.0;  // 80 = easy, 30 = hard
  std::size_t groups = 10;
  std::size_t tuples_per_group = 2000;
  double attr_lo = 0.0;
  double attr_hi = 100.0;
  double inner_fraction = 0.25;
  double outer_fraction = 0.25;
  std::uint64_t seed = 0;
  double penalty_c = 0.2;
  double lambda = 1.0;
};

// True outlier rows and the per-group predicates that generate them.
struct GroundTruth {
  std::vector<char> mask;               // row is inside some outer cube
  std::vector<Predicate> predicates;    // one per outlier group
};

struct SyntheticDataset {
  Relation relation;
  BenchObjectiveSpec objective;  // outliers vs holdouts on A_d / A_v
  GroundTruth truth;
  std::vector<std::string> variables;  // A_1..A_n
};

// Throws std::invalid_argument for degenerate fractions, fewer than two
// groups, or an empty attribute range.
SyntheticDataset gen_scorpion_synthetic(const SyntheticSpec& spec);

// ---- Planted corruption for real tables ------------------------------------

struct ScaleNumeric {
  std::string column;
  double factor = 10.0;
};
struct SetCategorical {
  std::string column;
  std::string value;
};
using CorruptAction = std::variant<ScaleNumeric, SetCategorical>;

struct Corrupted {
  Relation relation;
  GroundTruth truth;  // single predicate: the corrupted selection
};

// Applies `action` to the cells of sigma_p(r) and records p as ground truth.
// Throws std::invalid_argument when the action column is missing, has the
// wrong kind, or p matches no rows.
Corrupted corrupt(const Relation& r, const Predicate& p, const CorruptAction& action);

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f_score = 0.0;
};

// Row-set precision/recall/F1 of sigma_p(r) against the ground-truth mask.
// Conventions: precision is 1 for an empty selection, recall is 1 for an
// empty mask, and F is 0 when precision + recall is 0.
Prf prf(const Predicate& p, const Relation& r, const GroundTruth& truth);

}  // namespace predex
