#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "predex/predicate.hpp"
#include "predex/relation.hpp"
#include "predex/types.hpp"

namespace predex {

// Individual contributions of one categorical column, user scale.
// scores holds every distinct value of the column exactly once.
struct ICMap {
  std::string column;
  std::map<std::string, double> scores;
  std::set<std::string> failed;  // values whose evaluation failed (penalty score)
};

// Evaluator for IC probes: receives sigma_{not p}(r) and the single-clause
// predicate that was removed; nullopt signals failure.
using ICObjective =
    std::function<std::optional<double>(const Relation& filtered, const Predicate& removed)>;

// IC(c) = obj(filter_not(r, column = c)), one evaluation per distinct value
// in sorted value order. Failures score worst-finite plus one for
// direction=low (minus one for high) and are flagged; with no finite score
// the penalty base is 0. Exceptions from obj propagate.
ICMap compute_ic(const Relation& r, const std::string& column, const ICObjective& obj,
                 Direction dir = Direction::low);

// Rank encoding: 1..n ascending by (score, value), so similar contributions
// sit on adjacent integers.
struct ICEncoding {
  std::string column;
  std::vector<std::string> by_rank;  // rank i -> by_rank[i - 1]
  std::map<std::string, int> rank_of;
};

ICEncoding ic_encode(const ICMap& m);

struct WarmStart {
  // Value tuples aligned with the ICMap list, best summed score first, ties
  // by lexicographic tuple order.
  std::vector<std::vector<std::string>> combos;
  bool shortfall = false;  // fewer combinations exist than requested
};

// Best n_init combinations by summed IC (minimized for dir=low, maximized
// for dir=high). Small cross-products are enumerated outright; larger ones
// use a best-first frontier, which yields the identical ordering.
WarmStart warm_start_combos(const std::vector<ICMap>& ics, std::size_t n_init, Direction dir,
                            std::size_t enumeration_limit = 1000000);

}  // namespace predex
