#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "predex/relation.hpp"
#include "predex/types.hpp"

namespace predex {

// Inclusive range clause on a numeric column: lo <= value <= hi.
struct NumericRange {
  std::string column;
  double lo = 0.0;
  double hi = 0.0;
};

// Equality clause on a categorical column.
struct CategoricalEq {
  std::string column;
  std::string value;
};

using Clause = std::variant<NumericRange, CategoricalEq>;

const std::string& clause_column(const Clause& c);

// Conjunction of clauses, at most one per column, never empty.
struct Predicate {
  std::vector<Clause> clauses;
};

// Structural checks plus column existence and kind agreement against r.
// Throws std::invalid_argument on violation.
void validate_predicate(const Predicate& p, const Relation& r);

void to_json(nlohmann::json& j, const Predicate& p);
void from_json(const nlohmann::json& j, Predicate& p);

// ---- Search space ----------------------------------------------------------

struct ContinuousInterval {
  double lo = 0.0;
  double hi = 0.0;
};

// Closed integer range; used for rank-encoded categorical columns. Samplers
// treat it continuously and round to the nearest in-range integer.
struct IntegerInterval {
  int lo = 0;
  int hi = 0;
};

struct CategoricalDomain {
  std::vector<std::string> choices;  // sorted, distinct
};

using ParamDomain = std::variant<ContinuousInterval, IntegerInterval, CategoricalDomain>;

struct Param {
  std::string name;
  ParamDomain domain;
};

// How one explained column maps back to a clause.
struct ColumnBinding {
  enum class Kind { numeric, categorical, ranked };
  std::string column;
  Kind kind = Kind::categorical;
  // numeric: params[first_param] is <col>_min and params[first_param + 1] is
  // <col>_length; otherwise params[first_param] is the value parameter.
  std::size_t first_param = 0;
  double col_min = 0.0;  // numeric decode clamps hi to col_max
  double col_max = 0.0;
  std::vector<std::string> ranked_values;  // ranked: rank i -> ranked_values[i - 1]
};

struct ParamSpace {
  std::vector<Param> params;
  std::vector<ColumnBinding> bindings;

  const Param* find_param(const std::string& name) const;
};

// One search dimension pair (<col>_min, <col>_length) per numeric column and
// one value dimension per categorical column, in `variables` order. Columns
// present in `ranked` (rank order, best first) become IntegerInterval [1, n]
// dimensions instead of label dimensions. Throws std::invalid_argument for
// unknown columns, numeric columns without finite values, categorical columns
// without values, and rank lists that do not match the column's value set.
ParamSpace build_param_space(
    const Relation& r, const std::vector<std::string>& variables,
    const std::map<std::string, std::vector<std::string>>& ranked = {});

// Assignment -> Predicate. Numeric: hi = min(lo + length, col_max); values
// outside the declared domain are accepted and resolved by that clamp.
// Ranked: the rank rounds to the nearest integer in [1, n]. Throws
// std::invalid_argument when a parameter is absent, has the wrong type, is
// non-finite, or names a label outside the domain.
Predicate decode(const ParamSpace& space, const Assignment& a);

}  // namespace predex
