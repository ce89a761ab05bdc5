#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <variant>

namespace predex {

// Optimization direction as seen by the user. "low" means the observed
// objective value is unexpectedly high and removal should minimize it.
enum class Direction { low, high };

inline std::string to_string(Direction d) { return d == Direction::low ? "low" : "high"; }

inline Direction direction_from_string(const std::string& s) {
  if (s == "low") return Direction::low;
  if (s == "high") return Direction::high;
  throw std::invalid_argument("direction must be \"low\" or \"high\", got \"" + s + "\"");
}

// A sampled value for a single search parameter: numeric position for
// interval parameters, category label for categorical parameters.
using ParamValue = std::variant<double, std::string>;

// One point of the search space, keyed by parameter name. std::map keeps
// iteration (and hence serialization) order deterministic.
using Assignment = std::map<std::string, ParamValue>;

// An individual objective evaluation failed (empty aggregate, division by
// zero, external-process error). Callers map this to the penalty rule.
class EvaluationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A run finished without a single successful evaluation.
class NoResultError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace predex
