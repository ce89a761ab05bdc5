#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "predex/predicate.hpp"
#include "predex/relation.hpp"

namespace predex {

enum class CmpOp { eq, ne, lt, le, gt, ge };

// Boolean row filter. Comparisons on missing cells are false (and so are
// their negations, as in SQL). Categorical columns support eq/ne only.
struct Condition {
  enum class Type { cmp, conj, disj };
  Type type = Type::cmp;
  // cmp
  std::string column;
  CmpOp op = CmpOp::eq;
  std::variant<double, std::string> operand;
  // conj / disj
  std::vector<Condition> children;
};

enum class AggKind { count, sum, avg };

struct AggQuery {
  AggKind agg = AggKind::count;
  std::optional<std::string> target;   // required for sum/avg, numeric
  std::optional<Condition> where;
};

// Arithmetic over aggregate leaves, e.g. count(where)/count(*).
struct QueryExpr {
  enum class Node { agg, constant, add, sub, mul, divide };
  Node node = Node::constant;
  AggQuery agg;           // node == agg
  double constant = 0.0;  // node == constant
  std::vector<QueryExpr> kids;  // binary nodes: exactly 2
};

// sum/avg skip missing targets; avg divides by the count of non-missing
// matching cells and throws EvaluationFailure when that count is zero.
double eval_agg(const Relation& r, const AggQuery& q);

// Throws EvaluationFailure on division by zero or a non-finite result.
double eval_expr(const Relation& r, const QueryExpr& e);

// Column existence/kind checks plus "at least one aggregate leaf".
// Throws std::invalid_argument on violation.
void validate_expr(const QueryExpr& e, const Relation& r);

void to_json(nlohmann::json& j, const Condition& c);
void from_json(const nlohmann::json& j, Condition& c);
void to_json(nlohmann::json& j, const QueryExpr& e);
void from_json(const nlohmann::json& j, QueryExpr& e);

// ---- Benchmark objective ---------------------------------------------------

// Outlier/holdout scoring for the synthetic benchmark, maximize:
//   mean_o diff_o / max(removed_o, 1/|o|)^penalty_c  -  lambda * mean_h |diff_h|
// where diff_g is the drop in sum(value_col) over group g caused by removing
// sigma_p(r), and removed_o is the removed fraction of group o's rows.
struct BenchObjectiveSpec {
  std::string group_col;
  std::string value_col;
  std::vector<std::string> outliers;
  std::vector<std::string> holdouts;
  double penalty_c = 0.2;
  double lambda = 1.0;
};

void to_json(nlohmann::json& j, const BenchObjectiveSpec& s);
void from_json(const nlohmann::json& j, BenchObjectiveSpec& s);

// Caches group membership and full-data sums; eval is one pass over the
// rows. Constructor throws std::invalid_argument for unknown/empty groups,
// overlapping outlier and holdout sets, or wrong column kinds.
class BenchObjective {
 public:
  BenchObjective(const Relation& r, BenchObjectiveSpec spec);
  double operator()(const Predicate& p) const;

 private:
  const Relation& r_;
  BenchObjectiveSpec spec_;
  // row -> bucket: outliers are 0..n_outliers-1, holdouts follow, background -1.
  std::vector<int> bucket_;
  std::vector<double> full_sum_;        // per bucket, missing values skipped
  std::vector<std::size_t> group_rows_;  // per bucket
  std::size_t n_outliers_ = 0;
};

double bench_objective(const Relation& r, const Predicate& p, const BenchObjectiveSpec& spec);

}  // namespace predex
