#include "predex/query.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "predex/types.hpp"

namespace predex {

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw std::invalid_argument(msg); }

const char* op_name(CmpOp op) {
  switch (op) {
    case CmpOp::eq: return "eq";
    case CmpOp::ne: return "ne";
    case CmpOp::lt: return "lt";
    case CmpOp::le: return "le";
    case CmpOp::gt: return "gt";
    case CmpOp::ge: return "ge";
  }
  return "eq";
}

bool op_from_name(const std::string& s, CmpOp& op) {
  static const std::map<std::string, CmpOp> ops = {{"eq", CmpOp::eq}, {"ne", CmpOp::ne},
                                                   {"lt", CmpOp::lt}, {"le", CmpOp::le},
                                                   {"gt", CmpOp::gt}, {"ge", CmpOp::ge}};
  auto it = ops.find(s);
  if (it == ops.end()) return false;
  op = it->second;
  return true;
}

// Condition with column pointers resolved; built once per evaluation.
struct CompiledCond {
  Condition::Type type = Condition::Type::cmp;
  const Column* col = nullptr;
  CmpOp op = CmpOp::eq;
  double num = 0.0;
  std::string str;
  std::vector<CompiledCond> children;
};

CompiledCond compile_cond(const Condition& c, const Relation& r) {
  CompiledCond out;
  out.type = c.type;
  if (c.type != Condition::Type::cmp) {
    if (c.children.empty()) invalid("condition: empty and/or");
    for (const Condition& child : c.children) out.children.push_back(compile_cond(child, r));
    return out;
  }
  out.col = &r.column(c.column);
  out.op = c.op;
  if (out.col->kind == ColumnKind::numeric) {
    const double* v = std::get_if<double>(&c.operand);
    if (!v) invalid("condition: numeric column \"" + c.column + "\" compared to a string");
    out.num = *v;
  } else {
    const std::string* v = std::get_if<std::string>(&c.operand);
    if (!v) invalid("condition: categorical column \"" + c.column + "\" compared to a number");
    if (c.op != CmpOp::eq && c.op != CmpOp::ne)
      invalid("condition: categorical column \"" + c.column + "\" supports eq/ne only");
    out.str = *v;
  }
  return out;
}

// SQL-style: any comparison with a missing cell is false, including ne.
bool eval_row(const CompiledCond& c, std::size_t i) {
  switch (c.type) {
    case Condition::Type::conj:
      return std::all_of(c.children.begin(), c.children.end(),
                         [i](const CompiledCond& ch) { return eval_row(ch, i); });
    case Condition::Type::disj:
      return std::any_of(c.children.begin(), c.children.end(),
                         [i](const CompiledCond& ch) { return eval_row(ch, i); });
    case Condition::Type::cmp:
      break;
  }
  if (c.col->kind == ColumnKind::numeric) {
    double v = c.col->nums[i];
    if (missing_numeric(v)) return false;
    switch (c.op) {
      case CmpOp::eq: return v == c.num;
      case CmpOp::ne: return v != c.num;
      case CmpOp::lt: return v < c.num;
      case CmpOp::le: return v <= c.num;
      case CmpOp::gt: return v > c.num;
      case CmpOp::ge: return v >= c.num;
    }
    return false;
  }
  const std::string& v = c.col->cats[i];
  if (missing_categorical(v)) return false;
  return c.op == CmpOp::eq ? v == c.str : v != c.str;
}

}  // namespace

double eval_agg(const Relation& r, const AggQuery& q) {
  std::optional<CompiledCond> where;
  if (q.where) where = compile_cond(*q.where, r);
  const Column* target = nullptr;
  if (q.agg != AggKind::count) {
    if (!q.target) invalid("agg: sum/avg need a target column");
    target = &r.column(*q.target);
    if (target->kind != ColumnKind::numeric)
      invalid("agg: target column \"" + *q.target + "\" is not numeric");
  }
  std::size_t matched = 0;
  double sum = 0.0;
  std::size_t present = 0;
  for (std::size_t i = 0; i < r.row_count(); ++i) {
    if (where && !eval_row(*where, i)) continue;
    ++matched;
    if (target && !missing_numeric(target->nums[i])) {
      sum += target->nums[i];
      ++present;
    }
  }
  switch (q.agg) {
    case AggKind::count:
      return static_cast<double>(matched);
    case AggKind::sum:
      return sum;  // empty sum is 0
    case AggKind::avg:
      if (present == 0) throw EvaluationFailure("avg over an empty set");
      return sum / static_cast<double>(present);
  }
  return 0.0;
}

double eval_expr(const Relation& r, const QueryExpr& e) {
  double v = 0.0;
  switch (e.node) {
    case QueryExpr::Node::agg:
      v = eval_agg(r, e.agg);
      break;
    case QueryExpr::Node::constant:
      v = e.constant;
      break;
    default: {
      if (e.kids.size() != 2) invalid("expr: binary node without two children");
      double a = eval_expr(r, e.kids[0]);
      double b = eval_expr(r, e.kids[1]);
      switch (e.node) {
        case QueryExpr::Node::add: v = a + b; break;
        case QueryExpr::Node::sub: v = a - b; break;
        case QueryExpr::Node::mul: v = a * b; break;
        case QueryExpr::Node::divide:
          if (b == 0.0) throw EvaluationFailure("division by zero");
          v = a / b;
          break;
        default: break;
      }
      break;
    }
  }
  if (!std::isfinite(v)) throw EvaluationFailure("non-finite objective value");
  return v;
}

namespace {

void validate_cond(const Condition& c, const Relation& r) { (void)compile_cond(c, r); }

std::size_t count_agg_leaves(const QueryExpr& e, const Relation& r) {
  switch (e.node) {
    case QueryExpr::Node::agg: {
      if (e.agg.agg != AggKind::count) {
        if (!e.agg.target) invalid("expr: sum/avg need a target column");
        if (r.column(*e.agg.target).kind != ColumnKind::numeric)
          invalid("expr: target column \"" + *e.agg.target + "\" is not numeric");
      }
      if (e.agg.where) validate_cond(*e.agg.where, r);
      return 1;
    }
    case QueryExpr::Node::constant:
      return 0;
    default: {
      if (e.kids.size() != 2) invalid("expr: binary node without two children");
      return count_agg_leaves(e.kids[0], r) + count_agg_leaves(e.kids[1], r);
    }
  }
}

}  // namespace

void validate_expr(const QueryExpr& e, const Relation& r) {
  if (count_agg_leaves(e, r) == 0) invalid("expr: no aggregate leaf");
}

void to_json(nlohmann::json& j, const Condition& c) {
  switch (c.type) {
    case Condition::Type::conj:
    case Condition::Type::disj: {
      nlohmann::json arr = nlohmann::json::array();
      for (const Condition& ch : c.children) {
        nlohmann::json jc;
        to_json(jc, ch);
        arr.push_back(std::move(jc));
      }
      j = nlohmann::json{{c.type == Condition::Type::conj ? "and" : "or", std::move(arr)}};
      return;
    }
    case Condition::Type::cmp:
      break;
  }
  j = nlohmann::json{{"col", c.column}};
  if (const double* v = std::get_if<double>(&c.operand))
    j[op_name(c.op)] = *v;
  else
    j[op_name(c.op)] = std::get<std::string>(c.operand);
}

void from_json(const nlohmann::json& j, Condition& c) {
  if (j.contains("and") || j.contains("or")) {
    c.type = j.contains("and") ? Condition::Type::conj : Condition::Type::disj;
    c.children.clear();
    for (const auto& jc : j.at(j.contains("and") ? "and" : "or"))
      c.children.push_back(jc.get<Condition>());
    return;
  }
  c.type = Condition::Type::cmp;
  c.column = j.at("col").get<std::string>();
  const nlohmann::json* value = nullptr;
  if (j.contains("op")) {
    if (!op_from_name(j.at("op").get<std::string>(), c.op))
      invalid("condition: unknown op \"" + j.at("op").get<std::string>() + "\"");
    value = &j.at("value");
  } else {
    for (const char* name : {"eq", "ne", "lt", "le", "gt", "ge"}) {
      if (j.contains(name)) {
        op_from_name(name, c.op);
        value = &j.at(name);
        break;
      }
    }
    if (!value) invalid("condition: no comparison key in " + j.dump());
  }
  if (value->is_string())
    c.operand = value->get<std::string>();
  else if (value->is_number())
    c.operand = value->get<double>();
  else
    invalid("condition: comparison value must be a number or string");
}

namespace {

const char* agg_name(AggKind k) {
  switch (k) {
    case AggKind::count: return "count";
    case AggKind::sum: return "sum";
    case AggKind::avg: return "avg";
  }
  return "count";
}

AggKind agg_from_name(const std::string& s) {
  if (s == "count") return AggKind::count;
  if (s == "sum") return AggKind::sum;
  if (s == "avg") return AggKind::avg;
  invalid("expr: unknown aggregate \"" + s + "\"");
}

}  // namespace

void to_json(nlohmann::json& j, const QueryExpr& e) {
  switch (e.node) {
    case QueryExpr::Node::agg: {
      j = nlohmann::json{{"agg", agg_name(e.agg.agg)}};
      if (e.agg.target) j["target"] = *e.agg.target;
      if (e.agg.where) {
        nlohmann::json jw;
        to_json(jw, *e.agg.where);
        j["where"] = std::move(jw);
      }
      return;
    }
    case QueryExpr::Node::constant:
      j = nlohmann::json{{"const", e.constant}};
      return;
    default: {
      const char* name = e.node == QueryExpr::Node::add   ? "add"
                         : e.node == QueryExpr::Node::sub ? "sub"
                         : e.node == QueryExpr::Node::mul ? "mul"
                                                          : "div";
      nlohmann::json lhs, rhs;
      to_json(lhs, e.kids[0]);
      to_json(rhs, e.kids[1]);
      j = nlohmann::json{{"op", name}, {"lhs", std::move(lhs)}, {"rhs", std::move(rhs)}};
      return;
    }
  }
}

void from_json(const nlohmann::json& j, QueryExpr& e) {
  if (j.contains("agg")) {
    e.node = QueryExpr::Node::agg;
    e.agg.agg = agg_from_name(j.at("agg").get<std::string>());
    if (j.contains("target")) e.agg.target = j.at("target").get<std::string>();
    if (j.contains("where")) e.agg.where = j.at("where").get<Condition>();
    return;
  }
  if (j.contains("const")) {
    e.node = QueryExpr::Node::constant;
    e.constant = j.at("const").get<double>();
    return;
  }
  if (!j.contains("op")) invalid("expr: node needs \"agg\", \"const\", or \"op\"");
  std::string op = j.at("op").get<std::string>();
  e.node = op == "add"   ? QueryExpr::Node::add
           : op == "sub" ? QueryExpr::Node::sub
           : op == "mul" ? QueryExpr::Node::mul
           : op == "div" ? QueryExpr::Node::divide
                         : throw std::invalid_argument("expr: unknown op \"" + op + "\"");
  e.kids.clear();
  e.kids.push_back(j.at("lhs").get<QueryExpr>());
  e.kids.push_back(j.at("rhs").get<QueryExpr>());
}

void to_json(nlohmann::json& j, const BenchObjectiveSpec& s) {
  j = nlohmann::json{{"group_col", s.group_col}, {"value_col", s.value_col},
                     {"outliers", s.outliers},   {"holdouts", s.holdouts},
                     {"penalty_c", s.penalty_c}, {"lambda", s.lambda}};
}

void from_json(const nlohmann::json& j, BenchObjectiveSpec& s) {
  s.group_col = j.at("group_col").get<std::string>();
  s.value_col = j.at("value_col").get<std::string>();
  s.outliers = j.at("outliers").get<std::vector<std::string>>();
  s.holdouts = j.value("holdouts", std::vector<std::string>{});
  s.penalty_c = j.value("penalty_c", 0.2);
  s.lambda = j.value("lambda", 1.0);
}

BenchObjective::BenchObjective(const Relation& r, BenchObjectiveSpec spec)
    : r_(r), spec_(std::move(spec)) {
  const Column& group = r_.column(spec_.group_col);
  if (group.kind != ColumnKind::categorical)
    invalid("bench: group column \"" + spec_.group_col + "\" is not categorical");
  const Column& value = r_.column(spec_.value_col);
  if (value.kind != ColumnKind::numeric)
    invalid("bench: value column \"" + spec_.value_col + "\" is not numeric");
  if (spec_.outliers.empty()) invalid("bench: no outlier groups");
  n_outliers_ = spec_.outliers.size();
  std::map<std::string, int> bucket_of;
  int next = 0;
  for (const std::string& g : spec_.outliers) {
    if (g.empty()) invalid("bench: empty group id");
    if (!bucket_of.emplace(g, next).second) invalid("bench: duplicate group \"" + g + "\"");
    ++next;
  }
  for (const std::string& g : spec_.holdouts) {
    if (g.empty()) invalid("bench: empty group id");
    if (!bucket_of.emplace(g, next).second)
      invalid("bench: group \"" + g + "\" listed twice (outlier/holdout overlap?)");
    ++next;
  }
  full_sum_.assign(static_cast<std::size_t>(next), 0.0);
  group_rows_.assign(static_cast<std::size_t>(next), 0);
  bucket_.assign(r_.row_count(), -1);
  for (std::size_t i = 0; i < r_.row_count(); ++i) {
    auto it = bucket_of.find(group.cats[i]);
    if (it == bucket_of.end()) continue;
    bucket_[i] = it->second;
    ++group_rows_[static_cast<std::size_t>(it->second)];
    if (!missing_numeric(value.nums[i])) full_sum_[static_cast<std::size_t>(it->second)] += value.nums[i];
  }
  for (const auto& [g, b] : bucket_of)
    if (group_rows_[static_cast<std::size_t>(b)] == 0) invalid("bench: group \"" + g + "\" is empty");
}

double BenchObjective::operator()(const Predicate& p) const {
  auto mask = satisfies_mask(r_, p);
  const Column& value = r_.column(spec_.value_col);
  std::vector<double> removed_sum(full_sum_.size(), 0.0);
  std::vector<std::size_t> removed_rows(full_sum_.size(), 0);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i] || bucket_[i] < 0) continue;
    auto b = static_cast<std::size_t>(bucket_[i]);
    ++removed_rows[b];
    if (!missing_numeric(value.nums[i])) removed_sum[b] += value.nums[i];
  }
  double outlier_term = 0.0;
  for (std::size_t b = 0; b < n_outliers_; ++b) {
    double n = static_cast<double>(group_rows_[b]);
    double frac = static_cast<double>(removed_rows[b]) / n;
    double eps = 1.0 / n;
    outlier_term += removed_sum[b] / std::pow(std::max(frac, eps), spec_.penalty_c);
  }
  outlier_term /= static_cast<double>(n_outliers_);
  double holdout_term = 0.0;
  std::size_t n_holdouts = full_sum_.size() - n_outliers_;
  for (std::size_t b = n_outliers_; b < full_sum_.size(); ++b)
    holdout_term += std::abs(removed_sum[b]);
  if (n_holdouts > 0) holdout_term /= static_cast<double>(n_holdouts);
  return outlier_term - spec_.lambda * holdout_term;
}

double bench_objective(const Relation& r, const Predicate& p, const BenchObjectiveSpec& spec) {
  return BenchObjective(r, spec)(p);
}

}  // namespace predex
