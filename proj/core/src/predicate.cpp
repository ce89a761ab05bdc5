#include "predex/predicate.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace predex {

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw std::invalid_argument(msg); }

double require_number(const Assignment& a, const std::string& name) {
  auto it = a.find(name);
  if (it == a.end()) invalid("decode: assignment is missing parameter \"" + name + "\"");
  const double* v = std::get_if<double>(&it->second);
  if (!v) invalid("decode: parameter \"" + name + "\" must be numeric");
  return *v;
}

const std::string& require_label(const Assignment& a, const std::string& name) {
  auto it = a.find(name);
  if (it == a.end()) invalid("decode: assignment is missing parameter \"" + name + "\"");
  const std::string* v = std::get_if<std::string>(&it->second);
  if (!v) invalid("decode: parameter \"" + name + "\" must be categorical");
  return *v;
}

}  // namespace

const std::string& clause_column(const Clause& c) {
  if (const auto* n = std::get_if<NumericRange>(&c)) return n->column;
  return std::get<CategoricalEq>(c).column;
}

void validate_predicate(const Predicate& p, const Relation& r) {
  if (p.clauses.empty()) invalid("predicate: clause list is empty");
  std::set<std::string> seen;
  for (const Clause& c : p.clauses) {
    const std::string& name = clause_column(c);
    if (!seen.insert(name).second) invalid("predicate: duplicate clause for column \"" + name + "\"");
    const Column* col = r.find_column(name);
    if (!col) invalid("predicate: relation has no column \"" + name + "\"");
    if (const auto* n = std::get_if<NumericRange>(&c)) {
      if (col->kind != ColumnKind::numeric)
        invalid("predicate: range clause on non-numeric column \"" + name + "\"");
      if (!(n->lo <= n->hi)) invalid("predicate: empty range on column \"" + name + "\"");
      if (std::isnan(n->lo) || std::isnan(n->hi))
        invalid("predicate: NaN bound on column \"" + name + "\"");
    } else {
      if (col->kind != ColumnKind::categorical)
        invalid("predicate: equality clause on non-categorical column \"" + name + "\"");
      if (std::get<CategoricalEq>(c).value.empty())
        invalid("predicate: empty value in clause on column \"" + name + "\"");
    }
  }
}

void to_json(nlohmann::json& j, const Predicate& p) {
  j = nlohmann::json::object();
  auto& clauses = j["clauses"] = nlohmann::json::array();
  for (const Clause& c : p.clauses) {
    nlohmann::json jc;
    if (const auto* n = std::get_if<NumericRange>(&c)) {
      jc = {{"col", n->column}, {"lo", n->lo}, {"hi", n->hi}};
    } else {
      const auto& e = std::get<CategoricalEq>(c);
      jc = {{"col", e.column}, {"eq", e.value}};
    }
    clauses.push_back(std::move(jc));
  }
}

void from_json(const nlohmann::json& j, Predicate& p) {
  p.clauses.clear();
  for (const auto& jc : j.at("clauses")) {
    std::string col = jc.at("col").get<std::string>();
    if (jc.contains("eq")) {
      p.clauses.push_back(CategoricalEq{std::move(col), jc.at("eq").get<std::string>()});
    } else {
      p.clauses.push_back(
          NumericRange{std::move(col), jc.at("lo").get<double>(), jc.at("hi").get<double>()});
    }
  }
}

const Param* ParamSpace::find_param(const std::string& name) const {
  for (const Param& p : params)
    if (p.name == name) return &p;
  return nullptr;
}

ParamSpace build_param_space(const Relation& r, const std::vector<std::string>& variables,
                             const std::map<std::string, std::vector<std::string>>& ranked) {
  if (variables.empty()) invalid("param space: no variables given");
  ParamSpace space;
  std::set<std::string> seen_cols;
  std::set<std::string> seen_params;
  auto add_param = [&](Param p) {
    if (!seen_params.insert(p.name).second)
      invalid("param space: parameter name collision \"" + p.name + "\"");
    space.params.push_back(std::move(p));
  };
  for (const std::string& var : variables) {
    if (!seen_cols.insert(var).second) invalid("param space: duplicate variable \"" + var + "\"");
    const Column* col = r.find_column(var);
    if (!col) invalid("param space: relation has no column \"" + var + "\"");
    ColumnBinding binding;
    binding.column = var;
    binding.first_param = space.params.size();
    if (col->kind == ColumnKind::numeric) {
      auto [lo, hi] = column_range(r, var);
      binding.kind = ColumnBinding::Kind::numeric;
      binding.col_min = lo;
      binding.col_max = hi;
      add_param({var + "_min", ContinuousInterval{lo, hi}});
      add_param({var + "_length", ContinuousInterval{0.0, hi - lo}});
    } else {
      std::vector<std::string> values = unique_values(r, var);
      if (values.empty()) invalid("param space: column \"" + var + "\" has no values");
      auto rk = ranked.find(var);
      if (rk != ranked.end()) {
        // Rank lists must cover the column's value set exactly.
        std::vector<std::string> sorted = rk->second;
        std::sort(sorted.begin(), sorted.end());
        if (sorted != values)
          invalid("param space: rank order for \"" + var + "\" does not match the value set");
        binding.kind = ColumnBinding::Kind::ranked;
        binding.ranked_values = rk->second;
        add_param({var, IntegerInterval{1, static_cast<int>(rk->second.size())}});
      } else {
        binding.kind = ColumnBinding::Kind::categorical;
        binding.ranked_values = values;
        add_param({var, CategoricalDomain{values}});
      }
    }
    space.bindings.push_back(std::move(binding));
  }
  return space;
}

Predicate decode(const ParamSpace& space, const Assignment& a) {
  Predicate p;
  for (const ColumnBinding& b : space.bindings) {
    switch (b.kind) {
      case ColumnBinding::Kind::numeric: {
        const Param& pmin = space.params[b.first_param];
        const Param& plen = space.params[b.first_param + 1];
        // Out-of-domain values are tolerated here: the length clamp below is
        // the defined semantics, and validate_predicate guards the result.
        double lo = require_number(a, pmin.name);
        double len = require_number(a, plen.name);
        if (!std::isfinite(lo) || !std::isfinite(len))
          invalid("decode: non-finite value for \"" + b.column + "\"");
        double hi = std::min(lo + len, b.col_max);
        p.clauses.push_back(NumericRange{b.column, lo, hi});
        break;
      }
      case ColumnBinding::Kind::ranked: {
        const Param& pv = space.params[b.first_param];
        double v = require_number(a, pv.name);
        const auto& dom = std::get<IntegerInterval>(pv.domain);
        if (!std::isfinite(v)) invalid("decode: non-finite rank for \"" + b.column + "\"");
        long rank = std::lround(v);
        rank = std::clamp(rank, static_cast<long>(dom.lo), static_cast<long>(dom.hi));
        p.clauses.push_back(CategoricalEq{b.column, b.ranked_values[static_cast<std::size_t>(rank - 1)]});
        break;
      }
      case ColumnBinding::Kind::categorical: {
        const Param& pv = space.params[b.first_param];
        const std::string& v = require_label(a, pv.name);
        const auto& dom = std::get<CategoricalDomain>(pv.domain);
        if (!std::binary_search(dom.choices.begin(), dom.choices.end(), v))
          invalid("decode: value \"" + v + "\" is outside the domain of \"" + pv.name + "\"");
        p.clauses.push_back(CategoricalEq{b.column, v});
        break;
      }
    }
  }
  return p;
}

}  // namespace predex
