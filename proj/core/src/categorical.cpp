#include "predex/categorical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace predex {

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw std::invalid_argument(msg); }

}  // namespace

ICMap compute_ic(const Relation& r, const std::string& column, const ICObjective& obj,
                 Direction dir) {
  std::vector<std::string> values = unique_values(r, column);
  if (values.empty()) invalid("compute_ic: column \"" + column + "\" has no values");
  ICMap out;
  out.column = column;
  bool any_finite = false;
  double worst = 0.0;
  std::vector<std::pair<std::string, std::optional<double>>> raw;
  raw.reserve(values.size());
  for (const std::string& v : values) {
    Predicate p{{CategoricalEq{column, v}}};
    std::optional<double> score = obj(filter_not(r, p), p);
    if (score && !std::isfinite(*score)) score.reset();
    if (score) {
      double w = dir == Direction::low ? *score : -*score;
      worst = any_finite ? std::max(worst, w) : w;
      any_finite = true;
    }
    raw.emplace_back(v, score);
  }
  // Failures take the worst finite score plus one in the minimizing
  // direction; with no finite score at all the base is 0.
  double penalty_internal = (any_finite ? worst : 0.0) + 1.0;
  double penalty = dir == Direction::low ? penalty_internal : -penalty_internal;
  for (auto& [v, score] : raw) {
    if (score) {
      out.scores[v] = *score;
    } else {
      out.scores[v] = penalty;
      out.failed.insert(v);
    }
  }
  return out;
}

ICEncoding ic_encode(const ICMap& m) {
  if (m.scores.empty()) invalid("ic_encode: empty IC map");
  ICEncoding enc;
  enc.column = m.column;
  enc.by_rank.reserve(m.scores.size());
  for (const auto& [v, s] : m.scores) enc.by_rank.push_back(v);
  std::stable_sort(enc.by_rank.begin(), enc.by_rank.end(),
                   [&](const std::string& a, const std::string& b) {
                     double sa = m.scores.at(a), sb = m.scores.at(b);
                     if (sa != sb) return sa < sb;
                     return a < b;
                   });
  for (std::size_t i = 0; i < enc.by_rank.size(); ++i)
    enc.rank_of[enc.by_rank[i]] = static_cast<int>(i) + 1;
  return enc;
}

namespace {

struct RankedColumn {
  std::vector<std::pair<std::string, double>> entries;  // (value, adjusted score) ascending
};

// (sum, tuple) ordering used by both warm-start paths.
bool combo_less(double sum_a, const std::vector<std::string>& a, double sum_b,
                const std::vector<std::string>& b) {
  if (sum_a != sum_b) return sum_a < sum_b;
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

WarmStart enumerate_all(const std::vector<RankedColumn>& cols, std::size_t n_init) {
  std::vector<std::size_t> idx(cols.size(), 0);
  std::vector<std::pair<double, std::vector<std::string>>> combos;
  for (;;) {
    double sum = 0.0;
    std::vector<std::string> tuple;
    tuple.reserve(cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c) {
      sum += cols[c].entries[idx[c]].second;
      tuple.push_back(cols[c].entries[idx[c]].first);
    }
    combos.emplace_back(sum, std::move(tuple));
    std::size_t c = cols.size();
    while (c > 0) {
      --c;
      if (++idx[c] < cols[c].entries.size()) break;
      idx[c] = 0;
      if (c == 0) {
        c = std::numeric_limits<std::size_t>::max();
        break;
      }
    }
    if (c == std::numeric_limits<std::size_t>::max()) break;
  }
  std::sort(combos.begin(), combos.end(), [](const auto& a, const auto& b) {
    return combo_less(a.first, a.second, b.first, b.second);
  });
  WarmStart out;
  out.shortfall = combos.size() < n_init;
  std::size_t take = std::min(n_init, combos.size());
  out.combos.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.combos.push_back(std::move(combos[i].second));
  return out;
}

// Best-first expansion over the index lattice. Within a column, equal
// scores are value-sorted, so an equal-sum predecessor is always
// lexicographically smaller and pops first; the (sum, tuple) pop order is
// therefore identical to full enumeration.
WarmStart frontier(const std::vector<RankedColumn>& cols, std::size_t n_init) {
  struct Node {
    double sum;
    std::vector<std::size_t> idx;
    std::vector<std::string> tuple;
  };
  auto cmp = [](const Node& a, const Node& b) {
    return combo_less(b.sum, b.tuple, a.sum, a.tuple);  // min-heap
  };
  std::priority_queue<Node, std::vector<Node>, decltype(cmp)> heap(cmp);
  std::set<std::vector<std::size_t>> visited;
  auto push = [&](std::vector<std::size_t> idx) {
    if (!visited.insert(idx).second) return;
    Node n;
    n.sum = 0.0;
    n.tuple.reserve(cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c) {
      n.sum += cols[c].entries[idx[c]].second;
      n.tuple.push_back(cols[c].entries[idx[c]].first);
    }
    n.idx = std::move(idx);
    heap.push(std::move(n));
  };
  push(std::vector<std::size_t>(cols.size(), 0));
  WarmStart out;
  while (out.combos.size() < n_init && !heap.empty()) {
    Node n = heap.top();
    heap.pop();
    out.combos.push_back(n.tuple);
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (n.idx[c] + 1 < cols[c].entries.size()) {
        std::vector<std::size_t> next = n.idx;
        ++next[c];
        push(std::move(next));
      }
    }
  }
  out.shortfall = out.combos.size() < n_init;
  return out;
}

}  // namespace

WarmStart warm_start_combos(const std::vector<ICMap>& ics, std::size_t n_init, Direction dir,
                            std::size_t enumeration_limit) {
  if (ics.empty()) invalid("warm_start_combos: no IC maps");
  if (n_init == 0) invalid("warm_start_combos: n_init must be positive");
  std::vector<RankedColumn> cols;
  cols.reserve(ics.size());
  double product = 1.0;
  for (const ICMap& m : ics) {
    if (m.scores.empty()) invalid("warm_start_combos: empty IC map for \"" + m.column + "\"");
    RankedColumn rc;
    rc.entries.reserve(m.scores.size());
    for (const auto& [v, s] : m.scores)
      rc.entries.emplace_back(v, dir == Direction::low ? s : -s);
    std::stable_sort(rc.entries.begin(), rc.entries.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second < b.second;
      return a.first < b.first;
    });
    product *= static_cast<double>(rc.entries.size());
    cols.push_back(std::move(rc));
  }
  if (product <= static_cast<double>(enumeration_limit)) return enumerate_all(cols, n_init);
  return frontier(cols, n_init);
}

}  // namespace predex
