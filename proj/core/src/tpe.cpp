#include "predex/tpe.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace predex {

namespace {

constexpr double kDensityFloor = 1e-300;
constexpr double kBandwidthFraction = 1e-3;
// Absolute guard for zero-width supports (all observations equal a constant
// column value); any positive bandwidth works there since every candidate
// collapses to the same point.
constexpr double kBandwidthTiny = 1e-12;
constexpr int kRedraws = 16;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

[[noreturn]] void invalid(const std::string& msg) { throw std::invalid_argument(msg); }

double gaussian_pdf(double x, double mean, double stddev) {
  double z = (x - mean) / stddev;
  return kInvSqrt2Pi / stddev * std::exp(-0.5 * z * z);
}

}  // namespace

std::pair<std::vector<Trial>, std::vector<Trial>> split_history(const History& h, double gamma) {
  if (h.trials.empty()) invalid("split_history: empty history");
  if (!(gamma > 0.0 && gamma < 1.0)) invalid("split_history: gamma must be in (0, 1)");
  std::vector<const Trial*> order;
  order.reserve(h.trials.size());
  for (const Trial& t : h.trials) order.push_back(&t);
  std::stable_sort(order.begin(), order.end(), [](const Trial* a, const Trial* b) {
    if (a->value != b->value) return a->value < b->value;
    return a->iteration < b->iteration;
  });
  std::size_t n_good = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(gamma * static_cast<double>(h.trials.size()))));
  std::vector<Trial> good, bad;
  good.reserve(n_good);
  bad.reserve(order.size() - n_good);
  for (std::size_t i = 0; i < order.size(); ++i)
    (i < n_good ? good : bad).push_back(*order[i]);
  return {std::move(good), std::move(bad)};
}

ParzenMixture fit_parzen(std::vector<double> values, ContinuousInterval support) {
  if (values.empty()) invalid("fit_parzen: no values");
  if (!(support.lo <= support.hi)) invalid("fit_parzen: inverted support");
  double width = support.hi - support.lo;
  for (double v : values) {
    if (!(v >= support.lo && v <= support.hi))
      invalid("fit_parzen: value outside support");
  }
  if (width == 0.0) {
    bool all_equal = std::all_of(values.begin(), values.end(),
                                 [&](double v) { return v == values.front(); });
    if (!all_equal) invalid("fit_parzen: zero-width support with distinct values");
  }
  std::sort(values.begin(), values.end());
  ParzenMixture m;
  m.support = support;
  m.components.reserve(values.size());
  double floor_bw = std::max(kBandwidthFraction * width, kBandwidthTiny);
  for (std::size_t i = 0; i < values.size(); ++i) {
    double bw;
    if (values.size() == 1) {
      bw = width;  // singleton spreads over the whole support
    } else if (i == 0) {
      bw = values[1] - values[0];
    } else if (i + 1 == values.size()) {
      bw = values[i] - values[i - 1];
    } else {
      bw = std::max(values[i] - values[i - 1], values[i + 1] - values[i]);
    }
    m.components.push_back({values[i], std::max(bw, floor_bw)});
  }
  return m;
}

SmoothedCategorical fit_categorical(const std::vector<std::string>& observed,
                                    const std::vector<std::string>& choices) {
  if (choices.empty()) invalid("fit_categorical: empty choice set");
  if (!std::is_sorted(choices.begin(), choices.end()) ||
      std::adjacent_find(choices.begin(), choices.end()) != choices.end())
    invalid("fit_categorical: choices must be sorted and distinct");
  SmoothedCategorical m;
  m.choices = choices;
  m.probs.assign(choices.size(), 0.0);
  for (const std::string& v : observed) {
    auto it = std::lower_bound(choices.begin(), choices.end(), v);
    if (it == choices.end() || *it != v)
      invalid("fit_categorical: observation \"" + v + "\" not in the choice set");
    m.probs[static_cast<std::size_t>(it - choices.begin())] += 1.0;
  }
  double denom = static_cast<double>(observed.size() + choices.size());
  for (double& p : m.probs) p = (p + 1.0) / denom;
  return m;
}

double density(const ParzenMixture& m, double x) {
  if (m.components.empty()) invalid("density: empty mixture");
  if (!(x >= m.support.lo && x <= m.support.hi)) invalid("density: x outside support");
  double sum = 0.0;
  for (const ParzenComponent& c : m.components) sum += gaussian_pdf(x, c.mean, c.stddev);
  return std::max(sum / static_cast<double>(m.components.size()), kDensityFloor);
}

double density(const SmoothedCategorical& m, const std::string& c) {
  auto it = std::lower_bound(m.choices.begin(), m.choices.end(), c);
  if (it == m.choices.end() || *it != c) invalid("density: \"" + c + "\" not in the choice set");
  return std::max(m.probs[static_cast<std::size_t>(it - m.choices.begin())], kDensityFloor);
}

double sample(const ParzenMixture& m, Rng& rng) {
  if (m.components.empty()) invalid("sample: empty mixture");
  const ParzenComponent& c = m.components[uniform_index(rng, m.components.size())];
  double v = 0.0;
  for (int attempt = 0; attempt <= kRedraws; ++attempt) {
    v = draw_normal(rng, c.mean, c.stddev);
    if (v >= m.support.lo && v <= m.support.hi) return v;
  }
  return std::clamp(v, m.support.lo, m.support.hi);
}

std::vector<double> sample(const ParzenMixture& m, Rng& rng, std::size_t n) {
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample(m, rng));
  return out;
}

std::string sample(const SmoothedCategorical& m, Rng& rng) {
  double u = uniform01(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < m.probs.size(); ++i) {
    acc += m.probs[i];
    if (u < acc) return m.choices[i];
  }
  return m.choices.back();  // u landed in rounding slack
}

double ei_score(double good_density, double bad_density, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) invalid("ei_score: gamma must be in (0, 1)");
  double g = std::max(good_density, kDensityFloor);
  double b = std::max(bad_density, kDensityFloor);
  return 1.0 / (gamma + (b / g) * (1.0 - gamma));
}

namespace {

double interval_param_suggest(const std::vector<Trial>& good, const std::vector<Trial>& bad,
                              const std::string& name, ContinuousInterval support, double gamma,
                              std::size_t n_ei, Rng& rng) {
  (void)gamma;
  auto collect = [&](const std::vector<Trial>& side) {
    std::vector<double> vals;
    vals.reserve(side.size());
    for (const Trial& t : side) {
      auto it = t.assignment.find(name);
      if (it == t.assignment.end()) invalid("suggest: history misses parameter \"" + name + "\"");
      const double* v = std::get_if<double>(&it->second);
      if (!v) invalid("suggest: parameter \"" + name + "\" is not numeric in history");
      vals.push_back(*v);
    }
    return vals;
  };
  ParzenMixture g = fit_parzen(collect(good), support);
  double width = support.hi - support.lo;
  bool bad_empty = bad.empty();
  ParzenMixture b;
  if (!bad_empty) b = fit_parzen(collect(bad), support);
  double uniform_density = width > 0.0 ? 1.0 / width : 1.0;
  double best_x = 0.0;
  double best_score = -1.0;
  for (std::size_t i = 0; i < n_ei; ++i) {
    double x = sample(g, rng);
    double gd = density(g, x);
    double bd = bad_empty ? uniform_density : density(b, x);
    double score = gd / std::max(bd, kDensityFloor);
    if (score > best_score) {
      best_score = score;
      best_x = x;
    }
  }
  return best_x;
}

std::string categorical_param_suggest(const std::vector<Trial>& good,
                                      const std::vector<Trial>& bad, const std::string& name,
                                      const std::vector<std::string>& choices, std::size_t n_ei,
                                      Rng& rng) {
  auto collect = [&](const std::vector<Trial>& side) {
    std::vector<std::string> vals;
    vals.reserve(side.size());
    for (const Trial& t : side) {
      auto it = t.assignment.find(name);
      if (it == t.assignment.end()) invalid("suggest: history misses parameter \"" + name + "\"");
      const std::string* v = std::get_if<std::string>(&it->second);
      if (!v) invalid("suggest: parameter \"" + name + "\" is not categorical in history");
      vals.push_back(*v);
    }
    return vals;
  };
  SmoothedCategorical g = fit_categorical(collect(good), choices);
  // Add-one smoothing over an empty observation list is exactly uniform, so
  // the empty-bad case needs no special path.
  SmoothedCategorical b = fit_categorical(collect(bad), choices);
  std::string best_c;
  double best_score = -1.0;
  for (std::size_t i = 0; i < n_ei; ++i) {
    std::string c = sample(g, rng);
    double score = density(g, c) / density(b, c);
    if (score > best_score) {
      best_score = score;
      best_c = std::move(c);
    }
  }
  return best_c;
}

}  // namespace

Assignment suggest(const History& h, const ParamSpace& space, double gamma, std::size_t n_ei,
                   Rng& rng) {
  if (n_ei == 0) invalid("suggest: n_ei must be positive");
  auto [good, bad] = split_history(h, gamma);
  Assignment out;
  for (const Param& p : space.params) {
    if (const auto* ci = std::get_if<ContinuousInterval>(&p.domain)) {
      out[p.name] = interval_param_suggest(good, bad, p.name, *ci, gamma, n_ei, rng);
    } else if (const auto* ii = std::get_if<IntegerInterval>(&p.domain)) {
      double x = interval_param_suggest(
          good, bad, p.name,
          ContinuousInterval{static_cast<double>(ii->lo), static_cast<double>(ii->hi)}, gamma,
          n_ei, rng);
      long v = std::clamp(std::lround(x), static_cast<long>(ii->lo), static_cast<long>(ii->hi));
      out[p.name] = static_cast<double>(v);
    } else {
      const auto& dom = std::get<CategoricalDomain>(p.domain);
      out[p.name] = categorical_param_suggest(good, bad, p.name, dom.choices, n_ei, rng);
    }
  }
  return out;
}

}  // namespace predex
