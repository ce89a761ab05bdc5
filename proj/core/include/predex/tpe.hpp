#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "predex/predicate.hpp"
#include "predex/rng.hpp"
#include "predex/types.hpp"

namespace predex {

// One completed evaluation on the internal minimizing scale. Failed
// evaluations enter history with their penalty value applied.
struct Trial {
  Assignment assignment;
  double value = 0.0;
  long iteration = 0;
};

struct History {
  std::vector<Trial> trials;
};

struct ParzenComponent {
  double mean = 0.0;
  double stddev = 1.0;
};

// Equal-weight Gaussian mixture over a closed support interval.
struct ParzenMixture {
  std::vector<ParzenComponent> components;
  ContinuousInterval support;
};

// Add-one smoothed categorical distribution over a fixed choice set.
struct SmoothedCategorical {
  std::vector<std::string> choices;  // sorted, distinct
  std::vector<double> probs;         // sums to 1
};

// Good = the max(1, floor(gamma * n)) lowest-value trials, ties broken by
// earlier iteration; bad = the rest. Both halves are ordered by
// (value, iteration). Throws std::invalid_argument on empty history or
// gamma outside (0, 1).
std::pair<std::vector<Trial>, std::vector<Trial>> split_history(const History& h, double gamma);

// One component per observed value. Bandwidth = max distance to the sorted
// neighbors (single neighbor at the ends, support width for a singleton),
// clamped below by 1e-3 * width. Values must lie within the support; a
// zero-width support is only valid when all values are equal.
ParzenMixture fit_parzen(std::vector<double> values, ContinuousInterval support);

// P(c) = (count(c) + 1) / (|observed| + |choices|). Observed values must be
// drawn from `choices`; an empty observation list yields the uniform
// distribution.
SmoothedCategorical fit_categorical(const std::vector<std::string>& observed,
                                    const std::vector<std::string>& choices);

// Mixture density at x (floored at 1e-300). Throws when x is outside the
// support / choice set.
double density(const ParzenMixture& m, double x);
double density(const SmoothedCategorical& m, const std::string& c);

// Component picked uniformly, then a Gaussian draw, re-drawn up to 16 times
// while outside the support and clipped afterwards.
double sample(const ParzenMixture& m, Rng& rng);
std::vector<double> sample(const ParzenMixture& m, Rng& rng, std::size_t n);
std::string sample(const SmoothedCategorical& m, Rng& rng);

// Expected-improvement surrogate (gamma + (b/g) * (1 - gamma))^-1; both
// densities are floored at 1e-300, so a vanishing bad density tends to
// 1/gamma. Monotone in g/b.
double ei_score(double good_density, double bad_density, double gamma);

// One candidate assignment: per dimension, fit good/bad models, draw n_ei
// candidates from the good model and keep the density-ratio argmax (first
// winner on ties). An empty bad set uses the uniform density. Integer
// dimensions are rounded into range. History must be non-empty and cover
// every dimension.
Assignment suggest(const History& h, const ParamSpace& space, double gamma, std::size_t n_ei,
                   Rng& rng);

}  // namespace predex
