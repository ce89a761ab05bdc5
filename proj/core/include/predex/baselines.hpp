#pragma once

#include <vector>

#include "predex/engine.hpp"

namespace predex {

// Uniform independent draws from every dimension each iteration. Shares the
// engine's trace schema, budget rules, and penalty handling.
ExplainResult random_search(const Relation& r, const std::vector<std::string>& variables,
                            const ObjectiveSpec& spec, const EngineConfig& cfg,
                            const ProgressFn& on_trial = {});

// Single-bracket successive halving over data fractions
// {start_fraction, ..., 1.0} (doubling): the full population is scored on
// the smallest fraction, the better half survives each round, and the final
// result is the best of the last round, which runs on all rows. Evaluation
// count is population * 15/8 for the default schedule and populations
// divisible by 8. Requires population >= 8.
ExplainResult hyperband(const Relation& r, const std::vector<std::string>& variables,
                        const ObjectiveSpec& spec, const EngineConfig& cfg,
                        const ProgressFn& on_trial = {});

}  // namespace predex
