#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "predex/engine.hpp"
#include "predex/synth.hpp"

namespace predex {

// Method-comparison harness: every (method, run) cell runs the engine with
// seed base_seed + run, so runs are paired across methods.
struct ExperimentConfig {
  std::vector<Strategy> methods;
  std::size_t runs = 10;
  std::uint64_t base_seed = 1;
  std::optional<std::uint64_t> max_iters;
  std::optional<double> time_budget_s;
  double sample_interval_s = 5.0;  // best-so-far curve grid
  std::size_t jobs = 1;            // concurrent cells
  std::filesystem::path out_dir;   // empty = write nothing
  bool write_traces = true;        // per-cell trace files under out_dir
  // engine knobs shared by all methods
  std::size_t n_init = 10;
  std::size_t n_ei = 24;
  double gamma = 0.1;
  std::size_t population = 64;
  std::size_t model_window = 128;
  std::size_t restart_after = 1500;
};

struct CellResult {
  std::string method;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;  // when ok is false
  double final_value = 0.0;  // user scale
  Prf scores;                // zeros when no ground truth
  std::uint64_t iterations = 0;
  double wall_time_s = 0.0;
  std::vector<double> curve;  // best value at k * sample_interval_s, NaN before first success
};

struct MethodSummary {
  std::string method;
  std::size_t completed = 0;
  double mean_final_value = 0.0;
  Prf mean_scores;
  double mean_iterations = 0.0;
  std::vector<double> mean_curve;  // average over runs with a value at that instant
  std::vector<std::size_t> curve_runs;  // how many runs contribute per instant
};

struct ExperimentReport {
  std::vector<CellResult> cells;
  std::vector<MethodSummary> methods;
  std::vector<double> curve_times;
};

void to_json(nlohmann::json& j, const ExperimentReport& rep);

// Runs methods x runs cells (in parallel when jobs > 1), aggregates final
// values, P/R/F against `truth` when given, and best-so-far curves sampled
// every sample_interval_s. With out_dir set, writes report.json, curves.csv,
// and (when write_traces) trace_<method>_<run>.jsonl per cell. A failing
// cell is recorded and does not abort the experiment.
ExperimentReport run_experiment(const Relation& r, const std::vector<std::string>& variables,
                                const ObjectiveSpec& spec, const GroundTruth* truth,
                                const ExperimentConfig& cfg);

}  // namespace predex
