#pragma once

#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "predex/predicate.hpp"
#include "predex/query.hpp"
#include "predex/relation.hpp"
#include "predex/types.hpp"

namespace predex {

struct ExternalObjective {
  std::string command;
  double timeout_s = 300.0;
};

// What to optimize and which way. The engine always minimizes internally
// and negates user values when direction is high.
struct ObjectiveSpec {
  Direction direction = Direction::low;
  std::variant<QueryExpr, BenchObjectiveSpec, ExternalObjective> kind;
};

enum class Strategy { tpe_ic_ws, tpe_ws_only, tpe_plain, random_search, hyperband };

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

struct EngineConfig {
  Strategy strategy = Strategy::tpe_ic_ws;
  std::size_t n_init = 10;
  std::size_t n_ei = 24;
  double gamma = 0.1;
  std::optional<std::uint64_t> max_iters;  // counts every evaluation, IC included
  std::optional<double> time_budget_s;     // wall clock; stops within one evaluation
  std::uint64_t seed = 0;
  // hyperband
  std::size_t population = 64;
  double start_fraction = 0.125;
  // TPE model-history cap. Traces and best tracking always see every trial;
  // only the Parzen fit input is bounded, so per-proposal cost stays flat on
  // long time-budgeted runs. The global top-ceil(gamma * window) trials are
  // never evicted; eviction drops the oldest of the rest.
  std::size_t model_window = 128;
  // Stall threshold for TPE model restarts: after this many consecutive TPE
  // trials without an epoch-best improvement, the model history resets to
  // the init trials plus one incumbent per earlier epoch, which widens the
  // next suggestions. 0 disables. Best tracking and traces never reset.
  std::size_t restart_after = 1500;
  // Retain per-trial rows in ExplainResult. Long time-budgeted runs with a
  // cheap objective can produce 10^5+ rows; observers still see every row
  // when this is off.
  bool keep_trace = true;
};

// Throws std::invalid_argument when no budget is set or a knob is out of
// range.
void validate_config(const EngineConfig& cfg);

struct TraceRow {
  long iteration = 0;     // 0-based, global within the run
  std::string phase;      // ic | init | tpe | random | hyperband
  Predicate predicate;
  Assignment assignment;  // empty for IC probes
  double value = 0.0;     // user scale, NaN when failed
  double internal = 0.0;  // minimizing scale, penalty applied when failed
  bool failed = false;
  double data_fraction = 1.0;  // hyperband subsample fraction
  double wall_s = 0.0;
  double best = 0.0;  // running best on the user scale, NaN before a success
};

void to_json(nlohmann::json& j, const TraceRow& t);

struct ExplainResult {
  Predicate best_predicate;
  double best_value = 0.0;  // user scale
  std::vector<TraceRow> trials;  // empty when keep_trace is off
  // (wall seconds, best user value) per completed trial once a success
  // exists; monotone in the optimization direction.
  std::vector<std::pair<double, double>> best_so_far;
  std::uint64_t iterations = 0;  // completed evaluations, IC included
  double wall_time_s = 0.0;
};

using ProgressFn = std::function<void(const TraceRow&)>;

// Thread-safe collector usable as a progress observer.
class ProgressStream {
 public:
  void push(const TraceRow& row);
  std::size_t size() const;
  std::vector<TraceRow> snapshot() const;
  ProgressFn callback();

 private:
  mutable std::mutex mu_;
  std::vector<TraceRow> rows_;
};

// One objective evaluation: filters sigma_{not p}(r) and dispatches on the
// spec kind. nullopt = failure. External objectives spawn a child for the
// single call.
std::optional<double> evaluate(const ObjectiveSpec& spec, const Relation& r, const Predicate& p);

// Full optimization run over the given columns. IC probes (for IC encoding
// and warm starts), warm-start evaluations, and TPE iterations all draw from
// the same budget and appear in the trace in order. Throws NoResultError
// when no evaluation succeeds within the budget.
ExplainResult explain(const Relation& r, const std::vector<std::string>& variables,
                      const ObjectiveSpec& spec, const EngineConfig& cfg,
                      const ProgressFn& on_trial = {});

}  // namespace predex
