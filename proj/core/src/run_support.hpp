#pragma once

// Internal run machinery shared by the engine and the baselines: objective
// binding, budget/trace bookkeeping, uniform assignment draws.

#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "predex/engine.hpp"
#include "predex/external.hpp"
#include "predex/predicate.hpp"
#include "predex/query.hpp"
#include "predex/relation.hpp"
#include "predex/rng.hpp"
#include "predex/types.hpp"

namespace predex::detail {

// Raised by instrumented evaluators when the budget runs out mid-phase.
struct BudgetExhausted {};

// A failure with no prior successful value to anchor "worst + 1".
constexpr double kPenaltyBase = 1e18;

inline double internal_scale(Direction dir, double user) {
  return dir == Direction::low ? user : -user;
}

inline double user_scale(Direction dir, double internal) {
  return dir == Direction::low ? internal : -internal;
}

// User-scale objective evaluation against a fixed relation. The external
// child process outlives this object (one per run), so hyperband can rebind
// per subsample round.
class BoundObjective {
 public:
  BoundObjective(const ObjectiveSpec& spec, const Relation& data, ExternalProcess* proc)
      : spec_(spec), data_(data), proc_(proc) {
    if (const auto* bench = std::get_if<BenchObjectiveSpec>(&spec_.kind)) bench_.emplace(data_, *bench);
  }

  // nullopt = evaluation failure.
  std::optional<double> eval_pred(const Predicate& p) {
    if (bench_) {
      double v = (*bench_)(p);
      if (!std::isfinite(v)) return std::nullopt;
      return v;
    }
    return eval_filtered(filter_not(data_, p), p);
  }

  // Variant for callers that already hold sigma_{not p}(data); the bench
  // kind scores p against the cached full-data sums instead.
  std::optional<double> eval_filtered(const Relation& filtered, const Predicate& p) {
    if (bench_) return eval_pred(p);
    if (const auto* expr = std::get_if<QueryExpr>(&spec_.kind)) {
      try {
        return eval_expr(filtered, *expr);
      } catch (const EvaluationFailure&) {
        return std::nullopt;
      }
    }
    return eval_external(filtered);
  }

  const Relation& data() const { return data_; }

 private:
  std::optional<double> eval_external(const Relation& filtered) {
    if (!proc_) return std::nullopt;
    static std::atomic<std::uint64_t> counter{0};
    auto path = std::filesystem::temp_directory_path() /
                ("predex-" + std::to_string(::getpid()) + "-" +
                 std::to_string(counter.fetch_add(1)) + ".csv");
    write_csv(filtered, path);
    std::optional<double> v = proc_->request(path.string(), filtered.row_count());
    std::error_code ec;
    std::filesystem::remove(path, ec);
    if (v && !std::isfinite(*v)) return std::nullopt;
    return v;
  }

  const ObjectiveSpec& spec_;
  const Relation& data_;
  ExternalProcess* proc_;
  std::optional<BenchObjective> bench_;
};

inline std::unique_ptr<ExternalProcess> spawn_if_external(const ObjectiveSpec& spec) {
  if (const auto* ext = std::get_if<ExternalObjective>(&spec.kind))
    return std::make_unique<ExternalProcess>(ext->command, ext->timeout_s);
  return nullptr;
}

struct RunState {
  RunState(const EngineConfig& cfg, Direction dir, const ProgressFn& observer)
      : dir_(dir), cfg_(cfg), observer_(observer), start_(std::chrono::steady_clock::now()) {}

  double elapsed_s() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  bool budget_left() const {
    if (cfg_.max_iters && evals_ >= *cfg_.max_iters) return false;
    if (cfg_.time_budget_s && elapsed_s() >= *cfg_.time_budget_s) return false;
    return true;
  }

  // Applies the penalty rule, updates the running best, and emits the trace
  // row. Returns the internal (minimizing) value for model history.
  double record(const char* phase, const Predicate& p, Assignment assignment,
                std::optional<double> user, double data_fraction = 1.0) {
    bool failed = !user.has_value();
    double internal;
    if (failed) {
      internal = have_success_ ? worst_success_ + 1.0 : kPenaltyBase;
    } else {
      internal = internal_scale(dir_, *user);
      worst_success_ = have_success_ ? std::max(worst_success_, internal) : internal;
      have_success_ = true;
      if (!have_best_ || internal < best_internal_) {
        have_best_ = true;
        best_internal_ = internal;
        best_user_ = *user;
        best_predicate_ = p;
      }
    }
    double wall = elapsed_s();
    if (have_best_) best_so_far_.emplace_back(wall, best_user_);
    if (keep_trace() || observer_) {
      TraceRow row;
      row.iteration = static_cast<long>(evals_);
      row.phase = phase;
      row.predicate = p;
      row.assignment = std::move(assignment);
      row.value = failed ? std::numeric_limits<double>::quiet_NaN() : *user;
      row.internal = internal;
      row.failed = failed;
      row.data_fraction = data_fraction;
      row.wall_s = wall;
      row.best = have_best_ ? best_user_ : std::numeric_limits<double>::quiet_NaN();
      if (observer_) observer_(row);
      if (keep_trace()) rows_.push_back(std::move(row));
    }
    ++evals_;
    return internal;
  }

  bool keep_trace() const { return cfg_.keep_trace; }
  std::uint64_t evals() const { return evals_; }
  bool have_success() const { return have_success_; }
  double best_internal() const { return best_internal_; }

  ExplainResult finish() {
    if (!have_success_)
      throw NoResultError("no successful evaluation within the budget (" +
                          std::to_string(evals_) + " attempts)");
    ExplainResult res;
    res.best_predicate = best_predicate_;
    res.best_value = best_user_;
    res.trials = std::move(rows_);
    res.best_so_far = std::move(best_so_far_);
    res.iterations = evals_;
    res.wall_time_s = elapsed_s();
    return res;
  }

  Direction dir_;
  const EngineConfig& cfg_;
  const ProgressFn& observer_;
  std::chrono::steady_clock::time_point start_;
  std::uint64_t evals_ = 0;
  bool have_success_ = false;
  bool have_best_ = false;
  double worst_success_ = 0.0;
  double best_internal_ = 0.0;
  double best_user_ = std::numeric_limits<double>::quiet_NaN();
  Predicate best_predicate_;
  std::vector<TraceRow> rows_;
  std::vector<std::pair<double, double>> best_so_far_;
};

// Uniform draw from one dimension. Integer dimensions draw uniformly over
// the integers, not rounded continuous draws.
inline ParamValue random_param(const ParamDomain& domain, Rng& rng) {
  if (const auto* ci = std::get_if<ContinuousInterval>(&domain))
    return uniform_in(rng, ci->lo, ci->hi);
  if (const auto* ii = std::get_if<IntegerInterval>(&domain)) {
    auto span = static_cast<std::size_t>(ii->hi - ii->lo + 1);
    return static_cast<double>(ii->lo + static_cast<int>(uniform_index(rng, span)));
  }
  const auto& dom = std::get<CategoricalDomain>(domain);
  return dom.choices[uniform_index(rng, dom.choices.size())];
}

inline Assignment random_assignment(const ParamSpace& space, Rng& rng) {
  Assignment a;
  for (const Param& p : space.params) a[p.name] = random_param(p.domain, rng);
  return a;
}

}  // namespace predex::detail
