#include "predex/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "predex/baselines.hpp"
#include "predex/categorical.hpp"
#include "predex/tpe.hpp"
#include "run_support.hpp"

namespace predex {

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::tpe_ic_ws: return "tpe_ic_ws";
    case Strategy::tpe_ws_only: return "tpe_ws_only";
    case Strategy::tpe_plain: return "tpe_plain";
    case Strategy::random_search: return "random";
    case Strategy::hyperband: return "hyperband";
  }
  return "tpe_ic_ws";
}

Strategy strategy_from_string(const std::string& s) {
  if (s == "tpe_ic_ws") return Strategy::tpe_ic_ws;
  if (s == "tpe_ws_only") return Strategy::tpe_ws_only;
  if (s == "tpe_plain") return Strategy::tpe_plain;
  if (s == "random") return Strategy::random_search;
  if (s == "hyperband") return Strategy::hyperband;
  throw std::invalid_argument("unknown strategy \"" + s + "\"");
}

void validate_config(const EngineConfig& cfg) {
  if (!cfg.max_iters && !cfg.time_budget_s)
    throw std::invalid_argument("config: set max_iters, time_budget_s, or both");
  if (cfg.max_iters && *cfg.max_iters == 0)
    throw std::invalid_argument("config: max_iters must be positive");
  if (cfg.time_budget_s && !(*cfg.time_budget_s > 0.0))
    throw std::invalid_argument("config: time_budget_s must be positive");
  if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0))
    throw std::invalid_argument("config: gamma must be in (0, 1)");
  if (cfg.n_init == 0) throw std::invalid_argument("config: n_init must be positive");
  if (cfg.n_ei == 0) throw std::invalid_argument("config: n_ei must be positive");
  if (cfg.strategy == Strategy::hyperband && cfg.population < 8)
    throw std::invalid_argument("config: hyperband population must be at least 8");
  if (!(cfg.start_fraction > 0.0 && cfg.start_fraction <= 1.0))
    throw std::invalid_argument("config: start_fraction must be in (0, 1]");
  if (cfg.model_window < 8)
    throw std::invalid_argument("config: model_window must be at least 8");
}

void to_json(nlohmann::json& j, const TraceRow& t) {
  nlohmann::json assignment = nlohmann::json::object();
  for (const auto& [name, value] : t.assignment) {
    if (const double* d = std::get_if<double>(&value))
      assignment[name] = *d;
    else
      assignment[name] = std::get<std::string>(value);
  }
  j = nlohmann::json{{"iter", t.iteration},
                     {"phase", t.phase},
                     {"predicate", t.predicate},
                     {"assignment", std::move(assignment)},
                     {"internal", t.internal},
                     {"failed", t.failed},
                     {"data_fraction", t.data_fraction},
                     {"wall_s", t.wall_s}};
  if (t.failed)
    j["value"] = nullptr;
  else
    j["value"] = t.value;
  if (std::isnan(t.best))
    j["best"] = nullptr;
  else
    j["best"] = t.best;
}

void ProgressStream::push(const TraceRow& row) {
  std::lock_guard<std::mutex> lock(mu_);
  rows_.push_back(row);
}

std::size_t ProgressStream::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return rows_.size();
}

std::vector<TraceRow> ProgressStream::snapshot() const {
  std::lock_guard<std::mutex> lock(mu_);
  return rows_;
}

ProgressFn ProgressStream::callback() {
  return [this](const TraceRow& row) { push(row); };
}

std::optional<double> evaluate(const ObjectiveSpec& spec, const Relation& r, const Predicate& p) {
  auto proc = detail::spawn_if_external(spec);
  detail::BoundObjective obj(spec, r, proc.get());
  return obj.eval_pred(p);
}

namespace {

// TPE with optional IC encoding and warm start (strategies tpe_ic_ws,
// tpe_ws_only, tpe_plain).
ExplainResult tpe_explain(const Relation& r, const std::vector<std::string>& variables,
                          const ObjectiveSpec& spec, const EngineConfig& cfg,
                          const ProgressFn& on_trial) {
  Rng rng(cfg.seed);
  auto proc = detail::spawn_if_external(spec);
  detail::BoundObjective obj(spec, r, proc.get());
  detail::RunState st(cfg, spec.direction, on_trial);

  std::vector<std::string> cat_vars;
  for (const std::string& v : variables)
    if (r.column(v).kind == ColumnKind::categorical) cat_vars.push_back(v);

  // Phase 1: individual contributions, one probe per categorical value.
  const bool use_ic = cfg.strategy != Strategy::tpe_plain;
  std::vector<ICMap> ics;
  if (use_ic) {
    try {
      for (const std::string& col : cat_vars) {
        ics.push_back(compute_ic(
            r, col,
            [&](const Relation& filtered, const Predicate& removed) -> std::optional<double> {
              if (!st.budget_left()) throw detail::BudgetExhausted{};
              std::optional<double> user = obj.eval_filtered(filtered, removed);
              st.record("ic", removed, {}, user);
              return user;
            },
            spec.direction));
      }
    } catch (const detail::BudgetExhausted&) {
      // Partial column dropped; completed ICMaps still seed the warm start.
    }
  }

  // Phase 2: parameter space, with rank encodings for tpe_ic_ws. Rank 1 is
  // the best value on the internal scale, which keeps dir=high on f
  // identical to dir=low on -f.
  std::map<std::string, std::vector<std::string>> ranked;
  std::map<std::string, ICEncoding> encodings;
  if (cfg.strategy == Strategy::tpe_ic_ws) {
    for (const ICMap& m : ics) {
      ICMap adjusted = m;
      if (spec.direction == Direction::high)
        for (auto& [value, score] : adjusted.scores) score = -score;
      ICEncoding enc = ic_encode(adjusted);
      ranked[m.column] = enc.by_rank;
      encodings.emplace(m.column, std::move(enc));
    }
  }
  ParamSpace space = build_param_space(r, variables, ranked);

  History model;
  long model_iter = 0;
  // Keeps |model| at cfg.model_window once exceeded. The global elite -- the
  // best ceil(gamma * window) trials by (value, iteration) -- always
  // survives, so the good half of later splits equals what an unbounded
  // history would select; the bad half tracks the recent remainder.
  auto evict = [&] {
    if (model.trials.size() <= cfg.model_window) return;
    std::size_t elite = static_cast<std::size_t>(
        std::ceil(cfg.gamma * static_cast<double>(cfg.model_window)));
    elite = std::max<std::size_t>(1, elite);
    std::vector<std::pair<double, long>> order;
    order.reserve(model.trials.size());
    for (const Trial& t : model.trials) order.emplace_back(t.value, t.iteration);
    std::nth_element(order.begin(), order.begin() + (elite - 1), order.end());
    std::pair<double, long> cut = *std::max_element(order.begin(), order.begin() + elite);
    for (auto it = model.trials.begin(); it != model.trials.end(); ++it) {
      if (std::pair<double, long>{it->value, it->iteration} > cut) {
        model.trials.erase(it);  // oldest non-elite: storage is append-ordered
        return;
      }
    }
    model.trials.erase(model.trials.begin());
  };
  // Stall-triggered restarts. When no TPE step has improved on the current
  // epoch's best for cfg.restart_after consecutive trials, the model is
  // rebuilt from the basin book: the init trials plus one incumbent per
  // finished epoch. The rebuilt history is small and spatially spread, so
  // the next suggestions get support-wide bandwidths and probe broadly
  // before re-converging. Best tracking, budgets, and traces never reset.
  std::vector<Trial> basin_book;
  std::optional<Trial> epoch_incumbent;
  double epoch_best = std::numeric_limits<double>::infinity();
  std::uint64_t since_improve = 0;
  auto restart = [&] {
    if (epoch_incumbent) basin_book.push_back(std::move(*epoch_incumbent));
    epoch_incumbent.reset();
    epoch_best = std::numeric_limits<double>::infinity();
    since_improve = 0;
    model.trials.clear();
    for (const Trial& t : basin_book)
      model.trials.push_back({t.assignment, t.value, model_iter++});
  };
  auto run_trial = [&](Assignment a, const char* phase) {
    bool init_phase = phase[0] == 'i';
    Predicate p = decode(space, a);
    std::optional<double> user = obj.eval_pred(p);
    double internal = st.record(phase, p, a, user);
    Trial t{std::move(a), internal, model_iter++};
    if (init_phase) {
      basin_book.push_back(t);
    } else if (cfg.restart_after > 0) {
      if (internal < epoch_best) {
        epoch_best = internal;
        epoch_incumbent = t;
        since_improve = 0;
      } else if (++since_improve >= cfg.restart_after) {
        restart();  // the stale trial is dropped from the model, not the trace
        return;
      }
    }
    model.trials.push_back(std::move(t));
    evict();
  };

  // Phase 3: initialization, warm-started from IC sums when available and
  // padded with uniform draws.
  std::size_t init_done = 0;
  if (use_ic && !ics.empty() && st.budget_left()) {
    WarmStart ws = warm_start_combos(ics, cfg.n_init, spec.direction);
    for (const std::vector<std::string>& combo : ws.combos) {
      if (!st.budget_left()) break;
      std::map<std::string, const std::string*> fixed;
      for (std::size_t i = 0; i < ics.size(); ++i) fixed[ics[i].column] = &combo[i];
      Assignment a;
      for (const ColumnBinding& b : space.bindings) {
        auto fx = fixed.find(b.column);
        if (fx == fixed.end()) {
          // Numeric dimensions (and categoricals without an ICMap) draw
          // uniformly.
          std::size_t n_params = b.kind == ColumnBinding::Kind::numeric ? 2 : 1;
          for (std::size_t pi = b.first_param; pi < b.first_param + n_params; ++pi)
            a[space.params[pi].name] = detail::random_param(space.params[pi].domain, rng);
          continue;
        }
        if (b.kind == ColumnBinding::Kind::ranked) {
          a[space.params[b.first_param].name] =
              static_cast<double>(encodings.at(b.column).rank_of.at(*fx->second));
        } else {
          a[space.params[b.first_param].name] = *fx->second;
        }
      }
      run_trial(std::move(a), "init");
      ++init_done;
    }
  }
  while (init_done < cfg.n_init && st.budget_left()) {
    run_trial(detail::random_assignment(space, rng), "init");
    ++init_done;
  }

  // Phase 4: TPE loop until the budget stops it.
  while (st.budget_left()) {
    Assignment a = model.trials.empty()
                       ? detail::random_assignment(space, rng)
                       : suggest(model, space, cfg.gamma, cfg.n_ei, rng);
    run_trial(std::move(a), "tpe");
  }
  return st.finish();
}

}  // namespace

ExplainResult explain(const Relation& r, const std::vector<std::string>& variables,
                      const ObjectiveSpec& spec, const EngineConfig& cfg,
                      const ProgressFn& on_trial) {
  validate_config(cfg);
  if (variables.empty()) throw std::invalid_argument("explain: no variables given");
  switch (cfg.strategy) {
    case Strategy::random_search:
      return random_search(r, variables, spec, cfg, on_trial);
    case Strategy::hyperband:
      return hyperband(r, variables, spec, cfg, on_trial);
    default:
      return tpe_explain(r, variables, spec, cfg, on_trial);
  }
}

}  // namespace predex
