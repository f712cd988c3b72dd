#pragma once

// The online player. A Session owns one run: it receives demands one at a
// time and, whenever the running service cost reaches alpha * optimum + beta,
// relocates resources one improving move at a time until the guarantee
// S_t < alpha * S_t* + beta holds again. Every demand and every move is
// recorded (metrics row per time step, full placement snapshots) so the
// analysis checks in instrumentation.hpp can replay the run.

#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "resmove/core.hpp"
#include "resmove/cost_model.hpp"
#include "resmove/offline.hpp"

namespace resmove {

// A move only counts as improving if it beats this epsilon; anything closer
// to zero is treated as stagnation and trips the internal guard.
inline constexpr double kImprovementEpsilon = 1e-12;

struct GuaranteeParams {
  double alpha = 1.0;
  double beta = 0.0;
};

struct MetricsSample {
  long long t = 0;
  double service_cost = 0.0;   // S_t, the player's cost
  double optimal_cost = 0.0;   // S_t*, the offline optimum
  long long moves = 0;         // M_t, moves made so far
  long long optimal_moves = 0; // chi(F_0, F_t*) for the canonical optimum
  int phase = 0;               // 0 until the first move happens
};

struct MetricsSeries {
  std::vector<MetricsSample> rows;  // one per t = 0..T, in order
};

// Placement + demand counts right after one event (a demand or a move).
struct HistorySnapshot {
  long long t = 0;
  long long moves_done = 0;
  Configuration placement;
  std::vector<long long> demand_counts;
};

class Session {
 public:
  Session(std::shared_ptr<const CostModel> model, InstanceConfig instance,
          GuaranteeParams params)
      : model_(std::move(model)),
        instance_(std::move(instance)),
        params_(params),
        demands_(0) {
    if (!model_) throw std::invalid_argument("session: null model");
    instance_.validate();
    if (instance_.n < 2)
      throw std::invalid_argument("session: need at least two nodes to move between");
    if (model_->nodes() != instance_.n)
      throw std::invalid_argument("session: model and instance disagree on n");
    if (model_->x_max() < instance_.k)
      throw std::invalid_argument("session: model x_max below k");
    if (!(params_.alpha >= 1.0))
      throw std::invalid_argument("session: alpha must be >= 1");
    if (!(params_.beta >= 0.0))
      throw std::invalid_argument("session: beta must be >= 0");

    // Verify the axioms on the window the run can actually touch. Three of
    // them are load-bearing here: diminishing returns (solver exactness and
    // the existence of improving moves), demand monotonicity (the optimum
    // never drops when demands arrive), and the marginal-demand property
    // (the x=0 shortcut inside delta_max). A model may fail
    // monotone_resources and still run correctly; movement-charge augmented
    // models do exactly that, so only the full report records it.
    long long x_bound = std::min<long long>(model_->x_max(), instance_.k + 2);
    long long y_bound = std::min<long long>(model_->y_max(), 64);
    if (x_bound >= 2) {
      axiom_report_ = check_properties(*model_, x_bound, y_bound);
      bool usable = axiom_report_.monotone_demands &&
                    axiom_report_.diminishing_returns &&
                    axiom_report_.marginal_demand_monotone;
      if (!usable) {
        for (const AxiomWitness& w : axiom_report_.witnesses) {
          if (w.axiom == "monotone_resources") continue;
          throw std::invalid_argument(
              "session: cost model fails axiom " + w.axiom + " at node " +
              std::to_string(w.v) + ", x=" + std::to_string(w.x) +
              ", y=" + std::to_string(w.y));
        }
      }
    }

    stats_ = compute_stats(*model_, instance_.initial_placement);
    double headroom = std::max((params_.alpha - 1.0) * stats_.service_min,
                               params_.beta);
    if (!(headroom >= stats_.delta_max))
      throw std::invalid_argument(
          "session: guarantee parameters too tight: max((alpha-1)*service_min, "
          "beta) = max(" + std::to_string((params_.alpha - 1.0) * stats_.service_min) +
          ", " + std::to_string(params_.beta) + ") < delta_max = " +
          std::to_string(stats_.delta_max) + " (service_min = " +
          std::to_string(stats_.service_min) + ")");

    placement_ = instance_.initial_placement;
    demands_ = DemandState(instance_.n);
    solver_ = std::make_unique<IncrementalSolver>(model_, instance_.k);
    service_cost_ = total_service_cost(*model_, placement_, demands_);
    snapshot();
    // The starting placement itself may already violate the guarantee.
    restore_guarantee();
    append_metrics_row();
  }

  // Feed one demand; returns the moves made in response (possibly none).
  std::vector<MovementRecord> step(int node) {
    resmove::apply_demand(demands_, node);
    ++time_;
    double prev_optimal = solver_->optimal_cost();
    solver_->apply_demand(node);
    if (solver_->optimal_cost() < prev_optimal - 1e-9)
      throw internal_error("session: offline optimum decreased after a demand");
    service_cost_ += model_->evaluate(node, placement_.counts[node],
                                      demands_.counts[node]) -
                     model_->evaluate(node, placement_.counts[node],
                                      demands_.counts[node] - 1);
    snapshot();
    std::vector<MovementRecord> made = restore_guarantee();
    append_metrics_row();
    return made;
  }

  const Configuration& configuration() const { return placement_; }
  const DemandState& demands() const { return demands_; }
  const std::vector<MovementRecord>& move_log() const { return log_; }
  const MetricsSeries& metrics() const { return metrics_; }
  const std::vector<HistorySnapshot>& history() const { return history_; }
  const GuaranteeParams& guarantee() const { return params_; }
  const CostModelStats& stats() const { return stats_; }
  const PropertyReport& axiom_report() const { return axiom_report_; }
  const CostModel& model() const { return *model_; }
  std::shared_ptr<const CostModel> model_ptr() const { return model_; }
  const InstanceConfig& instance() const { return instance_; }
  long long time() const { return time_; }
  long long moves() const { return static_cast<long long>(log_.size()); }
  int current_phase() const { return phase_; }
  double service_cost() const { return service_cost_; }
  double optimal_cost() const { return solver_->optimal_cost(); }

  double service_cost_recomputed() const {
    return total_service_cost(*model_, placement_, demands_);
  }

 private:
  std::vector<MovementRecord> restore_guarantee() {
    std::vector<MovementRecord> made;
    long long guard_limit = 2 * static_cast<long long>(instance_.k);
    while (service_cost_ >=
           params_.alpha * solver_->optimal_cost() + params_.beta) {
      if (static_cast<long long>(made.size()) >= guard_limit)
        throw internal_error(
            "session: restore loop exceeded " + std::to_string(guard_limit) +
            " moves at t=" + std::to_string(time_));

      // Cheapest resource to give up.
      int src = -1;
      double removal = 0.0;
      for (int v = 0; v < instance_.n; ++v) {
        if (placement_.counts[v] == 0) continue;
        double r = model_->evaluate(v, placement_.counts[v] - 1, demands_.counts[v]) -
                   model_->evaluate(v, placement_.counts[v], demands_.counts[v]);
        if (src < 0 || r < removal) {
          src = v;
          removal = r;
        }
      }
      if (src < 0) throw internal_error("session: no resource to move");

      // Most valuable place to put it.
      int dst = -1;
      double gain = 0.0;
      for (int v = 0; v < instance_.n; ++v) {
        if (v == src) continue;
        double g = model_->evaluate(v, placement_.counts[v], demands_.counts[v]) -
                   model_->evaluate(v, placement_.counts[v] + 1, demands_.counts[v]);
        if (dst < 0 || g > gain) {
          dst = v;
          gain = g;
        }
      }
      if (dst < 0) throw internal_error("session: no destination for a move");

      double improvement = gain - removal;
      if (!(improvement > kImprovementEpsilon))
        throw internal_error(
            "session: guarantee violated at t=" + std::to_string(time_) +
            " but the best move improves by " + std::to_string(improvement));

      apply_move(placement_, src, dst);
      service_cost_ -= improvement;
      MovementRecord rec{static_cast<int>(log_.size()) + 1, time_, src, dst,
                         improvement};
      log_.push_back(rec);
      made.push_back(rec);
      track_phase(rec);
      snapshot();
    }
    return made;
  }

  // A move whose source was a destination earlier in the current phase opens
  // the next phase.
  void track_phase(const MovementRecord& rec) {
    if (phase_ == 0) {
      phase_ = 1;
      phase_destinations_.clear();
    } else if (phase_destinations_.count(rec.src)) {
      ++phase_;
      phase_destinations_.clear();
    }
    phase_destinations_.insert(rec.dst);
  }

  void snapshot() {
    history_.push_back({time_, static_cast<long long>(log_.size()), placement_,
                        demands_.counts});
  }

  void append_metrics_row() {
    OfflineSolution current{solver_->optimal_configuration(),
                            solver_->optimal_cost(), 0};
    metrics_.rows.push_back({time_, service_cost_, solver_->optimal_cost(),
                             static_cast<long long>(log_.size()),
                             optimal_movement_cost(instance_.initial_placement,
                                                   current),
                             phase_});
  }

  std::shared_ptr<const CostModel> model_;
  InstanceConfig instance_;
  GuaranteeParams params_;
  CostModelStats stats_;
  PropertyReport axiom_report_;
  Configuration placement_;
  DemandState demands_;
  std::unique_ptr<IncrementalSolver> solver_;
  double service_cost_ = 0.0;
  long long time_ = 0;
  int phase_ = 0;
  std::set<int> phase_destinations_;
  std::vector<MovementRecord> log_;
  MetricsSeries metrics_;
  std::vector<HistorySnapshot> history_;
};

inline const MetricsSeries& run_trace(Session& session,
                                      const std::vector<int>& trace) {
  for (int node : trace) session.step(node);
  return session.metrics();
}

}  // namespace resmove
