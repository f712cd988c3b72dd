#pragma once

// Offline optimum: the cheapest placement of k resources for the demands seen
// so far. Under diminishing returns the separable objective is minimized
// exactly by greedily taking the k largest per-resource marginal savings, with
// ties broken toward lower node ids so every caller sees one canonical answer.
// A from-scratch solve, an incremental per-demand repair, and a brute-force
// enumerator (the test oracle) all live here.

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "resmove/core.hpp"
#include "resmove/cost_model.hpp"

namespace resmove {

struct OfflineSolution {
  Configuration configuration;
  double cost = 0.0;
  // chi distance from the instance's initial placement; callers that know
  // the starting point fill it via optimal_movement_cost.
  long long movement_cost = 0;
};

namespace detail {

// Marginal saving of the x-th resource at v (1-based x): sigma(x-1) - sigma(x).
inline double marginal_saving(const CostModel& model, int v, long long x,
                              long long y) {
  return model.evaluate(v, x - 1, y) - model.evaluate(v, x, y);
}

// Greedy exactness needs the marginal savings at the demand level actually in
// play to be non-increasing in x. Checking at exactly those levels keeps the
// gate cheap and honest; a model that fails it is refused, not mis-solved.
inline void require_diminishing_returns(const CostModel& model,
                                        const DemandState& d, long long k) {
  long long x_top = std::min<long long>(model.x_max(), k);
  for (int v = 0; v < model.nodes(); ++v) {
    for (long long x = 1; x + 1 <= x_top; ++x) {
      double a = marginal_saving(model, v, x, d.counts[v]);
      double b = marginal_saving(model, v, x + 1, d.counts[v]);
      if (!(a >= b))
        throw std::invalid_argument(
            "solver requires diminishing returns; violated at node " +
            std::to_string(v) + ", x=" + std::to_string(x - 1) +
            ", y=" + std::to_string(d.counts[v]));
    }
  }
}

inline void require_diminishing_returns_at(const CostModel& model, int v,
                                           long long y, long long k) {
  long long x_top = std::min<long long>(model.x_max(), k);
  for (long long x = 1; x + 1 <= x_top; ++x) {
    double a = marginal_saving(model, v, x, y);
    double b = marginal_saving(model, v, x + 1, y);
    if (!(a >= b))
      throw std::invalid_argument(
          "solver requires diminishing returns; violated at node " +
          std::to_string(v) + ", x=" + std::to_string(x - 1) +
          ", y=" + std::to_string(y));
  }
}

}  // namespace detail

// Canonical greedy optimum: k rounds, each placing one resource where the
// marginal saving is largest (ties: lowest node id).
inline OfflineSolution optimal_allocation(const CostModel& model,
                                          const DemandState& demands,
                                          long long k) {
  int n = model.nodes();
  if (demands.nodes() != n)
    throw std::invalid_argument("optimal_allocation: dimension mismatch");
  if (k < 0) throw std::invalid_argument("optimal_allocation: negative k");
  if (k > model.x_max())
    throw std::invalid_argument("optimal_allocation: k exceeds x_max");
  detail::require_diminishing_returns(model, demands, k);

  Configuration f{std::vector<int>(static_cast<size_t>(n), 0)};
  for (long long round = 0; round < k; ++round) {
    int best_v = 0;
    double best_gain = detail::marginal_saving(model, 0, f.counts[0] + 1,
                                               demands.counts[0]);
    for (int v = 1; v < n; ++v) {
      double gain =
          detail::marginal_saving(model, v, f.counts[v] + 1, demands.counts[v]);
      if (gain > best_gain) {
        best_gain = gain;
        best_v = v;
      }
    }
    ++f.counts[best_v];
  }
  double cost = total_service_cost(model, f, demands);
  return {std::move(f), cost, 0};
}

// Exhaustive minimum over every feasible placement, in lexicographic order so
// ties resolve to the lexicographically smallest configuration. Guarded by an
// instance-size cap; this is the oracle the greedy solver is tested against.
inline OfflineSolution brute_force_allocation(const CostModel& model,
                                              const DemandState& demands,
                                              long long k) {
  int n = model.nodes();
  if (demands.nodes() != n)
    throw std::invalid_argument("brute_force_allocation: dimension mismatch");
  if (k < 0) throw std::invalid_argument("brute_force_allocation: negative k");
  if (k > model.x_max())
    throw std::invalid_argument("brute_force_allocation: k exceeds x_max");

  double combos = 1.0;  // C(n + k - 1, k)
  for (long long i = 1; i <= k; ++i) combos *= static_cast<double>(n - 1 + i) / i;
  if (combos > 1e6)
    throw std::invalid_argument(
        "brute_force_allocation: C(n+k-1,k) ~ " + std::to_string(combos) +
        " exceeds 1e6");

  Configuration current{std::vector<int>(static_cast<size_t>(n), 0)};
  Configuration best;
  double best_cost = 0.0;
  bool found = false;
  // Assign counts node by node; the last node absorbs the remainder, so the
  // recursion emits configurations in increasing lexicographic order.
  auto recurse = [&](auto&& self, int v, long long left) -> void {
    if (v == n - 1) {
      current.counts[v] = static_cast<int>(left);
      double cost = total_service_cost(model, current, demands);
      if (!found || cost < best_cost) {
        found = true;
        best_cost = cost;
        best = current;
      }
      return;
    }
    for (long long c = 0; c <= left; ++c) {
      current.counts[v] = static_cast<int>(c);
      self(self, v + 1, left - c);
    }
  };
  recurse(recurse, 0, k);
  return {std::move(best), best_cost, 0};
}

inline long long optimal_movement_cost(const Configuration& f0,
                                       const OfflineSolution& solution) {
  return chi_distance(f0, solution.configuration);
}

// Maintains the canonical optimum across single-demand updates. Only the
// touched node's marginals change (and only upward), so the previous optimum
// is repaired by shifting resources toward that node while doing so still
// improves the canonical greedy order. From-scratch equality is asserted in
// the test suite.
class IncrementalSolver {
 public:
  IncrementalSolver(std::shared_ptr<const CostModel> model, long long k)
      : model_(std::move(model)), k_(k), demands_(model_->nodes()) {
    if (!model_) throw std::invalid_argument("IncrementalSolver: null model");
    if (k < 0) throw std::invalid_argument("IncrementalSolver: negative k");
    if (k > model_->x_max())
      throw std::invalid_argument("IncrementalSolver: k exceeds x_max");
    OfflineSolution s = optimal_allocation(*model_, demands_, k_);
    allocation_ = std::move(s.configuration);
    cost_ = s.cost;
  }

  void apply_demand(int node) {
    resmove::apply_demand(demands_, node);
    detail::require_diminishing_returns_at(*model_, node, demands_.counts[node],
                                           k_);
    repair_toward(node);
    cost_ = total_service_cost(*model_, allocation_, demands_);
  }

  const Configuration& optimal_configuration() const { return allocation_; }
  double optimal_cost() const { return cost_; }
  const DemandState& demands() const { return demands_; }

  OfflineSolution solve_from_scratch() const {
    return optimal_allocation(*model_, demands_, k_);
  }

 private:
  void repair_toward(int u) {
    int n = model_->nodes();
    while (allocation_.counts[u] < k_) {
      double gain_in =
          detail::marginal_saving(*model_, u, allocation_.counts[u] + 1,
                                  demands_.counts[u]);
      // Weakest held pick outside u: smallest saving, ties toward the highest
      // node id (the latest entry in the canonical greedy order).
      int out_v = -1;
      double out_gain = 0.0;
      for (int v = 0; v < n; ++v) {
        if (v == u || allocation_.counts[v] == 0) continue;
        double g = detail::marginal_saving(*model_, v, allocation_.counts[v],
                                           demands_.counts[v]);
        if (out_v < 0 || g <= out_gain) {
          out_v = v;
          out_gain = g;
        }
      }
      if (out_v < 0) break;  // u already holds every resource
      bool swap = gain_in > out_gain || (gain_in == out_gain && u < out_v);
      if (!swap) break;
      --allocation_.counts[out_v];
      ++allocation_.counts[u];
    }
  }

  std::shared_ptr<const CostModel> model_;
  long long k_;
  DemandState demands_;
  Configuration allocation_;
  double cost_ = 0.0;
};

// Cheapest placement other than f0 itself, at zero demands. If the
// unconstrained optimum already differs from f0 it is the answer; otherwise
// the runner-up sits one move away from f0 (walking any placement one step
// toward an optimum never raises its cost under diminishing returns).
inline double service_min(const CostModel& model, const Configuration& f0) {
  int n = model.nodes();
  if (n < 2)
    throw std::invalid_argument("service_min: no alternative feasible solution");
  validate_configuration(f0, n, f0.total());
  long long k = f0.total();
  if (k < 1) throw std::invalid_argument("service_min: placement holds no resources");
  if (k > model.x_max())
    throw std::invalid_argument("service_min: k exceeds x_max");

  DemandState zero(n);
  OfflineSolution opt = optimal_allocation(model, zero, k);
  double result;
  if (!(opt.configuration == f0)) {
    result = opt.cost;
  } else {
    bool found = false;
    double best = 0.0;
    Configuration work = f0;
    for (int src = 0; src < n; ++src) {
      if (f0.counts[src] == 0) continue;
      for (int dst = 0; dst < n; ++dst) {
        if (dst == src) continue;
        --work.counts[src];
        ++work.counts[dst];
        double cost = total_service_cost(model, work, zero);
        if (!found || cost < best) {
          found = true;
          best = cost;
        }
        ++work.counts[src];
        --work.counts[dst];
      }
    }
    result = best;
  }

  // Small instances double-check against full enumeration.
  if (static_cast<long long>(n) * k <= 20) {
    Configuration current{std::vector<int>(static_cast<size_t>(n), 0)};
    bool found = false;
    double best = 0.0;
    auto recurse = [&](auto&& self, int v, long long left) -> void {
      if (v == n - 1) {
        current.counts[v] = static_cast<int>(left);
        if (current == f0) return;
        double cost = total_service_cost(model, current, zero);
        if (!found || cost < best) {
          found = true;
          best = cost;
        }
        return;
      }
      for (long long c = 0; c <= left; ++c) {
        current.counts[v] = static_cast<int>(c);
        self(self, v + 1, left - c);
      }
    };
    recurse(recurse, 0, k);
    if (!found || std::abs(best - result) > 1e-9 * std::max(1.0, std::abs(best)))
      throw internal_error("service_min: greedy path disagrees with enumeration");
  }
  return result;
}

inline CostModelStats compute_stats(const CostModel& model,
                                    const Configuration& f0) {
  CostModelStats stats;
  stats.delta_max = delta_max(model, model.y_max());
  stats.service_min = service_min(model, f0);
  return stats;
}

}  // namespace resmove
