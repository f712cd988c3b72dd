#pragma once

// Adaptive demand generator that forces movement. It plays the covering model
// on n >= 3k nodes against any online algorithm claiming
//   S_t < alpha * (S_t* + M_t*) + beta.
// Demands only ever land on initially empty nodes. Phase 0 loads k fresh
// nodes with 2 demands each; phase p raises nodes toward a precomputed
// threshold, always picking a currently free node, so the algorithm must keep
// vacating nodes it already paid to fill. The adversary sees nothing but the
// algorithm's public placement.

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "resmove/core.hpp"
#include "resmove/cost_model.hpp"
#include "resmove/offline.hpp"
#include "resmove/online.hpp"

namespace resmove {

struct AdversarySchedule {
  long long k = 0;
  double alpha = 1.0;
  double beta = 0.0;
  double effective_beta = 0.0;  // beta + alpha * k, the slack of the weak claim
  int p_max = 0;
  // All indexed by phase 0..p_max. group_sizes[0] = k; thresholds[0] = 2;
  // optimal_costs[p] is the offline service cost the construction holds the
  // optimum at throughout the main part of phase p.
  std::vector<long long> group_sizes;
  std::vector<long long> thresholds;
  std::vector<long long> optimal_costs;
};

// Demand thresholds sized so that group_sizes[p] free nodes at
// thresholds[p] demands already put any compliant algorithm over its claimed
// bound. Group sizes interpolate from k/3 down to 1 geometrically.
inline AdversarySchedule build_schedule(long long k, double alpha, double beta,
                                        int p_max) {
  if (k < 9)
    throw std::invalid_argument("build_schedule: k must be >= 9 (needs k/3 >= 3)");
  if (p_max < 1) throw std::invalid_argument("build_schedule: p_max must be >= 1");
  if (!(alpha >= 1.0)) throw std::invalid_argument("build_schedule: alpha must be >= 1");
  if (!(beta >= 0.0)) throw std::invalid_argument("build_schedule: beta must be >= 0");

  AdversarySchedule s;
  s.k = k;
  s.alpha = alpha;
  s.beta = beta;
  s.effective_beta = beta + alpha * static_cast<double>(k);
  s.p_max = p_max;
  s.group_sizes.assign(static_cast<size_t>(p_max) + 1, 0);
  s.group_sizes[0] = k;
  double third = static_cast<double>(k) / 3.0;
  for (int i = 1; i <= p_max; ++i) {
    long long size;
    if (p_max == 1) {
      size = static_cast<long long>(std::floor(third));
    } else {
      double exponent = static_cast<double>(p_max - i) / (p_max - 1);
      size = static_cast<long long>(std::floor(std::pow(third, exponent)));
    }
    size = std::max<long long>(1, size);
    if (i > 1) size = std::min(size, s.group_sizes[i - 1]);
    s.group_sizes[i] = size;
  }

  s.thresholds.assign(static_cast<size_t>(p_max) + 1, 0);
  s.optimal_costs.assign(static_cast<size_t>(p_max) + 1, 0);
  s.thresholds[0] = 2;
  long long settled = 0;  // sum over j < p of (n_j - n_{j+1}) * thresholds[j-1]
  for (int p = 1; p <= p_max; ++p) {
    long long n_p = s.group_sizes[p];
    s.optimal_costs[p] = n_p * s.thresholds[p - 1] + settled;
    double needed =
        ((alpha - 1.0) * s.optimal_costs[p] + s.effective_beta) / n_p;
    long long rise = static_cast<long long>(std::ceil(needed));
    s.thresholds[p] = s.thresholds[p - 1] + rise;
    if (p < p_max)
      settled += (s.group_sizes[p] - s.group_sizes[p + 1]) * s.thresholds[p - 1];
  }
  return s;
}

// The adversary's whole view of its opponent.
class OnlineAlgorithm {
 public:
  virtual ~OnlineAlgorithm() = default;
  virtual const Configuration& configuration() const = 0;
  virtual std::vector<MovementRecord> observe_demand(int node) = 0;
};

inline std::shared_ptr<const CostModel> adversary_cost_model(
    const AdversarySchedule& s, int n) {
  return std::make_shared<const CostModel>(
      CostModel::covering(n, s.k, std::max<long long>(s.thresholds.back(), 2)));
}

inline InstanceConfig adversary_instance(const AdversarySchedule& s, int n) {
  InstanceConfig inst;
  inst.n = n;
  inst.k = static_cast<int>(s.k);
  inst.initial_placement.counts.assign(static_cast<size_t>(n), 0);
  for (long long v = 0; v < s.k; ++v) inst.initial_placement.counts[v] = 1;
  return inst;
}

// The greedy session dressed up as a game opponent.
class SessionAlgorithm : public OnlineAlgorithm {
 public:
  SessionAlgorithm(std::shared_ptr<const CostModel> model, InstanceConfig instance,
                   GuaranteeParams params)
      : session_(std::move(model), std::move(instance), params) {}

  const Configuration& configuration() const override {
    return session_.configuration();
  }
  std::vector<MovementRecord> observe_demand(int node) override {
    return session_.step(node);
  }
  Session& session() { return session_; }
  const Session& session() const { return session_; }

 private:
  Session session_;
};

// Refuses to move; breaches quickly. Useful as a negative control.
class NeverMoveAlgorithm : public OnlineAlgorithm {
 public:
  explicit NeverMoveAlgorithm(Configuration placement)
      : placement_(std::move(placement)) {}
  const Configuration& configuration() const override { return placement_; }
  std::vector<MovementRecord> observe_demand(int) override { return {}; }

 private:
  Configuration placement_;
};

// Teleports to the canonical offline optimum after every demand. Pays heavily
// in moves but keeps its service cost equal to the optimum.
class OracleFollowerAlgorithm : public OnlineAlgorithm {
 public:
  OracleFollowerAlgorithm(std::shared_ptr<const CostModel> model,
                          InstanceConfig instance)
      : model_(std::move(model)),
        k_(instance.k),
        demands_(instance.n),
        placement_(instance.initial_placement) {}

  const Configuration& configuration() const override { return placement_; }

  std::vector<MovementRecord> observe_demand(int node) override {
    resmove::apply_demand(demands_, node);
    ++time_;
    Configuration target =
        optimal_allocation(*model_, demands_, k_).configuration;
    std::vector<MovementRecord> made;
    // Drain surpluses into deficits in node order.
    int dst = 0;
    for (int src = 0; src < placement_.nodes(); ++src) {
      while (placement_.counts[src] > target.counts[src]) {
        while (dst < placement_.nodes() &&
               placement_.counts[dst] >= target.counts[dst])
          ++dst;
        if (dst == placement_.nodes())
          throw internal_error("oracle follower: no deficit node found");
        double before = total_service_cost(*model_, placement_, demands_);
        apply_move(placement_, src, dst);
        double after = total_service_cost(*model_, placement_, demands_);
        ++moves_;
        made.push_back({static_cast<int>(moves_), time_, src, dst,
                        before - after});
      }
    }
    return made;
  }

 private:
  std::shared_ptr<const CostModel> model_;
  long long k_;
  DemandState demands_;
  Configuration placement_;
  long long moves_ = 0;
  long long time_ = 0;
};

enum class GameStage { warmup, topup, main };

inline const char* stage_name(GameStage s) {
  switch (s) {
    case GameStage::warmup: return "warmup";
    case GameStage::topup: return "topup";
    case GameStage::main: return "main";
  }
  return "?";
}

struct GameStep {
  long long t = 0;
  int node = 0;
  std::vector<std::pair<int, int>> moves;  // (src, dst) in execution order
  int free_at_threshold = 0;  // free nodes already holding the phase threshold
  int phase = 0;
  GameStage stage = GameStage::warmup;
  double service_cost = 0.0;   // the algorithm's covering cost
  double optimal_cost = 0.0;   // offline optimum for the demands so far
  long long optimal_moves = 0; // fewest moves any optimal placement needs
};

struct GameTranscript {
  int n = 0;
  AdversarySchedule schedule;
  std::vector<GameStep> steps;
  std::vector<long long> phase_moves;          // observed moves per phase
  std::vector<std::vector<int>> phase_members; // nodes at the threshold per phase
  bool breached = false;
  long long breach_time = -1;
  int breach_phase = -1;
  std::string breach_detail;
};

inline GameTranscript run_game(const AdversarySchedule& s,
                               OnlineAlgorithm& algorithm, int n) {
  long long k = s.k;
  if (n < 3 * k)
    throw std::invalid_argument("run_game: needs n >= 3k");
  InstanceConfig inst = adversary_instance(s, n);
  if (!(algorithm.configuration() == inst.initial_placement))
    throw std::invalid_argument(
        "run_game: algorithm does not start at the game's initial placement");

  GameTranscript game;
  game.n = n;
  game.schedule = s;
  game.phase_moves.assign(static_cast<size_t>(s.p_max) + 1, 0);
  game.phase_members.assign(static_cast<size_t>(s.p_max) + 1, {});

  DemandState d(n);
  long long t = 0;
  int phase = 0;
  GameStage stage = GameStage::warmup;
  std::vector<long long> piles;

  auto feed = [&](int v) -> bool {
    ++t;
    resmove::apply_demand(d, v);
    std::vector<MovementRecord> moves = algorithm.observe_demand(v);
    const Configuration& placement = algorithm.configuration();
    validate_configuration(placement, n, k);
    game.phase_moves[phase] += static_cast<long long>(moves.size());

    piles = d.counts;
    std::sort(piles.begin(), piles.end(), std::greater<>());
    long long covered = 0, nonzero = 0;
    for (size_t i = 0; i < piles.size(); ++i) {
      if (piles[i] > 0) ++nonzero;
      if (static_cast<long long>(i) < k) covered += piles[i];
    }
    double optimal = static_cast<double>(d.total() - covered);
    long long optimal_moves = std::min(nonzero, k);
    double service = 0.0;
    int free_at_threshold = 0;
    for (int u = 0; u < n; ++u) {
      if (placement.counts[u] != 0) continue;
      service += static_cast<double>(d.counts[u]);
      if (d.counts[u] == s.thresholds[phase]) ++free_at_threshold;
    }

    GameStep step;
    step.t = t;
    step.node = v;
    step.moves.reserve(moves.size());
    for (const MovementRecord& m : moves) step.moves.emplace_back(m.src, m.dst);
    step.free_at_threshold = free_at_threshold;
    step.phase = phase;
    step.stage = stage;
    step.service_cost = service;
    step.optimal_cost = optimal;
    step.optimal_moves = optimal_moves;
    game.steps.push_back(std::move(step));

    double bound = s.alpha * (optimal + static_cast<double>(optimal_moves)) + s.beta;
    if (!(service < bound)) {
      game.breached = true;
      game.breach_time = t;
      game.breach_phase = phase;
      std::ostringstream out;
      out << "t=" << t << " phase " << phase << ": service cost " << service
          << " >= alpha*(S* + M*) + beta = " << bound;
      game.breach_detail = out.str();
      return false;
    }
    return true;
  };

  auto raise = [&](int v, long long target) -> bool {
    while (d.counts[v] < target)
      if (!feed(v)) return false;
    return true;
  };

  // Phase 0: two demands on each of k fresh nodes.
  std::vector<int> warm;
  for (long long v = k; v < 2 * k; ++v) warm.push_back(static_cast<int>(v));
  for (int v : warm)
    if (!raise(v, s.thresholds[0])) return game;
  game.phase_members[0] = warm;

  for (int p = 1; p <= s.p_max; ++p) {
    phase = p;
    stage = GameStage::topup;
    long long target = s.thresholds[p];

    // Seed group: fresh nodes for phase 1, then nodes the optimum abandoned
    // two phases ago (they hold the stalest thresholds).
    std::vector<int> pool;
    if (p == 1) {
      for (long long v = 2 * k; v < n; ++v) pool.push_back(static_cast<int>(v));
    } else {
      const std::vector<int>& old = game.phase_members[p - 2];
      std::set<int> newer(game.phase_members[p - 1].begin(),
                          game.phase_members[p - 1].end());
      for (int v : old)
        if (!newer.count(v)) pool.push_back(v);
    }
    if (static_cast<long long>(pool.size()) < s.group_sizes[p])
      throw internal_error("run_game: seed pool smaller than the group size");
    pool.resize(static_cast<size_t>(s.group_sizes[p]));
    for (int v : pool)
      if (!raise(v, target)) return game;

    stage = GameStage::main;
    auto count_at_target = [&] {
      long long c = 0;
      for (int v = 0; v < n; ++v)
        if (d.counts[v] == target) ++c;
      return c;
    };
    while (count_at_target() < k) {
      int pick = -1;
      const Configuration& placement = algorithm.configuration();
      for (int v : game.phase_members[p - 1]) {
        if (d.counts[v] < target && placement.counts[v] == 0) {
          pick = v;
          break;
        }
      }
      if (pick < 0)
        throw internal_error(
            "run_game: no free node left to load; a breach should have been "
            "detected already");
      if (!raise(pick, target)) return game;
    }
    std::vector<int>& members = game.phase_members[p];
    for (int v = 0; v < n; ++v)
      if (d.counts[v] == target) members.push_back(v);
    if (static_cast<long long>(members.size()) != k)
      throw internal_error("run_game: phase ended with the wrong member count");
  }
  return game;
}

// Offline costs the construction promises, cross-checked against the solver
// on the recorded run: during the main part of phase p the optimum stays at
// optimal_costs[p], and from phase 1 on every optimal placement moves all k
// resources.
struct PhaseOptimal {
  int phase = 0;
  long long optimal_cost = 0;
  long long optimal_moves = 0;
};

inline std::vector<PhaseOptimal> optimal_cost_trace(const AdversarySchedule& s,
                                                    const GameTranscript& game) {
  std::shared_ptr<const CostModel> model = adversary_cost_model(s, game.n);
  InstanceConfig inst = adversary_instance(s, game.n);
  DemandState d(game.n);
  for (const GameStep& step : game.steps) {
    resmove::apply_demand(d, step.node);
    if (step.phase >= 1 && step.optimal_moves != s.k)
      throw internal_error("optimal_cost_trace: recorded optimal moves != k at t=" +
                           std::to_string(step.t));
    if (step.stage != GameStage::main) continue;
    OfflineSolution sol = optimal_allocation(*model, d, s.k);
    double expected = static_cast<double>(s.optimal_costs[step.phase]);
    if (std::abs(sol.cost - expected) > 1e-9)
      throw internal_error(
          "optimal_cost_trace: solver optimum " + std::to_string(sol.cost) +
          " != scheduled " + std::to_string(expected) + " at t=" +
          std::to_string(step.t));
    if (std::abs(sol.cost - step.optimal_cost) > 1e-9)
      throw internal_error("optimal_cost_trace: recorded optimum mismatch at t=" +
                           std::to_string(step.t));
    if (optimal_movement_cost(inst.initial_placement, sol) != s.k)
      throw internal_error("optimal_cost_trace: canonical optimum moves != k at t=" +
                           std::to_string(step.t));
  }
  std::vector<PhaseOptimal> rows;
  for (int p = 0; p <= s.p_max; ++p)
    rows.push_back({p, s.optimal_costs[p], s.k});
  return rows;
}

}  // namespace resmove
