#pragma once

// Analysis instrumentation over recorded runs. The move log decomposes into
// phases (a phase ends when a move takes a resource back out of a node some
// earlier move in the phase filled). Per phase we track the weakest
// improvement and its running sum; the checkers below verify the structural
// facts the cost-guarantee argument rests on, against the actual history.

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "resmove/core.hpp"
#include "resmove/cost_model.hpp"
#include "resmove/offline.hpp"
#include "resmove/online.hpp"

namespace resmove {

// Checker tolerance for accumulated floating-point error.
inline constexpr double kCheckSlack = 1e-9;

struct PhaseRecord {
  int index = 0;       // 1-based phase number
  int first_move = 0;  // 1-based indices into the move log
  int last_move = 0;
  long long start_time = 0;  // demand time of the phase's first move
  int move_count = 0;
  double min_improvement = 0.0;        // weakest move of the phase
  double cumulative_improvement = 0.0; // sum of min_improvement through here
  std::optional<double> slack;         // (alpha-1) * S*_{start_time} + beta
};

inline std::vector<PhaseRecord> partition_phases(
    const std::vector<MovementRecord>& log) {
  std::vector<PhaseRecord> phases;
  std::vector<bool> filled;  // dst nodes of the current phase
  double running = 0.0;
  for (size_t i = 0; i < log.size(); ++i) {
    const MovementRecord& move = log[i];
    bool reuse = !phases.empty() && move.src < static_cast<int>(filled.size()) &&
                 filled[move.src];
    if (phases.empty() || reuse) {
      if (!phases.empty()) running += phases.back().min_improvement;
      PhaseRecord p;
      p.index = static_cast<int>(phases.size()) + 1;
      p.first_move = move.index;
      p.start_time = move.time;
      p.min_improvement = move.improvement;
      phases.push_back(p);
      filled.assign(filled.size(), false);
    }
    PhaseRecord& p = phases.back();
    p.last_move = move.index;
    ++p.move_count;
    p.min_improvement = std::min(p.min_improvement, move.improvement);
    p.cumulative_improvement = running + p.min_improvement;
    size_t need = static_cast<size_t>(std::max(move.src, move.dst)) + 1;
    if (filled.size() < need) filled.resize(need, false);
    filled[move.dst] = true;
  }
  return phases;
}

namespace detail {

inline double optimal_cost_at(const MetricsSeries& series, long long t) {
  size_t guess = static_cast<size_t>(t);
  if (guess < series.rows.size() && series.rows[guess].t == t)
    return series.rows[guess].optimal_cost;
  for (const MetricsSample& row : series.rows)
    if (row.t == t) return row.optimal_cost;
  throw std::invalid_argument("metrics series has no row for t=" +
                              std::to_string(t));
}

}  // namespace detail

inline std::vector<PhaseRecord> partition_phases(
    const std::vector<MovementRecord>& log, const MetricsSeries& series,
    const GuaranteeParams& params) {
  std::vector<PhaseRecord> phases = partition_phases(log);
  for (PhaseRecord& p : phases)
    p.slack = (params.alpha - 1.0) *
                  detail::optimal_cost_at(series, p.start_time) +
              params.beta;
  return phases;
}

struct CheckResult {
  bool pass = true;
  std::string detail;  // first violation, human readable
};

// No phase can contain more moves than there are resources.
inline CheckResult check_phase_move_limit(const std::vector<PhaseRecord>& phases,
                                          long long k) {
  for (const PhaseRecord& p : phases) {
    if (p.move_count > k) {
      std::ostringstream out;
      out << "phase " << p.index << " has " << p.move_count << " moves > k="
          << k;
      return {false, out.str()};
    }
  }
  return {true, ""};
}

// After any move of phase p, removing a resource from any occupied node must
// cost at least the cumulative improvement through phase p-1; checked at
// every recorded instant against the latest move's phase (the thresholds are
// non-decreasing, so the latest one dominates).
inline CheckResult check_removal_cost_floor(
    const CostModel& model, const std::vector<HistorySnapshot>& history,
    const std::vector<PhaseRecord>& phases) {
  size_t phase_at = 0;  // index into phases of the snapshot's latest move
  for (const HistorySnapshot& snap : history) {
    if (snap.moves_done == 0) continue;
    while (phase_at + 1 < phases.size() &&
           snap.moves_done >= phases[phase_at + 1].first_move)
      ++phase_at;
    if (phases.empty() || snap.moves_done < phases[0].first_move)
      continue;  // defensive; moves_done > 0 implies a phase exists
    double floor =
        phase_at == 0 ? 0.0 : phases[phase_at - 1].cumulative_improvement;
    if (floor <= 0.0) continue;
    for (int v = 0; v < model.nodes(); ++v) {
      int held = snap.placement.counts[v];
      if (held == 0) continue;
      double removal = model.evaluate(v, held - 1, snap.demand_counts[v]) -
                       model.evaluate(v, held, snap.demand_counts[v]);
      if (removal < floor - kCheckSlack) {
        std::ostringstream out;
        out << "t=" << snap.t << " after move " << snap.moves_done << ": node "
            << v << " removal cost " << removal << " below floor " << floor;
        return {false, out.str()};
      }
    }
  }
  return {true, ""};
}

// Two-sided bound on every move's improvement: at least the phase slack
// spread over the distance to the optimum, and strictly below the next
// phase's slack plus the largest single-demand jump.
inline CheckResult check_improvement_bounds(
    const CostModel& model, const std::vector<HistorySnapshot>& history,
    const std::vector<MovementRecord>& log,
    const std::vector<PhaseRecord>& phases, const GuaranteeParams& params,
    const CostModelStats& stats, long long k) {
  for (const PhaseRecord& p : phases)
    if (!p.slack)
      throw std::invalid_argument(
          "check_improvement_bounds: phases lack slack values (partition with "
          "a metrics series)");
  size_t phase_at = 0;
  for (size_t i = 1; i < history.size(); ++i) {
    if (history[i].moves_done != history[i - 1].moves_done + 1) continue;
    long long m = history[i].moves_done;
    const MovementRecord& move = log[static_cast<size_t>(m) - 1];
    while (phase_at + 1 < phases.size() &&
           m >= phases[phase_at + 1].first_move)
      ++phase_at;
    const PhaseRecord& p = phases[phase_at];

    DemandState d(model.nodes());
    d.counts = history[i].demand_counts;
    OfflineSolution opt = optimal_allocation(model, d, k);
    long long distance = chi_distance(history[i - 1].placement,
                                      opt.configuration);
    if (distance > 0) {
      double lower = *p.slack / static_cast<double>(distance);
      if (move.improvement < lower - kCheckSlack) {
        std::ostringstream out;
        out << "move " << m << " (t=" << move.time << ") improves by "
            << move.improvement << " < slack/distance = " << lower;
        return {false, out.str()};
      }
    }

    if (move.time == 0) continue;  // no pre-demand instant exists at t=0
    double next_slack =
        phase_at + 1 < phases.size()
            ? *phases[phase_at + 1].slack
            : (params.alpha - 1.0) * opt.cost + params.beta;
    double upper = next_slack + stats.delta_max;
    if (!(move.improvement < upper)) {
      std::ostringstream out;
      out << "move " << m << " (t=" << move.time << ") improves by "
          << move.improvement << " >= bound " << upper;
      return {false, out.str()};
    }
  }
  return {true, ""};
}

inline CheckResult check_removal_cost_floor(const Session& session) {
  return check_removal_cost_floor(session.model(), session.history(),
                                  partition_phases(session.move_log()));
}

inline CheckResult check_improvement_bounds(const Session& session) {
  return check_improvement_bounds(
      session.model(), session.history(), session.move_log(),
      partition_phases(session.move_log(), session.metrics(),
                       session.guarantee()),
      session.guarantee(), session.stats(), session.instance().k);
}

// ---------------------------------------------------------------------------
// Movement-cost bound checker. Two branches, selected by alpha:
//   alpha == 1 (additive): requires beta >= k * (3*rho*k)^(1/ell) / epsilon,
//     asserts M_t <= epsilon * S_t* + C * ell * k at every t.
//   alpha > 1 (multiplicative): requires alpha >= 1 + epsilon and k >= 3,
//     asserts, wherever S_t* >= 1,
//     M_t <= C * k * (1 + log_a S_t* + min(ln k / ln ln k, log_a k)
//                      + log_a(k / (service_min + beta))).

struct BoundParams {
  int ell = 1;
  double epsilon = 1.0;
  double rho = 1.0;
  double slack_constant = 10.0;  // the C above
};

struct BoundReport {
  bool pass = true;
  double tightest_constant = 0.0;  // smallest C that would have sufficed
  std::string detail;
};

inline BoundReport check_movement_bound(const MetricsSeries& series,
                                        const GuaranteeParams& params,
                                        const BoundParams& bound, long long k,
                                        const CostModelStats& stats) {
  if (bound.ell < 1) throw std::invalid_argument("bound: ell must be >= 1");
  if (!(bound.epsilon > 0)) throw std::invalid_argument("bound: epsilon must be > 0");
  if (!(bound.rho > 0)) throw std::invalid_argument("bound: rho must be > 0");
  if (!(bound.slack_constant > 0))
    throw std::invalid_argument("bound: slack constant must be > 0");

  BoundReport report;
  if (params.alpha == 1.0) {
    double required_beta =
        k * std::pow(3.0 * bound.rho * k, 1.0 / bound.ell) / bound.epsilon;
    if (!(params.beta >= required_beta))
      throw std::invalid_argument(
          "bound: additive branch needs beta >= " + std::to_string(required_beta) +
          ", got " + std::to_string(params.beta));
    double unit = static_cast<double>(bound.ell) * k;
    for (const MetricsSample& row : series.rows) {
      double over = row.moves - bound.epsilon * row.optimal_cost;
      report.tightest_constant =
          std::max(report.tightest_constant, over / unit);
      if (report.pass &&
          !(row.moves <= bound.epsilon * row.optimal_cost +
                             bound.slack_constant * unit)) {
        std::ostringstream out;
        out << "t=" << row.t << ": M=" << row.moves << " exceeds eps*S* + C*ell*k = "
            << bound.epsilon * row.optimal_cost + bound.slack_constant * unit;
        report.pass = false;
        report.detail = out.str();
      }
    }
    return report;
  }

  if (!(params.alpha >= 1.0 + bound.epsilon))
    throw std::invalid_argument(
        "bound: multiplicative branch needs alpha >= 1 + epsilon");
  if (k < 3)
    throw std::invalid_argument("bound: multiplicative branch needs k >= 3");
  double ln_alpha = std::log(params.alpha);
  double kd = static_cast<double>(k);
  double mix = std::min(std::log(kd) / std::log(std::log(kd)),
                        std::log(kd) / ln_alpha);
  double tail = std::log(kd / (stats.service_min + params.beta)) / ln_alpha;
  for (const MetricsSample& row : series.rows) {
    if (row.optimal_cost < 1.0) continue;
    double shape =
        kd * (1.0 + std::log(row.optimal_cost) / ln_alpha + mix + tail);
    if (shape <= 0.0) {
      std::ostringstream out;
      out << "t=" << row.t << ": bound shape is non-positive (" << shape
          << "); no constant can satisfy it";
      return {false, report.tightest_constant, out.str()};
    }
    report.tightest_constant =
        std::max(report.tightest_constant, row.moves / shape);
    if (report.pass && !(row.moves <= bound.slack_constant * shape)) {
      std::ostringstream out;
      out << "t=" << row.t << ": M=" << row.moves << " exceeds C * shape = "
          << bound.slack_constant * shape;
      report.pass = false;
      report.detail = out.str();
    }
  }
  return report;
}

}  // namespace resmove
