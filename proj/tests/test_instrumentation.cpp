#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>
#include <vector>

#include "resmove/instrumentation.hpp"
#include "resmove/trace_gen.hpp"

using namespace resmove;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

namespace {

MovementRecord move_rec(int index, long long time, int src, int dst,
                        double improvement) {
  MovementRecord m;
  m.index = index;
  m.time = time;
  m.src = src;
  m.dst = dst;
  m.improvement = improvement;
  return m;
}

MetricsSample sample(long long t, double optimal_cost, long long moves) {
  MetricsSample row;
  row.t = t;
  row.optimal_cost = optimal_cost;
  row.moves = moves;
  return row;
}

HistorySnapshot snap(long long t, long long moves_done, std::vector<int> counts,
                     std::vector<long long> demands) {
  HistorySnapshot s;
  s.t = t;
  s.moves_done = moves_done;
  s.placement.counts = std::move(counts);
  s.demand_counts = std::move(demands);
  return s;
}

InstanceConfig instance(int n, int k, std::vector<int> f0) {
  InstanceConfig inst;
  inst.n = n;
  inst.k = k;
  inst.initial_placement.counts = std::move(f0);
  return inst;
}

std::shared_ptr<const CostModel> shared(CostModel m) {
  return std::make_shared<const CostModel>(std::move(m));
}

void drive(Session& session, TraceKind kind, long long length,
           std::uint64_t seed, long long period = 40) {
  TraceSpec spec;
  spec.kind = kind;
  spec.n = session.instance().n;
  spec.length = length;
  spec.seed = seed;
  spec.period = period;
  run_trace(session, generate_trace(spec));
}

// Structural facts every phase decomposition owes us, checked against its log.
void check_phase_structure(const std::vector<MovementRecord>& log,
                           const std::vector<PhaseRecord>& phases) {
  if (log.empty()) {
    CHECK(phases.empty());
    return;
  }
  REQUIRE(!phases.empty());
  CHECK(phases.front().first_move == 1);
  CHECK(phases.back().last_move == static_cast<int>(log.size()));
  double running = 0.0;
  for (size_t i = 0; i < phases.size(); ++i) {
    const PhaseRecord& p = phases[i];
    CHECK(p.index == static_cast<int>(i) + 1);
    if (i > 0) {
      CHECK(p.first_move == phases[i - 1].last_move + 1);
      CHECK(p.start_time >= phases[i - 1].start_time);
    }
    CHECK(p.move_count == p.last_move - p.first_move + 1);
    CHECK(p.start_time == log[static_cast<size_t>(p.first_move) - 1].time);

    // No move inside the phase drains a node an earlier move of it filled,
    // and the recorded minimum really is the weakest move of the phase.
    double weakest = log[static_cast<size_t>(p.first_move) - 1].improvement;
    std::vector<int> filled;
    for (int m = p.first_move; m <= p.last_move; ++m) {
      const MovementRecord& move = log[static_cast<size_t>(m) - 1];
      weakest = std::min(weakest, move.improvement);
      for (int dst : filled) CHECK(move.src != dst);
      filled.push_back(move.dst);
    }
    CHECK(p.min_improvement == weakest);
    running += p.min_improvement;
    CHECK(p.cumulative_improvement == Approx(running).margin(1e-12));
  }
}

}  // namespace

TEST_CASE("a move draining an earlier destination opens a new phase") {
  // Move 3 takes from node 1, which move 1 filled; move 4 takes from node 3,
  // filled in the previous phase, so it stays in phase 2.
  std::vector<MovementRecord> log = {
      move_rec(1, 1, 0, 1, 3.0),
      move_rec(2, 2, 2, 3, 2.0),
      move_rec(3, 3, 1, 4, 5.0),
      move_rec(4, 4, 3, 0, 4.0),
  };
  std::vector<PhaseRecord> phases = partition_phases(log);
  REQUIRE(phases.size() == 2);

  CHECK(phases[0].index == 1);
  CHECK(phases[0].first_move == 1);
  CHECK(phases[0].last_move == 2);
  CHECK(phases[0].start_time == 1);
  CHECK(phases[0].move_count == 2);
  CHECK(phases[0].min_improvement == 2.0);
  CHECK(phases[0].cumulative_improvement == 2.0);
  CHECK_FALSE(phases[0].slack.has_value());

  CHECK(phases[1].index == 2);
  CHECK(phases[1].first_move == 3);
  CHECK(phases[1].last_move == 4);
  CHECK(phases[1].start_time == 3);
  CHECK(phases[1].move_count == 2);
  CHECK(phases[1].min_improvement == 4.0);
  CHECK(phases[1].cumulative_improvement == 6.0);

  check_phase_structure(log, phases);
}

TEST_CASE("logs without destination reuse form a single phase") {
  std::vector<MovementRecord> log = {
      move_rec(1, 1, 0, 1, 1.0),
      move_rec(2, 3, 0, 2, 0.5),
      move_rec(3, 5, 4, 5, 2.0),
  };
  std::vector<PhaseRecord> phases = partition_phases(log);
  REQUIRE(phases.size() == 1);
  CHECK(phases[0].move_count == 3);
  CHECK(phases[0].min_improvement == 0.5);
  CHECK(phases[0].cumulative_improvement == 0.5);
  check_phase_structure(log, phases);

  CHECK(partition_phases({}).empty());
}

TEST_CASE("back-and-forth moves open a phase per move") {
  std::vector<MovementRecord> log = {
      move_rec(1, 1, 0, 1, 1.5),
      move_rec(2, 2, 1, 0, 2.5),
      move_rec(3, 4, 0, 1, 0.5),
  };
  std::vector<PhaseRecord> phases = partition_phases(log);
  REQUIRE(phases.size() == 3);
  CHECK(phases[0].cumulative_improvement == 1.5);
  CHECK(phases[1].cumulative_improvement == 4.0);
  CHECK(phases[2].cumulative_improvement == 4.5);
  check_phase_structure(log, phases);
}

TEST_CASE("phase slack reads the optimal cost at the phase's first move") {
  std::vector<MovementRecord> log = {
      move_rec(1, 1, 0, 1, 3.0),
      move_rec(2, 3, 1, 2, 2.0),
  };
  MetricsSeries series;
  series.rows = {sample(0, 0.0, 0), sample(1, 1.0, 1), sample(2, 2.0, 1),
                 sample(3, 4.0, 2)};
  GuaranteeParams params{2.0, 1.5};

  std::vector<PhaseRecord> phases = partition_phases(log, series, params);
  REQUIRE(phases.size() == 2);
  REQUIRE(phases[0].slack.has_value());
  CHECK(*phases[0].slack == Approx(1.0 * 1.0 + 1.5));
  REQUIRE(phases[1].slack.has_value());
  CHECK(*phases[1].slack == Approx(1.0 * 4.0 + 1.5));

  // A move whose time has no metrics row cannot be given a slack value.
  std::vector<MovementRecord> orphan = {move_rec(1, 9, 0, 1, 1.0)};
  CHECK_THROWS_AS(partition_phases(orphan, series, params),
                  std::invalid_argument);
}

TEST_CASE("a phase with more moves than resources is flagged") {
  std::vector<MovementRecord> log = {
      move_rec(1, 1, 0, 1, 1.0),
      move_rec(2, 1, 2, 3, 1.0),
      move_rec(3, 2, 4, 5, 1.0),
  };
  std::vector<PhaseRecord> phases = partition_phases(log);
  REQUIRE(phases.size() == 1);

  CHECK(check_phase_move_limit(phases, 3).pass);
  CHECK(check_phase_move_limit({}, 1).pass);

  CheckResult r = check_phase_move_limit(phases, 2);
  CHECK_FALSE(r.pass);
  CHECK_THAT(r.detail, ContainsSubstring("phase 1"));
  CHECK_THAT(r.detail, ContainsSubstring("3 moves"));
}

TEST_CASE("removal costs must stay above the prior phases' improvements") {
  CostModel model = CostModel::covering(3, 3, 20);
  // Two phases: move 2 drains the node move 1 filled. The floor after move 2
  // is phase 1's improvement, 2.0.
  std::vector<MovementRecord> log = {
      move_rec(1, 1, 0, 1, 2.0),
      move_rec(2, 2, 1, 2, 3.0),
  };
  std::vector<PhaseRecord> phases = partition_phases(log);
  REQUIRE(phases.size() == 2);
  CHECK(phases[0].cumulative_improvement == 2.0);

  SECTION("uncovering any occupied node costs at least the floor") {
    std::vector<HistorySnapshot> history = {
        snap(0, 0, {2, 0, 0}, {0, 0, 0}),
        snap(1, 1, {1, 1, 0}, {0, 2, 0}),
        snap(2, 2, {0, 1, 1}, {0, 2, 10}),
    };
    CheckResult r = check_removal_cost_floor(model, history, phases);
    INFO(r.detail);
    CHECK(r.pass);
  }

  SECTION("a corrupted snapshot fails with the offending node") {
    // Node 0 holds one resource over zero demands: uncovering it is free,
    // which is below the floor of 2.
    std::vector<HistorySnapshot> history = {
        snap(2, 2, {1, 1, 1}, {0, 2, 10}),
    };
    CheckResult r = check_removal_cost_floor(model, history, phases);
    CHECK_FALSE(r.pass);
    CHECK_THAT(r.detail, ContainsSubstring("node 0"));
    CHECK_THAT(r.detail, ContainsSubstring("below floor"));
  }

  SECTION("during phase 1 the floor is zero, so anything goes") {
    std::vector<HistorySnapshot> history = {
        snap(1, 1, {2, 1, 0}, {0, 0, 0}),
    };
    CHECK(check_removal_cost_floor(model, history, phases).pass);
  }
}

TEST_CASE("recorded greedy runs satisfy the floor and improvement checks") {
  struct Setup {
    CostModel model;
    GuaranteeParams params;
    TraceKind kind;
    std::uint64_t seed;
  };
  std::vector<Setup> setups;
  setups.push_back({CostModel::covering(6, 3, 400), {1.0, 2.0},
                    TraceKind::uniform, 421});
  setups.push_back({CostModel::fractional(6, 3, 400), {1.0, 1.0},
                    TraceKind::uniform, 99});
  setups.push_back({CostModel::capped(6, 3, 400, {4.0}), {1.0, 2.0},
                    TraceKind::uniform, 7});
  setups.push_back({CostModel::covering(6, 3, 400), {2.0, 1.0},
                    TraceKind::zipf, 12});
  setups.push_back({CostModel::covering(6, 3, 400), {1.0, 2.0},
                    TraceKind::hotspot_shift, 17});

  for (Setup& setup : setups) {
    INFO("family " << family_name(setup.model.family()));
    Session session(shared(std::move(setup.model)),
                    instance(6, 3, {3, 0, 0, 0, 0, 0}), setup.params);
    drive(session, setup.kind, 300, setup.seed);
    REQUIRE(!session.move_log().empty());

    std::vector<PhaseRecord> phases = partition_phases(
        session.move_log(), session.metrics(), session.guarantee());
    check_phase_structure(session.move_log(), phases);
    CHECK(check_phase_move_limit(phases, 3).pass);

    CheckResult floor = check_removal_cost_floor(session);
    INFO(floor.detail);
    CHECK(floor.pass);

    CheckResult bounds = check_improvement_bounds(session);
    INFO(bounds.detail);
    CHECK(bounds.pass);

    // The convenience overloads are just the spelled-out calls.
    CHECK(check_removal_cost_floor(session.model(), session.history(), phases)
              .pass == floor.pass);
  }
}

TEST_CASE("improvement bounds requires slack-annotated phases") {
  Session session(shared(CostModel::covering(6, 3, 400)),
                  instance(6, 3, {3, 0, 0, 0, 0, 0}), {1.0, 2.0});
  drive(session, TraceKind::uniform, 200, 421);
  REQUIRE(!session.move_log().empty());

  std::vector<PhaseRecord> bare = partition_phases(session.move_log());
  CHECK_THROWS_AS(
      check_improvement_bounds(session.model(), session.history(),
                               session.move_log(), bare, session.guarantee(),
                               session.stats(), 3),
      std::invalid_argument);
}

TEST_CASE("tampered improvements trip the two-sided bound") {
  Session session(shared(CostModel::covering(6, 3, 400)),
                  instance(6, 3, {3, 0, 0, 0, 0, 0}), {1.0, 2.0});
  drive(session, TraceKind::uniform, 200, 421);
  REQUIRE(!session.move_log().empty());

  std::vector<MovementRecord> log = session.move_log();
  size_t last = log.size() - 1;
  REQUIRE(log[last].time > 0);

  SECTION("an improvement below slack/distance is flagged") {
    log[last].improvement = 0.0;
    std::vector<PhaseRecord> phases =
        partition_phases(log, session.metrics(), session.guarantee());
    CheckResult r = check_improvement_bounds(session.model(),
                                             session.history(), log, phases,
                                             session.guarantee(),
                                             session.stats(), 3);
    CHECK_FALSE(r.pass);
    CHECK_THAT(r.detail, ContainsSubstring("slack/distance"));
  }

  SECTION("an improvement past the next slack plus the largest jump is flagged") {
    log[last].improvement = 1e6;
    std::vector<PhaseRecord> phases =
        partition_phases(log, session.metrics(), session.guarantee());
    CheckResult r = check_improvement_bounds(session.model(),
                                             session.history(), log, phases,
                                             session.guarantee(),
                                             session.stats(), 3);
    CHECK_FALSE(r.pass);
    CHECK_THAT(r.detail, ContainsSubstring("bound"));
  }
}

TEST_CASE("movement bound validates its parameters") {
  MetricsSeries series;
  series.rows = {sample(0, 0.0, 0)};
  GuaranteeParams params{1.0, 12.0};
  CostModelStats stats{1.0, 0.0};

  BoundParams bad = {};
  bad.ell = 0;
  CHECK_THROWS_AS(check_movement_bound(series, params, bad, 2, stats),
                  std::invalid_argument);
  bad = {};
  bad.epsilon = 0.0;
  CHECK_THROWS_AS(check_movement_bound(series, params, bad, 2, stats),
                  std::invalid_argument);
  bad = {};
  bad.rho = -1.0;
  CHECK_THROWS_AS(check_movement_bound(series, params, bad, 2, stats),
                  std::invalid_argument);
  bad = {};
  bad.slack_constant = 0.0;
  CHECK_THROWS_AS(check_movement_bound(series, params, bad, 2, stats),
                  std::invalid_argument);
}

TEST_CASE("additive movement bound checks moves against eps*S* + C*ell*k") {
  // With k=2, ell=1, rho=1, eps=1 the branch needs beta >= 2*(3*2) = 12.
  MetricsSeries series;
  series.rows = {sample(0, 0.0, 0), sample(1, 1.0, 4), sample(2, 2.0, 6)};
  GuaranteeParams params{1.0, 12.0};
  CostModelStats stats{1.0, 0.0};
  BoundParams bound = {};

  SECTION("too little beta is rejected") {
    GuaranteeParams weak{1.0, 11.0};
    CHECK_THROWS_WITH(check_movement_bound(series, weak, bound, 2, stats),
                      ContainsSubstring("needs beta"));
  }

  SECTION("a generous constant passes and the tightest one is reported") {
    BoundReport report = check_movement_bound(series, params, bound, 2, stats);
    CHECK(report.pass);
    // Worst row is t=2: (6 - 1*2) / (1*2) = 2.
    CHECK(report.tightest_constant == Approx(2.0));
  }

  SECTION("a constant below the tightest fails with the first witness") {
    bound.slack_constant = 1.5;
    BoundReport report = check_movement_bound(series, params, bound, 2, stats);
    CHECK_FALSE(report.pass);
    CHECK(report.tightest_constant == Approx(2.0));
    CHECK_THAT(report.detail, ContainsSubstring("t=2"));
  }

  SECTION("a run without moves passes for any constant") {
    MetricsSeries quiet;
    quiet.rows = {sample(0, 0.0, 0), sample(1, 3.0, 0), sample(2, 7.0, 0)};
    bound.slack_constant = 0.001;
    BoundReport report = check_movement_bound(quiet, params, bound, 2, stats);
    CHECK(report.pass);
    CHECK(report.tightest_constant == 0.0);
  }
}

TEST_CASE("multiplicative movement bound checks the log-shaped budget") {
  GuaranteeParams params{2.0, 1.0};
  CostModelStats stats{1.0, 0.0};
  BoundParams bound = {};

  MetricsSeries series;
  series.rows = {sample(0, 0.5, 50), sample(1, 1.0, 5), sample(2, 4.0, 10)};

  SECTION("alpha must exceed 1 + epsilon and k must be at least 3") {
    GuaranteeParams narrow{1.5, 1.0};
    CHECK_THROWS_WITH(check_movement_bound(series, narrow, bound, 3, stats),
                      ContainsSubstring("alpha"));
    CHECK_THROWS_WITH(check_movement_bound(series, params, bound, 2, stats),
                      ContainsSubstring("k >= 3"));
  }

  SECTION("rows below optimal cost 1 are ignored, the rest are bounded") {
    // Hand evaluation for k=3, alpha=2, beta=1, service_min=0:
    //   mix = tail = log2(3), shape(S*) = 3*(1 + log2(S*) + 2*log2(3)).
    // The t=0 row would dwarf the budget but sits below the S* >= 1 gate.
    BoundReport report = check_movement_bound(series, params, bound, 3, stats);
    CHECK(report.pass);
    CHECK(report.tightest_constant == Approx(0.540255).margin(1e-5));
  }

  SECTION("a constant below the tightest fails") {
    bound.slack_constant = 0.5;
    BoundReport report = check_movement_bound(series, params, bound, 3, stats);
    CHECK_FALSE(report.pass);
    CHECK_THAT(report.detail, ContainsSubstring("t=2"));
  }
}

TEST_CASE("movement bound holds on real runs at desk scale") {
  SECTION("additive branch, covering model") {
    // k=3 with ell=1, rho=1, eps=1 needs beta >= 3*(3*3) = 27.
    Session session(shared(CostModel::covering(6, 3, 400)),
                    instance(6, 3, {3, 0, 0, 0, 0, 0}), {1.0, 27.0});
    drive(session, TraceKind::uniform, 400, 11);
    BoundReport report = check_movement_bound(
        session.metrics(), session.guarantee(), {}, 3, session.stats());
    INFO(report.detail);
    CHECK(report.pass);
    CHECK(report.tightest_constant < 10.0);
  }

  SECTION("multiplicative branch, covering model") {
    Session session(shared(CostModel::covering(6, 3, 400)),
                    instance(6, 3, {3, 0, 0, 0, 0, 0}), {2.0, 1.0});
    drive(session, TraceKind::zipf, 400, 12);
    BoundReport report = check_movement_bound(
        session.metrics(), session.guarantee(), {}, 3, session.stats());
    INFO(report.detail);
    CHECK(report.pass);
    CHECK(report.tightest_constant < 10.0);
  }
}
