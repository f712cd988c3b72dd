#pragma once

// Glue between the library and files: experiment configs, trace IO, CSV and
// JSON reports, the adversary game runner, and parameter sweeps. Everything
// the CLI does goes through here so tests can drive the exact same paths.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "resmove/adversary.hpp"
#include "resmove/core.hpp"
#include "resmove/cost_model.hpp"
#include "resmove/instrumentation.hpp"
#include "resmove/offline.hpp"
#include "resmove/online.hpp"
#include "resmove/trace_gen.hpp"

namespace resmove {

// Shortest fixed formatting that survives a round trip for the magnitudes we
// emit; keeps CSV output byte-stable across runs of the same binary.
inline std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// Trace files: one decimal node id per line. Blank lines are ignored.

inline std::vector<int> load_trace(std::istream& in, const std::string& name) {
  std::vector<int> trace;
  std::string line;
  long long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    size_t a = line.find_first_not_of(" \t\r");
    if (a == std::string::npos) continue;
    size_t b = line.find_last_not_of(" \t\r");
    std::string token = line.substr(a, b - a + 1);
    try {
      size_t used = 0;
      int v = std::stoi(token, &used);
      if (used != token.size()) throw std::invalid_argument("trailing characters");
      if (v < 0) throw std::invalid_argument("negative node id");
      trace.push_back(v);
    } catch (const std::exception&) {
      throw std::invalid_argument(name + ":" + std::to_string(line_no) +
                                  ": expected a nonnegative node id, got '" +
                                  token + "'");
    }
  }
  return trace;
}

inline std::vector<int> load_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open trace file: " + path);
  return load_trace(in, path);
}

inline void save_trace(std::ostream& out, const std::vector<int>& trace) {
  for (int v : trace) out << v << '\n';
}

// ---------------------------------------------------------------------------
// Experiment config. JSON shape:
//   {
//     "instance": {"n": 20, "k": 5, "f0": [5,0,...]},
//     "model": {...} | "model_file": "model.json",
//     "params": {"alpha": 1.0, "beta": 2.0},
//     "trace": {"file": "t.trace"} | {"generator": {"kind": "zipf", ...}},
//     "bound": {"ell": 1, "epsilon": 1.0, "rho": 1.0, "slack_constant": 10.0}
//   }
// Relative model/trace paths resolve against the config file's directory.

struct ExperimentConfig {
  InstanceConfig instance;
  nlohmann::json model_json;
  GuaranteeParams params;
  std::vector<int> trace;
  std::optional<BoundParams> bound;
};

namespace detail {

inline const nlohmann::json& require_key(const nlohmann::json& j,
                                         const std::string& key,
                                         const std::string& context) {
  if (!j.is_object() || !j.contains(key))
    throw std::invalid_argument("config: missing \"" + key + "\" in " + context);
  return j.at(key);
}

inline std::string resolve_path(const std::string& path,
                                const std::string& base_dir) {
  std::filesystem::path p(path);
  if (p.is_absolute() || base_dir.empty()) return path;
  return (std::filesystem::path(base_dir) / p).string();
}

inline TraceSpec trace_spec_from_json(const nlohmann::json& g, int n) {
  TraceSpec spec;
  spec.kind = trace_kind_from_name(
      require_key(g, "kind", "trace generator").get<std::string>());
  spec.n = n;
  if (g.contains("n") && g.at("n").get<int>() != n)
    throw std::invalid_argument(
        "config: trace generator n disagrees with the instance");
  spec.length = require_key(g, "length", "trace generator").get<long long>();
  if (!g.contains("seed"))
    throw std::invalid_argument("config: trace generator requires a seed");
  spec.seed = g.at("seed").get<std::uint64_t>();
  if (g.contains("exponent")) spec.zipf_exponent = g.at("exponent").get<double>();
  if (g.contains("period")) spec.period = g.at("period").get<long long>();
  if (g.contains("hot_weight")) spec.hot_weight = g.at("hot_weight").get<double>();
  return spec;
}

}  // namespace detail

inline ExperimentConfig parse_experiment_config(const nlohmann::json& j,
                                                const std::string& base_dir) {
  ExperimentConfig cfg;
  const nlohmann::json& inst = detail::require_key(j, "instance", "config");
  cfg.instance.n = detail::require_key(inst, "n", "instance").get<int>();
  cfg.instance.k = detail::require_key(inst, "k", "instance").get<int>();
  cfg.instance.initial_placement.counts =
      detail::require_key(inst, "f0", "instance").get<std::vector<int>>();
  cfg.instance.validate();

  if (j.contains("model") == j.contains("model_file"))
    throw std::invalid_argument(
        "config: provide exactly one of \"model\" and \"model_file\"");
  if (j.contains("model")) {
    cfg.model_json = j.at("model");
  } else {
    std::string path =
        detail::resolve_path(j.at("model_file").get<std::string>(), base_dir);
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open model file: " + path);
    cfg.model_json = nlohmann::json::parse(in);
  }

  const nlohmann::json& params = detail::require_key(j, "params", "config");
  cfg.params.alpha = detail::require_key(params, "alpha", "params").get<double>();
  cfg.params.beta = detail::require_key(params, "beta", "params").get<double>();

  const nlohmann::json& trace = detail::require_key(j, "trace", "config");
  if (trace.contains("file") == trace.contains("generator"))
    throw std::invalid_argument(
        "config: provide exactly one of trace \"file\" and \"generator\"");
  if (trace.contains("file")) {
    cfg.trace = load_trace_file(
        detail::resolve_path(trace.at("file").get<std::string>(), base_dir));
  } else {
    cfg.trace = generate_trace(
        detail::trace_spec_from_json(trace.at("generator"), cfg.instance.n));
  }

  if (j.contains("bound")) {
    const nlohmann::json& b = j.at("bound");
    BoundParams bp;
    if (b.contains("ell")) bp.ell = b.at("ell").get<int>();
    if (b.contains("epsilon")) bp.epsilon = b.at("epsilon").get<double>();
    if (b.contains("rho")) bp.rho = b.at("rho").get<double>();
    if (b.contains("slack_constant"))
      bp.slack_constant = b.at("slack_constant").get<double>();
    cfg.bound = bp;
  }
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  return parse_experiment_config(
      j, std::filesystem::path(path).parent_path().string());
}

// ---------------------------------------------------------------------------
// Running an experiment and reporting on it.

struct CheckVerdicts {
  CheckResult phase_move_limit;
  CheckResult removal_floor;
  CheckResult improvement_bounds;
  std::optional<BoundReport> movement_bound;

  bool all_pass() const {
    return phase_move_limit.pass && removal_floor.pass &&
           improvement_bounds.pass &&
           (!movement_bound || movement_bound->pass);
  }
};

struct ExperimentResult {
  std::unique_ptr<Session> session;
  std::vector<PhaseRecord> phases;
  CheckVerdicts verdicts;
};

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  auto model =
      std::make_shared<const CostModel>(cost_model_from_json(cfg.model_json));
  for (int v : cfg.trace)
    if (v >= cfg.instance.n)
      throw std::invalid_argument("trace node " + std::to_string(v) +
                                  " outside the instance (n = " +
                                  std::to_string(cfg.instance.n) + ")");
  if (static_cast<long long>(cfg.trace.size()) > model->y_max())
    throw std::invalid_argument(
        "trace longer than the model's demand range (length " +
        std::to_string(cfg.trace.size()) + ", y_max " +
        std::to_string(model->y_max()) + ")");

  ExperimentResult result;
  result.session = std::make_unique<Session>(model, cfg.instance, cfg.params);
  run_trace(*result.session, cfg.trace);
  result.phases = partition_phases(result.session->move_log(),
                                   result.session->metrics(), cfg.params);
  result.verdicts.phase_move_limit =
      check_phase_move_limit(result.phases, cfg.instance.k);
  result.verdicts.removal_floor = check_removal_cost_floor(*result.session);
  result.verdicts.improvement_bounds = check_improvement_bounds(*result.session);
  if (cfg.bound)
    result.verdicts.movement_bound =
        check_movement_bound(result.session->metrics(), cfg.params, *cfg.bound,
                             cfg.instance.k, result.session->stats());
  return result;
}

inline void metrics_to_csv(const MetricsSeries& series, std::ostream& out) {
  out << "t,S,Sstar,M,Mstar,phase\n";
  for (const MetricsSample& row : series.rows) {
    out << row.t << ',' << format_double(row.service_cost) << ','
        << format_double(row.optimal_cost) << ',' << row.moves << ','
        << row.optimal_moves << ',' << row.phase << '\n';
  }
}

inline nlohmann::json check_to_json(const CheckResult& c) {
  return {{"pass", c.pass}, {"detail", c.detail}};
}

inline nlohmann::json experiment_report(const ExperimentResult& result) {
  const Session& session = *result.session;
  nlohmann::json phases = nlohmann::json::array();
  for (const PhaseRecord& p : result.phases) {
    nlohmann::json row = {
        {"index", p.index},
        {"first_move", p.first_move},
        {"last_move", p.last_move},
        {"start_time", p.start_time},
        {"move_count", p.move_count},
        {"min_improvement", p.min_improvement},
        {"cumulative_improvement", p.cumulative_improvement},
    };
    if (p.slack)
      row["slack"] = *p.slack;
    else
      row["slack"] = nullptr;
    phases.push_back(std::move(row));
  }

  nlohmann::json checks = {
      {"phase_move_limit", check_to_json(result.verdicts.phase_move_limit)},
      {"removal_floor", check_to_json(result.verdicts.removal_floor)},
      {"improvement_bounds", check_to_json(result.verdicts.improvement_bounds)},
  };
  if (result.verdicts.movement_bound) {
    const BoundReport& b = *result.verdicts.movement_bound;
    checks["movement_bound"] = {{"pass", b.pass},
                                {"tightest_constant", b.tightest_constant},
                                {"detail", b.detail}};
  }

  const MetricsSample& last = session.metrics().rows.back();
  return {
      {"n", session.instance().n},
      {"k", session.instance().k},
      {"alpha", session.guarantee().alpha},
      {"beta", session.guarantee().beta},
      {"delta_max", session.stats().delta_max},
      {"service_min", session.stats().service_min},
      {"final", {{"t", last.t},
                 {"S", last.service_cost},
                 {"Sstar", last.optimal_cost},
                 {"M", last.moves},
                 {"Mstar", last.optimal_moves},
                 {"phase", last.phase}}},
      {"phases", std::move(phases)},
      {"checks", std::move(checks)},
  };
}

// ---------------------------------------------------------------------------
// Adversary game runs.

struct AdversaryRunConfig {
  long long k = 9;
  int n = 27;
  int p_max = 1;
  double alpha = 1.0;
  double beta = 1.0;
  std::string algorithm = "greedy";  // greedy | never-move | oracle-follower
  bool cross_check = false;          // re-solve offline and compare
};

struct AdversaryRunResult {
  AdversarySchedule schedule;
  GameTranscript transcript;
};

inline AdversaryRunResult run_adversary_game(const AdversaryRunConfig& cfg) {
  AdversaryRunResult result;
  result.schedule = build_schedule(cfg.k, cfg.alpha, cfg.beta, cfg.p_max);
  std::shared_ptr<const CostModel> model =
      adversary_cost_model(result.schedule, cfg.n);
  InstanceConfig inst = adversary_instance(result.schedule, cfg.n);

  std::unique_ptr<OnlineAlgorithm> algorithm;
  if (cfg.algorithm == "greedy") {
    algorithm = std::make_unique<SessionAlgorithm>(
        model, inst, GuaranteeParams{cfg.alpha, cfg.beta});
  } else if (cfg.algorithm == "never-move") {
    algorithm = std::make_unique<NeverMoveAlgorithm>(inst.initial_placement);
  } else if (cfg.algorithm == "oracle-follower") {
    algorithm = std::make_unique<OracleFollowerAlgorithm>(model, inst);
  } else {
    throw std::invalid_argument("unknown algorithm: " + cfg.algorithm);
  }

  result.transcript = run_game(result.schedule, *algorithm, cfg.n);
  if (cfg.cross_check && !result.transcript.breached)
    optimal_cost_trace(result.schedule, result.transcript);
  return result;
}

inline void transcript_to_jsonl(const GameTranscript& game, std::ostream& out) {
  for (const GameStep& step : game.steps) {
    nlohmann::json moves = nlohmann::json::array();
    for (const auto& [src, dst] : step.moves)
      moves.push_back({{"src", src}, {"dst", dst}});
    nlohmann::json row = {
        {"t", step.t},
        {"node", step.node},
        {"moves", std::move(moves)},
        {"free_at_threshold", step.free_at_threshold},
        {"phase", step.phase},
        {"S", step.service_cost},
        {"Sstar", step.optimal_cost},
    };
    out << row.dump() << '\n';
  }
}

inline nlohmann::json adversary_report(const AdversaryRunResult& result) {
  const AdversarySchedule& s = result.schedule;
  const GameTranscript& game = result.transcript;
  long long total_moves = 0;
  for (long long m : game.phase_moves) total_moves += m;
  nlohmann::json report = {
      {"k", s.k},
      {"n", game.n},
      {"alpha", s.alpha},
      {"beta", s.beta},
      {"effective_beta", s.effective_beta},
      {"p_max", s.p_max},
      {"group_sizes", s.group_sizes},
      {"thresholds", s.thresholds},
      {"optimal_costs", s.optimal_costs},
      {"demands", static_cast<long long>(game.steps.size())},
      {"phase_moves", game.phase_moves},
      {"total_moves", total_moves},
      {"breached", game.breached},
  };
  if (game.breached) {
    report["breach_time"] = game.breach_time;
    report["breach_phase"] = game.breach_phase;
    report["breach_detail"] = game.breach_detail;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Sweeps: run the base experiment across a grid of alpha/beta/seed values.
// JSON shape: {"base": <experiment config>, "grid": {"alpha": [...],
// "beta": [...], "seed": [...]}}; absent axes keep the base value.

struct SweepCell {
  double alpha = 0.0;
  double beta = 0.0;
  std::optional<std::uint64_t> seed;
  std::string status;  // pass | fail | rejected
  std::optional<long long> final_moves;
  std::optional<double> final_optimal_cost;
  std::optional<double> tightest_constant;
};

inline std::vector<SweepCell> run_sweep(const nlohmann::json& config,
                                        const std::string& base_dir) {
  const nlohmann::json& base = detail::require_key(config, "base", "sweep");
  const nlohmann::json& grid = detail::require_key(config, "grid", "sweep");

  std::vector<double> alphas, betas;
  std::vector<std::optional<std::uint64_t>> seeds;
  if (grid.contains("alpha"))
    alphas = grid.at("alpha").get<std::vector<double>>();
  else
    alphas.push_back(detail::require_key(
        detail::require_key(base, "params", "base config"), "alpha", "params")
        .get<double>());
  if (grid.contains("beta"))
    betas = grid.at("beta").get<std::vector<double>>();
  else
    betas.push_back(base.at("params").at("beta").get<double>());
  if (grid.contains("seed")) {
    for (std::uint64_t s : grid.at("seed").get<std::vector<std::uint64_t>>())
      seeds.push_back(s);
    const nlohmann::json& trace = detail::require_key(base, "trace", "base config");
    if (!trace.contains("generator"))
      throw std::invalid_argument(
          "sweep: a seed grid needs a generator trace in the base config");
  } else {
    seeds.push_back(std::nullopt);
  }
  if (alphas.empty() || betas.empty() || seeds.empty())
    throw std::invalid_argument("sweep: empty grid axis");

  // Shake out malformed configs before the grid loop; past this point a
  // per-cell failure can only mean the (alpha, beta) pair was rejected.
  parse_experiment_config(base, base_dir);

  std::vector<SweepCell> cells;
  for (double alpha : alphas) {
    for (double beta : betas) {
      for (const std::optional<std::uint64_t>& seed : seeds) {
        nlohmann::json patched = base;
        patched["params"]["alpha"] = alpha;
        patched["params"]["beta"] = beta;
        if (seed) patched["trace"]["generator"]["seed"] = *seed;

        SweepCell cell;
        cell.alpha = alpha;
        cell.beta = beta;
        cell.seed = seed;
        try {
          ExperimentConfig cfg = parse_experiment_config(patched, base_dir);
          ExperimentResult result = run_experiment(cfg);
          const MetricsSample& last = result.session->metrics().rows.back();
          cell.final_moves = last.moves;
          cell.final_optimal_cost = last.optimal_cost;
          if (result.verdicts.movement_bound)
            cell.tightest_constant =
                result.verdicts.movement_bound->tightest_constant;
          cell.status = result.verdicts.all_pass() ? "pass" : "fail";
        } catch (const std::invalid_argument&) {
          // The (alpha, beta) pair fails the acceptance condition for this
          // model; record the cell instead of aborting the sweep.
          cell.status = "rejected";
        }
        cells.push_back(std::move(cell));
      }
    }
  }
  return cells;
}

inline void sweep_to_csv(const std::vector<SweepCell>& cells, std::ostream& out) {
  out << "alpha,beta,seed,final_M,final_Sstar,tightest_C,status\n";
  for (const SweepCell& c : cells) {
    out << format_double(c.alpha) << ',' << format_double(c.beta) << ',';
    if (c.seed) out << *c.seed;
    out << ',';
    if (c.final_moves) out << *c.final_moves;
    out << ',';
    if (c.final_optimal_cost) out << format_double(*c.final_optimal_cost);
    out << ',';
    if (c.tightest_constant) out << format_double(*c.tightest_constant);
    out << ',' << c.status << '\n';
  }
}

}  // namespace resmove
