// Command-line front end. Exit codes: 0 all checks passed, 1 a verdict
// failed (guarantee breach, axiom violation, oracle mismatch, bound
// violation), 2 bad usage or configuration, 3 internal invariant broken.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "resmove/experiment.hpp"

namespace {

void write_output(const std::string& path,
                  const std::function<void(std::ostream&)>& emit) {
  if (path.empty()) {
    emit(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open output file: " + path);
  emit(out);
}

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  return nlohmann::json::parse(in);
}

int cmd_simulate(const std::string& config_path, const std::string& metrics_path,
                 const std::string& report_path) {
  resmove::ExperimentConfig cfg = resmove::load_experiment_config(config_path);
  resmove::ExperimentResult result = resmove::run_experiment(cfg);
  if (!metrics_path.empty())
    write_output(metrics_path, [&](std::ostream& out) {
      resmove::metrics_to_csv(result.session->metrics(), out);
    });
  write_output(report_path, [&](std::ostream& out) {
    out << resmove::experiment_report(result).dump(2) << '\n';
  });
  return result.verdicts.all_pass() ? 0 : 1;
}

int cmd_adversary(const resmove::AdversaryRunConfig& cfg,
                  const std::string& transcript_path,
                  const std::string& report_path) {
  resmove::AdversaryRunResult result = resmove::run_adversary_game(cfg);
  if (!transcript_path.empty())
    write_output(transcript_path, [&](std::ostream& out) {
      resmove::transcript_to_jsonl(result.transcript, out);
    });
  write_output(report_path, [&](std::ostream& out) {
    out << resmove::adversary_report(result).dump(2) << '\n';
  });
  return result.transcript.breached ? 1 : 0;
}

nlohmann::json witness_to_json(const resmove::AxiomWitness& w) {
  return {{"axiom", w.axiom}, {"v", w.v},     {"x", w.x},
          {"y", w.y},         {"lhs", w.lhs}, {"rhs", w.rhs}};
}

int cmd_verify_model(const std::string& model_path, long long x_bound,
                     long long y_bound) {
  resmove::CostModel model =
      resmove::cost_model_from_json(load_json_file(model_path));
  if (x_bound == 0) x_bound = model.x_max();
  if (y_bound == 0) y_bound = model.y_max();
  resmove::PropertyReport report =
      resmove::check_properties(model, x_bound, y_bound);

  nlohmann::json out = {
      {"family", resmove::family_name(model.family())},
      {"n", model.nodes()},
      {"x_bound", x_bound},
      {"y_bound", y_bound},
      {"monotone_resources", report.monotone_resources},
      {"monotone_demands", report.monotone_demands},
      {"diminishing_returns", report.diminishing_returns},
      {"marginal_demand_monotone", report.marginal_demand_monotone},
      {"all_ok", report.all_ok()},
      {"delta_max", resmove::delta_max(model, y_bound)},
  };
  nlohmann::json witnesses = nlohmann::json::array();
  for (const resmove::AxiomWitness& w : report.witnesses)
    witnesses.push_back(witness_to_json(w));
  out["witnesses"] = std::move(witnesses);
  std::cout << out.dump(2) << '\n';
  return report.all_ok() ? 0 : 1;
}

int cmd_oracle_check(const std::string& model_path, long long k, int trials,
                     long long max_demands, std::uint64_t seed) {
  auto model = std::make_shared<const resmove::CostModel>(
      resmove::cost_model_from_json(load_json_file(model_path)));
  if (max_demands > model->y_max())
    throw std::invalid_argument("oracle-check: max demands exceeds the model's y_max");
  int n = model->nodes();
  std::mt19937_64 rng(seed);
  double max_gap = 0.0;
  long long comparisons = 0;

  for (int trial = 0; trial < trials; ++trial) {
    long long count = static_cast<long long>(
        resmove::detail::unit_double(rng) * static_cast<double>(max_demands + 1));
    if (count > max_demands) count = max_demands;
    resmove::DemandState demands(n);
    resmove::IncrementalSolver incremental(model, k);
    resmove::OfflineSolution scratch = resmove::optimal_allocation(*model, demands, k);

    for (long long i = 0; i < count; ++i) {
      int node = resmove::detail::uniform_node(rng, n);
      resmove::apply_demand(demands, node);
      incremental.apply_demand(node);
      scratch = resmove::optimal_allocation(*model, demands, k);
      if (!(incremental.optimal_configuration() == scratch.configuration)) {
        std::cout << "oracle-check: incremental and from-scratch allocations "
                     "disagree on trial "
                  << trial << '\n';
        return 1;
      }
      max_gap = std::max(max_gap,
                         std::abs(incremental.optimal_cost() - scratch.cost));
      ++comparisons;
    }

    resmove::OfflineSolution brute =
        resmove::brute_force_allocation(*model, demands, k);
    double gap = std::abs(scratch.cost - brute.cost);
    max_gap = std::max(max_gap, gap);
    ++comparisons;
    if (gap > 1e-9) {
      std::cout << "oracle-check: greedy cost " << scratch.cost
                << " != exhaustive cost " << brute.cost << " on trial " << trial
                << '\n';
      return 1;
    }
  }

  nlohmann::json out = {{"trials", trials},
                        {"comparisons", comparisons},
                        {"max_cost_gap", max_gap},
                        {"pass", true}};
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_path) {
  nlohmann::json config = load_json_file(config_path);
  std::string base_dir =
      std::filesystem::path(config_path).parent_path().string();
  std::vector<resmove::SweepCell> cells = resmove::run_sweep(config, base_dir);
  write_output(out_path,
               [&](std::ostream& out) { resmove::sweep_to_csv(cells, out); });
  for (const resmove::SweepCell& cell : cells)
    if (cell.status == "fail") return 1;
  return 0;
}

int cmd_gen_trace(const resmove::TraceSpec& spec, const std::string& out_path) {
  std::vector<int> trace = resmove::generate_trace(spec);
  write_output(out_path,
               [&](std::ostream& out) { resmove::save_trace(out, trace); });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online resource movement: simulation, verification, adversary"};
  app.require_subcommand(1);

  // simulate
  std::string sim_config, sim_metrics, sim_report;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Run the online algorithm on a configured instance");
  simulate->add_option("--config", sim_config, "experiment config JSON")
      ->required();
  simulate->add_option("--metrics", sim_metrics, "write per-step metrics CSV here");
  simulate->add_option("--report", sim_report, "write the run report here (default stdout)");

  // adversary
  resmove::AdversaryRunConfig adv;
  int adv_n = 0;
  std::string adv_transcript, adv_report;
  CLI::App* adversary = app.add_subcommand(
      "adversary", "Play the adaptive demand generator against an algorithm");
  adversary->add_option("--k", adv.k, "number of resources (>= 9)")->required();
  adversary->add_option("--n", adv_n, "number of nodes (default 3k)");
  adversary->add_option("--p-max", adv.p_max, "phases after the opening one")
      ->default_val(1);
  adversary->add_option("--alpha", adv.alpha, "claimed multiplicative factor")
      ->default_val(1.0);
  adversary->add_option("--beta", adv.beta, "claimed additive slack")
      ->default_val(1.0);
  adversary
      ->add_option("--algorithm", adv.algorithm,
                   "greedy | never-move | oracle-follower")
      ->default_val("greedy");
  adversary->add_flag("--cross-check", adv.cross_check,
                      "re-solve offline optima and verify the schedule");
  adversary->add_option("--transcript", adv_transcript, "write JSONL transcript here");
  adversary->add_option("--report", adv_report, "write the game report here (default stdout)");

  // verify-model
  std::string vm_model;
  long long vm_x_bound = 0, vm_y_bound = 0;
  CLI::App* verify = app.add_subcommand(
      "verify-model", "Check the structural properties of a cost model");
  verify->add_option("--model", vm_model, "cost model JSON")->required();
  verify->add_option("--x-bound", vm_x_bound, "resource range to scan (default x_max)");
  verify->add_option("--y-bound", vm_y_bound, "demand range to scan (default y_max)");

  // oracle-check
  std::string oc_model;
  long long oc_k = 0, oc_max_demands = 6;
  int oc_trials = 100;
  std::uint64_t oc_seed = 0;
  CLI::App* oracle = app.add_subcommand(
      "oracle-check", "Cross-check the fast solver against exhaustive search");
  oracle->add_option("--model", oc_model, "cost model JSON")->required();
  oracle->add_option("--k", oc_k, "number of resources")->required();
  oracle->add_option("--trials", oc_trials, "random demand sets to try")
      ->default_val(100);
  oracle->add_option("--max-demands", oc_max_demands, "demands per trial at most")
      ->default_val(6);
  oracle->add_option("--seed", oc_seed, "RNG seed")->required();

  // sweep
  std::string sw_config, sw_out;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "Run an experiment across a grid of parameters");
  sweep->add_option("--config", sw_config, "sweep config JSON")->required();
  sweep->add_option("--out", sw_out, "write the summary CSV here (default stdout)");

  // gen-trace
  resmove::TraceSpec spec;
  std::string gt_kind, gt_out;
  CLI::App* gen = app.add_subcommand("gen-trace", "Generate a demand trace");
  gen->add_option("--kind", gt_kind, "uniform | zipf | hotspot-shift")->required();
  gen->add_option("--n", spec.n, "number of nodes")->required();
  gen->add_option("--length", spec.length, "number of demands")->required();
  gen->add_option("--seed", spec.seed, "RNG seed")->required();
  gen->add_option("--exponent", spec.zipf_exponent, "zipf exponent")
      ->default_val(1.0);
  gen->add_option("--period", spec.period, "demands before the hot node shifts")
      ->default_val(1);
  gen->add_option("--hot-weight", spec.hot_weight, "probability of the hot node")
      ->default_val(0.9);
  gen->add_option("--out", gt_out, "write the trace here (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*simulate) return cmd_simulate(sim_config, sim_metrics, sim_report);
    if (*adversary) {
      if (adv_n == 0) adv_n = static_cast<int>(3 * adv.k);
      adv.n = adv_n;
      return cmd_adversary(adv, adv_transcript, adv_report);
    }
    if (*verify) return cmd_verify_model(vm_model, vm_x_bound, vm_y_bound);
    if (*oracle)
      return cmd_oracle_check(oc_model, oc_k, oc_trials, oc_max_demands, oc_seed);
    if (*sweep) return cmd_sweep(sw_config, sw_out);
    if (*gen) {
      spec.kind = resmove::trace_kind_from_name(gt_kind);
      return cmd_gen_trace(spec, gt_out);
    }
  } catch (const resmove::internal_error& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
