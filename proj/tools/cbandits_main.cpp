#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cbandits/cbandits.hpp"

namespace {

using nlohmann::json;

int run_cover(const std::string& model_path, std::uint64_t horizon, std::uint64_t seed,
              bool force_smbn, const std::string& out_path) {
  const cbandits::CausalModel model = cbandits::load_model(model_path);
  cbandits::RandomSource rng(seed);
  const auto kind = force_smbn ? std::optional(cbandits::CoverKind::smbn) : std::nullopt;
  const cbandits::CoverSet cover =
      cbandits::construct_cover(model.graph(), horizon, rng, kind);
  const cbandits::CoverCertificate cert = cbandits::verify_cover(model.graph(), cover);

  json doc;
  doc["kind"] = cover.kind == cbandits::CoverKind::smbn ? "smbn" : "observed";
  doc["k_target"] = cover.k_target;
  doc["attempts"] = cover.attempts;
  auto& list = doc["interventions"] = json::array();
  for (const auto& intervention : cover.interventions) list.push_back(intervention.str());
  doc["certificate"] = {{"covered", cert.covered}, {"missing", cert.missing.size()}};

  if (out_path.empty()) {
    std::cout << doc.dump(2) << '\n';
  } else {
    std::ofstream out(out_path);
    if (!out) throw cbandits::BadConfig("cannot write " + out_path);
    out << doc.dump(2) << '\n';
  }
  std::cerr << "cover: k=" << cover.interventions.size() << " attempts=" << cover.attempts
            << " covered=" << (cert.covered ? "yes" : "no") << '\n';
  return cert.covered ? 0 : 1;
}

int run_simulate(const std::string& model_path, const std::string& arm_text, std::uint64_t draws,
                 std::uint64_t seed, bool print_samples) {
  const cbandits::CausalModel model = cbandits::load_model(model_path);
  const cbandits::Intervention arm = cbandits::Intervention::parse(arm_text);
  if (arm.size() != model.graph().num_vertices())
    throw cbandits::BadConfig("arm length must equal the model's vertex count");

  cbandits::RandomSource rng(seed);
  const int reward = model.graph().reward_vertex();
  std::uint64_t ones = 0;
  for (std::uint64_t k = 0; k < draws; ++k) {
    const cbandits::Assignment z = cbandits::sample_under_do(model, arm, rng);
    ones += z[reward];
    if (print_samples) std::cout << z.str() << '\n';
  }
  json summary{{"arm", arm.str()},
               {"draws", draws},
               {"reward_mean", draws ? static_cast<double>(ones) / draws : 0.0}};
  std::cout << summary.dump() << '\n';
  return 0;
}

int run_bench(const std::string& config_path, const std::string& out_override, int threads,
              bool check, bool timing, const std::string& trace_path) {
  cbandits::ExperimentConfig config = cbandits::load_config(config_path);
  if (!out_override.empty()) config.out_path = out_override;
  if (threads > 0) config.threads = threads;
  if (timing) config.record_timing = true;

  const cbandits::RegretReport report = cbandits::run_experiment(config);
  const std::string csv = cbandits::csv_string(report);
  if (config.out_path.empty()) {
    std::cout << csv;
  } else {
    std::ofstream out(config.out_path);
    if (!out) throw cbandits::BadConfig("cannot write " + config.out_path);
    out << csv;
    std::cerr << "wrote " << config.out_path << '\n';
  }
  if (!trace_path.empty()) {
    std::ofstream out(trace_path);
    if (!out) throw cbandits::BadConfig("cannot write " + trace_path);
    cbandits::write_trace_jsonl(report, out);
  }

  const cbandits::Summary summary = cbandits::aggregate(report);
  std::cerr << "gap=" << summary.gap << '\n';
  for (const auto& agent : summary.agents) {
    std::cerr << cbandits::agent_name(agent.agent) << ": first=" << agent.first_mean
              << " final=" << agent.final_mean
              << (agent.nonincreasing_within_2se ? " trend=nonincreasing" : " trend=increasing")
              << '\n';
  }

  if (check) {
    const cbandits::Figure1Check result = cbandits::check_figure1(report);
    std::cerr << "check: nonincreasing=" << result.covering_nonincreasing
              << " final<gap/2=" << result.final_below_half_gap
              << " dominates=" << result.dominates_baselines << '\n';
    for (const auto& note : result.notes) std::cerr << "  " << note << '\n';
    return result.pass() ? 0 : 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causal bandit simulation and benchmark harness"};
  app.require_subcommand(1);

  auto* cover = app.add_subcommand("cover", "Construct and certify a covering intervention set");
  std::string cover_model, cover_out;
  std::uint64_t cover_horizon = 1024, cover_seed = 0;
  bool cover_smbn = false;
  cover->add_option("--model", cover_model, "model JSON file")->required();
  cover->add_option("--horizon", cover_horizon, "time horizon T")->required();
  cover->add_option("--seed", cover_seed, "construction seed");
  cover->add_flag("--smbn", cover_smbn, "force the c-component subset cover");
  cover->add_option("--out", cover_out, "write the cover JSON here instead of stdout");

  auto* simulate = app.add_subcommand("simulate", "Draw interventional samples from a model");
  std::string sim_model, sim_arm;
  std::uint64_t sim_draws = 1, sim_seed = 0;
  bool sim_print = false;
  simulate->add_option("--model", sim_model, "model JSON file")->required();
  simulate->add_option("--arm", sim_arm, "intervention over {0,1,*}")->required();
  simulate->add_option("--draws", sim_draws, "number of samples")->required();
  simulate->add_option("--seed", sim_seed, "sampling seed");
  simulate->add_flag("--samples", sim_print, "print each assignment");

  auto* bench = app.add_subcommand("bench", "Run a seeded multi-agent regret sweep");
  std::string bench_config, bench_out, bench_trace;
  int bench_threads = 0;
  bool bench_check = false, bench_timing = false;
  bench->add_option("--config", bench_config, "experiment config JSON")->required();
  bench->add_option("--out", bench_out, "override the CSV output path");
  bench->add_option("--threads", bench_threads, "worker threads");
  bench->add_flag("--check", bench_check, "verify the figure-1 thresholds; nonzero exit on failure");
  bench->add_flag("--timing", bench_timing, "record wall_ms per row (breaks byte determinism)");
  bench->add_option("--trace", bench_trace, "write per-run JSON lines here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cover->parsed())
      return run_cover(cover_model, cover_horizon, cover_seed, cover_smbn, cover_out);
    if (simulate->parsed())
      return run_simulate(sim_model, sim_arm, sim_draws, sim_seed, sim_print);
    if (bench->parsed())
      return run_bench(bench_config, bench_out, bench_threads, bench_check, bench_timing,
                       bench_trace);
  } catch (const cbandits::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
