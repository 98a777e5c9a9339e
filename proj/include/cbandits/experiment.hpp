#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cbandits/agents.hpp"
#include "cbandits/errors.hpp"
#include "cbandits/model_io.hpp"
#include "cbandits/or_tree.hpp"
#include "cbandits/random.hpp"
#include "cbandits/stats.hpp"

namespace cbandits {

enum class AgentKind : std::uint64_t { covering = 0, direct = 1, propinf = 2 };

inline const char* agent_name(AgentKind kind) {
  switch (kind) {
    case AgentKind::covering: return "covering";
    case AgentKind::direct: return "direct";
    case AgentKind::propinf: return "propinf";
  }
  return "unknown";
}

inline AgentKind agent_from_name(std::string_view name) {
  if (name == "covering") return AgentKind::covering;
  if (name == "direct") return AgentKind::direct;
  if (name == "propinf") return AgentKind::propinf;
  throw BadConfig("unknown agent: " + std::string(name));
}

struct ExperimentConfig {
  std::optional<OrTreeSpec> or_tree;
  std::string model_file;                // alternative to or_tree
  std::vector<std::string> arm_strings;  // required with model_file
  std::vector<AgentKind> agents;
  std::vector<std::uint64_t> horizons;  // ascending
  int repetitions = 1;
  std::uint64_t master_seed = 0;
  std::string out_path;
  int threads = 1;
  bool record_timing = false;

  void validate() const {
    if (or_tree.has_value() == !model_file.empty())
      throw BadConfig("config needs exactly one of or_tree / model file");
    if (!model_file.empty() && arm_strings.empty())
      throw BadConfig("file models need an explicit arm list");
    if (agents.empty()) throw BadConfig("at least one agent required");
    if (horizons.empty()) throw BadConfig("at least one horizon required");
    for (std::size_t k = 1; k < horizons.size(); ++k)
      if (horizons[k] <= horizons[k - 1]) throw BadConfig("horizons must be ascending");
    if (repetitions < 1) throw BadConfig("repetitions must be >= 1");
    if (threads < 1) throw BadConfig("threads must be >= 1");
    if (or_tree) or_tree->validate();
  }
};

/// Config file schema:
///   {"model": {"or_tree": {"height": h, "pi": p, "epsilon": e, "privileged": w}}
///             | {"file": "model.json", "arms": ["01**...", ...]},
///    "agents": ["covering","direct","propinf"], "horizons": [...],
///    "repetitions": R, "master_seed": s, "out": "results.csv",
///    "record_timing": false}
inline ExperimentConfig config_from_json(const nlohmann::json& doc) {
  ExperimentConfig config;
  try {
    const auto& model = doc.at("model");
    if (model.contains("or_tree")) {
      const auto& tree = model.at("or_tree");
      OrTreeSpec spec;
      spec.height = tree.at("height").get<int>();
      spec.base_prob = tree.at("pi").get<double>();
      spec.bonus = tree.at("epsilon").get<double>();
      spec.privileged = tree.value("privileged", 0);
      config.or_tree = spec;
    } else {
      config.model_file = model.at("file").get<std::string>();
      config.arm_strings = model.at("arms").get<std::vector<std::string>>();
    }
    for (const auto& name : doc.at("agents"))
      config.agents.push_back(agent_from_name(name.get<std::string>()));
    config.horizons = doc.at("horizons").get<std::vector<std::uint64_t>>();
    config.repetitions = doc.at("repetitions").get<int>();
    config.master_seed = doc.at("master_seed").get<std::uint64_t>();
    config.out_path = doc.value("out", std::string{});
    config.record_timing = doc.value("record_timing", false);
  } catch (const nlohmann::json::exception& e) {
    throw BadConfig(std::string("malformed config: ") + e.what());
  }
  config.validate();
  return config;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw BadConfig("cannot open config file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw BadConfig(std::string("config file is not valid JSON: ") + e.what());
  }
  return config_from_json(doc);
}

struct BenchmarkInstance {
  CausalModel model;
  ArmSet arms;
};

inline BenchmarkInstance build_instance(const ExperimentConfig& config) {
  if (config.or_tree) {
    OrTree tree = build_or_tree(*config.or_tree);
    return {std::move(tree.model), std::move(tree.arms)};
  }
  CausalModel model = load_model(config.model_file);
  std::vector<Intervention> arms;
  for (const auto& text : config.arm_strings) arms.push_back(Intervention::parse(text));
  return {std::move(model), ArmSet(std::move(arms))};
}

struct RegretRow {
  AgentKind agent = AgentKind::covering;
  std::uint64_t horizon = 0;
  double mean_regret = 0.0;
  double std_err = 0.0;
  int runs = 0;  // successful repetitions
  std::uint64_t wall_ms = 0;
};

struct RunTrace {
  AgentKind agent = AgentKind::covering;
  std::uint64_t horizon = 0;
  int repetition = 0;
  std::uint64_t seed = 0;
  int chosen_index = -1;
  double regret = 0.0;
  bool failed = false;
  std::string error;
};

/// Aggregated sweep results plus the per-run regrets needed for paired
/// comparisons. Rows are agent-major in config order, horizons ascending.
struct RegretReport {
  std::vector<RegretRow> rows;
  std::vector<std::vector<double>> run_regrets;  // [row][repetition], NaN = failed run
  std::vector<RunTrace> traces;                  // canonical (row, repetition) order
  double optimal_mean = 0.0;
  double second_best_mean = 0.0;
};

namespace detail {

inline RunResult dispatch_agent(AgentKind kind, Environment& env, const ArmSet& arms,
                                std::uint64_t horizon, RandomSource& rng) {
  switch (kind) {
    case AgentKind::covering: return covering_interventions(env, arms, horizon, rng);
    case AgentKind::direct: return direct_exploration(env, arms, horizon, rng);
    case AgentKind::propinf: return prop_inf_uniform(env, arms, horizon, rng);
  }
  throw BadConfig("unknown agent kind");
}

}  // namespace detail

/// Runs every (agent, horizon, repetition) cell with an independently seeded
/// stream and aggregates mean/stderr per (agent, horizon). Workers own their
/// environments; results land in preallocated slots and are merged in
/// canonical order, so the report is identical no matter the scheduling.
/// Per-run agent errors are recorded as failed runs and the sweep continues.
inline RegretReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  const BenchmarkInstance instance = build_instance(config);

  std::vector<double> arm_means(instance.arms.arms.size());
  for (std::size_t a = 0; a < instance.arms.arms.size(); ++a)
    arm_means[a] = true_mean(instance.model, instance.arms.arms[a]);
  const std::size_t best_arm = static_cast<std::size_t>(argmax_lowest_index(arm_means));
  const double best = arm_means[best_arm];
  double second = best;  // single arm or a tied maximum means zero gap
  bool found_other = false;
  for (std::size_t a = 0; a < arm_means.size(); ++a) {
    if (a == best_arm) continue;
    if (!found_other || arm_means[a] > second) {
      second = arm_means[a];
      found_other = true;
    }
  }

  RegretReport report;
  report.optimal_mean = best;
  report.second_best_mean = second;

  struct Cell {
    AgentKind agent;
    std::uint64_t horizon;
  };
  std::vector<Cell> cells;
  for (AgentKind agent : config.agents)
    for (std::uint64_t horizon : config.horizons) cells.push_back({agent, horizon});

  const std::size_t repetitions = static_cast<std::size_t>(config.repetitions);
  const std::size_t n_tasks = cells.size() * repetitions;
  std::vector<RunTrace> traces(n_tasks);
  std::vector<std::uint64_t> task_ms(n_tasks, 0);

  std::atomic<std::size_t> next_task{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t task = next_task.fetch_add(1);
      if (task >= n_tasks) return;
      const Cell& cell = cells[task / repetitions];
      const int repetition = static_cast<int>(task % repetitions);

      RunTrace& trace = traces[task];
      trace.agent = cell.agent;
      trace.horizon = cell.horizon;
      trace.repetition = repetition;
      trace.seed = derive_run_seed(config.master_seed, static_cast<std::uint64_t>(cell.agent),
                                   cell.horizon, static_cast<std::uint64_t>(repetition));
      const auto started = std::chrono::steady_clock::now();
      try {
        RandomSource rng(trace.seed);
        Environment env(instance.model);
        const RunResult result =
            detail::dispatch_agent(cell.agent, env, instance.arms, cell.horizon, rng);
        trace.chosen_index = result.chosen_index;
        trace.regret = best - arm_means[static_cast<std::size_t>(result.chosen_index)];
      } catch (const Error& e) {
        trace.failed = true;
        trace.error = e.what();
        trace.regret = std::nan("");
      }
      if (config.record_timing) {
        task_ms[task] = static_cast<std::uint64_t>(
            std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - started)
                .count());
      }
    }
  };

  const int extra_threads = std::min(config.threads - 1, static_cast<int>(n_tasks) - 1);
  std::vector<std::thread> pool;
  for (int t = 0; t < extra_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (std::size_t c = 0; c < cells.size(); ++c) {
    RegretRow row;
    row.agent = cells[c].agent;
    row.horizon = cells[c].horizon;
    std::vector<double> regrets(repetitions, std::nan(""));
    double sum = 0.0;
    int successes = 0;
    for (std::size_t r = 0; r < repetitions; ++r) {
      const RunTrace& trace = traces[c * repetitions + r];
      if (!trace.failed) {
        regrets[r] = trace.regret;
        sum += trace.regret;
        ++successes;
      }
      row.wall_ms += task_ms[c * repetitions + r];
    }
    row.runs = successes;
    if (successes > 0) {
      row.mean_regret = sum / successes;
      if (successes > 1) {
        double ss = 0.0;
        for (double regret : regrets) {
          if (!std::isnan(regret)) {
            const double d = regret - row.mean_regret;
            ss += d * d;
          }
        }
        row.std_err = std::sqrt(ss / (successes - 1)) / std::sqrt(static_cast<double>(successes));
      }
    } else {
      row.mean_regret = std::nan("");
      row.std_err = std::nan("");
    }
    report.rows.push_back(row);
    report.run_regrets.push_back(std::move(regrets));
  }
  report.traces = std::move(traces);
  return report;
}

namespace detail {

inline std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.12g", value);
  return buffer;
}

}  // namespace detail

inline void write_csv(const RegretReport& report, std::ostream& out) {
  out << "agent,T,mean_regret,stderr,runs,wall_ms\n";
  for (const auto& row : report.rows) {
    out << agent_name(row.agent) << ',' << row.horizon << ','
        << detail::format_double(row.mean_regret) << ',' << detail::format_double(row.std_err)
        << ',' << row.runs << ',' << row.wall_ms << '\n';
  }
}

inline std::string csv_string(const RegretReport& report) {
  std::ostringstream out;
  write_csv(report, out);
  return out.str();
}

inline void write_trace_jsonl(const RegretReport& report, std::ostream& out) {
  for (const auto& trace : report.traces) {
    nlohmann::json line{{"agent", agent_name(trace.agent)}, {"T", trace.horizon},
                        {"run", trace.repetition},          {"seed", trace.seed},
                        {"chosen", trace.chosen_index},     {"failed", trace.failed}};
    if (trace.failed) {
      line["error"] = trace.error;
    } else {
      line["regret"] = trace.regret;
    }
    out << line.dump() << '\n';
  }
}

struct AgentSummary {
  AgentKind agent = AgentKind::covering;
  double first_mean = 0.0;
  double final_mean = 0.0;
  bool nonincreasing_within_2se = true;
};

struct Summary {
  std::vector<AgentSummary> agents;
  double gap = 0.0;
};

/// Per-agent trend over ascending horizons: each consecutive mean may exceed
/// its predecessor by at most twice the combined standard error.
inline Summary aggregate(const RegretReport& report) {
  if (report.rows.empty()) throw EmptyReport("no rows to aggregate");
  Summary summary;
  summary.gap = report.optimal_mean - report.second_best_mean;
  for (const auto& row : report.rows) {
    bool known = false;
    for (const auto& entry : summary.agents) known |= entry.agent == row.agent;
    if (!known) summary.agents.push_back({row.agent, 0.0, 0.0, true});
  }
  for (auto& entry : summary.agents) {
    const RegretRow* previous = nullptr;
    for (const auto& row : report.rows) {
      if (row.agent != entry.agent) continue;
      if (previous) {
        const double slack =
            2.0 * std::sqrt(previous->std_err * previous->std_err + row.std_err * row.std_err);
        if (row.mean_regret > previous->mean_regret + slack)
          entry.nonincreasing_within_2se = false;
      } else {
        entry.first_mean = row.mean_regret;
      }
      entry.final_mean = row.mean_regret;
      previous = &row;
    }
  }
  return summary;
}

struct Figure1Check {
  bool covering_nonincreasing = false;
  bool final_below_half_gap = false;
  bool dominates_baselines = false;
  std::vector<std::string> notes;

  bool pass() const {
    return covering_nonincreasing && final_below_half_gap && dominates_baselines;
  }
};

/// The desk-scale Figure-1 acceptance thresholds: (a) the covering agent's
/// mean regret is nonincreasing in T within 2 stderr, (b) its final-horizon
/// mean regret is below gap/2, (c) at every horizon >= compare_from_horizon
/// its mean regret is at most each baseline's, a deficit counting only when
/// the one-sided paired sign test flags it at the given level.
inline Figure1Check check_figure1(const RegretReport& report,
                                  std::uint64_t compare_from_horizon = std::uint64_t{1} << 14,
                                  double alpha = 0.05) {
  Figure1Check check;
  const Summary summary = aggregate(report);

  const AgentSummary* covering = nullptr;
  for (const auto& entry : summary.agents)
    if (entry.agent == AgentKind::covering) covering = &entry;
  if (!covering) throw BadConfig("figure-1 check needs the covering agent");

  check.covering_nonincreasing = covering->nonincreasing_within_2se;
  if (!check.covering_nonincreasing) check.notes.push_back("covering trend increased beyond 2 se");

  const double half_gap = 0.5 * (report.optimal_mean - report.second_best_mean);
  check.final_below_half_gap = covering->final_mean < half_gap;
  if (!check.final_below_half_gap)
    check.notes.push_back("final covering regret " + detail::format_double(covering->final_mean) +
                          " not below gap/2 = " + detail::format_double(half_gap));

  check.dominates_baselines = true;
  for (std::size_t c = 0; c < report.rows.size(); ++c) {
    const auto& covering_row = report.rows[c];
    if (covering_row.agent != AgentKind::covering || covering_row.horizon < compare_from_horizon)
      continue;
    for (std::size_t b = 0; b < report.rows.size(); ++b) {
      const auto& baseline_row = report.rows[b];
      if (baseline_row.agent == AgentKind::covering || baseline_row.horizon != covering_row.horizon)
        continue;
      if (covering_row.mean_regret <= baseline_row.mean_regret) continue;
      // Mean deficit: significant only if the paired sign test agrees.
      int worse = 0, better = 0;
      for (std::size_t r = 0; r < report.run_regrets[c].size(); ++r) {
        const double cov = report.run_regrets[c][r];
        const double base = report.run_regrets[b][r];
        if (std::isnan(cov) || std::isnan(base)) continue;
        if (cov > base) ++worse;
        if (cov < base) ++better;
      }
      if (sign_test_p_greater(worse, better) < alpha) {
        check.dominates_baselines = false;
        check.notes.push_back(std::string("covering worse than ") + agent_name(baseline_row.agent) +
                              " at T=" + std::to_string(covering_row.horizon));
      }
    }
  }
  return check;
}

}  // namespace cbandits
