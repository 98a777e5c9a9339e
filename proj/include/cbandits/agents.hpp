#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cbandits/covering.hpp"
#include "cbandits/errors.hpp"
#include "cbandits/estimation.hpp"
#include "cbandits/model.hpp"
#include "cbandits/random.hpp"

namespace cbandits {

/// The target set of interventions among which a near-optimal one must be
/// returned. Exploration interventions need not belong to it.
struct ArmSet {
  std::vector<Intervention> arms;

  explicit ArmSet(std::vector<Intervention> a) : arms(std::move(a)) {
    if (arms.empty()) throw BadConfig("arm set must be nonempty");
  }
};

/// Sampling interface between an agent and the hidden ground-truth model. The
/// graph structure is public; the mechanisms are reachable only through
/// intervene-and-observe. Counts every draw.
class Environment {
 public:
  explicit Environment(const CausalModel& model) : model_(&model) {}

  const CausalGraph& graph() const { return model_->graph(); }

  Assignment intervene(const Intervention& intervention, RandomSource& rng) {
    ++draws_;
    return sample_under_do(*model_, intervention, rng);
  }

  std::uint64_t draws_used() const { return draws_; }

 private:
  const CausalModel* model_;
  std::uint64_t draws_ = 0;
};

struct RunResult {
  int chosen_index = 0;
  Intervention chosen;
  std::vector<double> muhat_per_arm;
  std::uint64_t rounds_used = 0;
};

/// Ties break to the lowest index, keeping agent outputs deterministic.
inline int argmax_lowest_index(std::span<const double> values) {
  int best = 0;
  for (int k = 1; k < static_cast<int>(values.size()); ++k) {
    if (values[static_cast<std::size_t>(k)] > values[static_cast<std::size_t>(best)]) best = k;
  }
  return best;
}

namespace detail {

inline void check_arms(const ArmSet& arms, const CausalGraph& g) {
  for (const auto& arm : arms.arms) {
    if (arm.size() != g.num_vertices()) throw BadConfig("arm length must equal vertex count");
  }
}

inline RunResult pick_by_muhat(const ArmSet& arms, std::vector<double> muhat,
                               std::uint64_t rounds) {
  RunResult result;
  result.chosen_index = argmax_lowest_index(muhat);
  result.chosen = arms.arms[static_cast<std::size_t>(result.chosen_index)];
  result.muhat_per_arm = std::move(muhat);
  result.rounds_used = rounds;
  return result;
}

}  // namespace detail

/// Covering-interventions agent: builds a certified covering set, spends the
/// whole horizon replaying it (remainder rounds go round-robin from the first
/// intervention), estimates every conditional from the attributed samples and
/// returns the arm with the highest plug-in mean. Graphs with bidirected
/// edges route to the SMBN cover and the c-component estimator; force_kind
/// overrides the routing.
inline RunResult covering_interventions(Environment& env, const ArmSet& arms, std::uint64_t horizon,
                                        RandomSource& rng,
                                        std::optional<CoverKind> force_kind = std::nullopt) {
  const CausalGraph& g = env.graph();
  detail::check_arms(arms, g);

  const CoverSet cover = construct_cover(g, horizon, rng, force_kind);
  const std::uint64_t k = cover.interventions.size();
  if (horizon < k) throw HorizonTooSmall("horizon is smaller than the covering set");

  SampleStore store = cover.kind == CoverKind::smbn
                          ? SampleStore(g, std::span<const Intervention>(arms.arms))
                          : SampleStore(g);
  const std::uint64_t base_rounds = horizon / k;
  const std::uint64_t extra = horizon % k;
  for (std::uint64_t idx = 0; idx < k; ++idx) {
    const Intervention& intervention = cover.interventions[idx];
    const int plan = store.ensure_plan(intervention);
    const std::uint64_t rounds = base_rounds + (idx < extra ? 1 : 0);
    for (std::uint64_t r = 0; r < rounds; ++r)
      store.record_with_plan(plan, env.intervene(intervention, rng));
  }

  const PluginTables tables = store.finalize();
  std::vector<double> muhat(arms.arms.size());
  for (std::size_t a = 0; a < arms.arms.size(); ++a)
    muhat[a] = plugin_mean(tables, g, arms.arms[a]);
  return detail::pick_by_muhat(arms, std::move(muhat), horizon);
}

/// Baseline: split the horizon across the arms and keep each arm's empirical
/// reward mean.
inline RunResult direct_exploration(Environment& env, const ArmSet& arms, std::uint64_t horizon,
                                    RandomSource& rng) {
  const CausalGraph& g = env.graph();
  detail::check_arms(arms, g);
  const std::uint64_t n_arms = arms.arms.size();
  if (horizon < n_arms) throw HorizonTooSmall("horizon is smaller than the arm set");

  const int reward = g.reward_vertex();
  const std::uint64_t base_rounds = horizon / n_arms;
  const std::uint64_t extra = horizon % n_arms;
  std::vector<double> muhat(arms.arms.size(), 0.0);
  for (std::uint64_t a = 0; a < n_arms; ++a) {
    const std::uint64_t rounds = base_rounds + (a < extra ? 1 : 0);
    std::uint64_t ones = 0;
    for (std::uint64_t r = 0; r < rounds; ++r)
      ones += env.intervene(arms.arms[a], rng)[reward];
    muhat[a] = static_cast<double>(ones) / static_cast<double>(rounds);
  }
  return detail::pick_by_muhat(arms, std::move(muhat), horizon);
}

/// Propagating-inference baseline, uniform-sampling variant: the horizon is
/// split across the arms and every sample is pooled observationally, i.e.
/// each un-intervened vertex is credited under its realized parent values
/// (the defining contrast with the covering attribution rule), then plug-in
/// estimation as usual.
inline RunResult prop_inf_uniform(Environment& env, const ArmSet& arms, std::uint64_t horizon,
                                  RandomSource& rng) {
  const CausalGraph& g = env.graph();
  detail::check_arms(arms, g);
  const std::uint64_t n_arms = arms.arms.size();
  if (horizon < n_arms) throw HorizonTooSmall("horizon is smaller than the arm set");

  SampleStore store(g);
  const std::uint64_t base_rounds = horizon / n_arms;
  const std::uint64_t extra = horizon % n_arms;
  for (std::uint64_t a = 0; a < n_arms; ++a) {
    const std::uint64_t rounds = base_rounds + (a < extra ? 1 : 0);
    for (std::uint64_t r = 0; r < rounds; ++r)
      store.record_observational(arms.arms[a], env.intervene(arms.arms[a], rng));
  }

  const PluginTables tables = store.finalize();
  std::vector<double> muhat(arms.arms.size());
  for (std::size_t a = 0; a < arms.arms.size(); ++a)
    muhat[a] = plugin_mean(tables, g, arms.arms[a]);
  return detail::pick_by_muhat(arms, std::move(muhat), horizon);
}

/// Single-run simple regret: max_A mu(A) minus mu(chosen).
inline double simple_regret(const CausalModel& model, const Intervention& chosen,
                            const ArmSet& arms) {
  double best = 0.0;
  bool first = true;
  for (const auto& arm : arms.arms) {
    const double mu = true_mean(model, arm);
    if (first || mu > best) best = mu;
    first = false;
  }
  return best - true_mean(model, chosen);
}

}  // namespace cbandits
