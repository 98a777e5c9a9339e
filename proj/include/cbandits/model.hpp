#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "cbandits/errors.hpp"
#include "cbandits/graph.hpp"
#include "cbandits/intervention.hpp"
#include "cbandits/random.hpp"

namespace cbandits {

/// Unobserved confounder: a Bernoulli root with two or more observed children.
struct LatentVertex {
  double p_one = 0.5;
  std::vector<int> children;
};

/// One bidirected edge per pair of observed co-children of each latent.
inline std::vector<Edge> latent_projection(int n_observed,
                                           const std::vector<LatentVertex>& latents) {
  std::set<Edge> pairs;
  for (const auto& lat : latents) {
    if (lat.children.size() < 2)
      throw LatentSingleChild("latent vertex needs at least two observed children");
    std::set<int> kids;
    for (int c : lat.children) {
      if (c < 0 || c >= n_observed) throw BadModel("latent child out of range");
      if (!kids.insert(c).second) throw BadModel("duplicate latent child");
    }
    for (auto it = kids.begin(); it != kids.end(); ++it) {
      for (auto jt = std::next(it); jt != kids.end(); ++jt) pairs.insert({*it, *jt});
    }
  }
  return {pairs.begin(), pairs.end()};
}

/// Ground-truth Bernoulli network: observed DAG plus latent Bernoulli roots,
/// with one CPT entry P[V_i = 1 | parent assignment] per joint assignment of
/// the full parent set (observed directed parents, then latent parents).
/// Bitmask convention: observed parents in ascending index order occupy the
/// low bits (smallest index is bit 0), latent parents follow in latent-list
/// order. Immutable after construction and shareable across workers.
class CausalModel {
 public:
  CausalModel(int n_observed, std::vector<Edge> directed_edges, int reward_vertex,
              std::vector<LatentVertex> latents, std::vector<std::vector<double>> cpts)
      : graph_(n_observed, std::move(directed_edges), latent_projection(n_observed, latents),
               reward_vertex),
        latents_(std::move(latents)),
        cpts_(std::move(cpts)) {
    const int n = graph_.num_vertices();
    latent_parents_.assign(static_cast<std::size_t>(n), {});
    for (std::size_t k = 0; k < latents_.size(); ++k) {
      const auto& lat = latents_[k];
      if (lat.p_one < 0.0 || lat.p_one > 1.0) throw BadModel("latent marginal outside [0,1]");
      for (int c : lat.children)
        latent_parents_[static_cast<std::size_t>(c)].push_back(static_cast<int>(k));
    }
    if (static_cast<int>(cpts_.size()) != n) throw BadModel("one CPT per observed vertex required");
    for (int v = 0; v < n; ++v) {
      const std::size_t want = std::size_t{1} << num_parents(v);
      const auto& table = cpts_[static_cast<std::size_t>(v)];
      if (table.size() != want) throw BadModel("CPT size must be 2^|Pa(i)|");
      for (double p : table) {
        if (!(p >= 0.0 && p <= 1.0)) throw BadModel("CPT entry outside [0,1]");
      }
    }
  }

  const CausalGraph& graph() const { return graph_; }
  const std::vector<LatentVertex>& latents() const { return latents_; }
  const std::vector<std::vector<double>>& cpts() const { return cpts_; }

  std::span<const int> latent_parents(int v) const {
    return latent_parents_[static_cast<std::size_t>(v)];
  }

  int num_parents(int v) const {
    return static_cast<int>(graph_.parents(v).size() + latent_parents(v).size());
  }

  /// P[V_v = 1 | parents = pa_bits] with the bitmask convention above.
  double prob_one(int v, unsigned pa_bits) const {
    return cpts_[static_cast<std::size_t>(v)][pa_bits];
  }

  /// Families with an algebraic interventional mean (the OR-tree benchmark)
  /// register it here; true_mean dispatches to it when present.
  void set_closed_form_mean(std::function<double(const Intervention&)> fn) {
    closed_form_ = std::move(fn);
  }
  const std::function<double(const Intervention&)>& closed_form_mean() const {
    return closed_form_;
  }

 private:
  CausalGraph graph_;
  std::vector<LatentVertex> latents_;
  std::vector<std::vector<double>> cpts_;
  std::vector<std::vector<int>> latent_parents_;
  std::function<double(const Intervention&)> closed_form_;
};

namespace detail {

/// Packs the realized parent values of v into a CPT index.
inline unsigned pack_parent_bits(const CausalModel& m, int v, const Assignment& z,
                                 std::span<const std::uint8_t> latent_values) {
  unsigned bits = 0;
  int slot = 0;
  for (int p : m.graph().parents(v)) bits |= static_cast<unsigned>(z[p]) << slot++;
  for (int k : m.latent_parents(v))
    bits |= static_cast<unsigned>(latent_values[static_cast<std::size_t>(k)]) << slot++;
  return bits;
}

}  // namespace detail

/// Ancestral sampling under do(I): latents drawn first, then observed vertices
/// in topological order (intervened coordinates forced to I's value). Returns
/// the observed coordinates only.
inline Assignment sample_under_do(const CausalModel& m, const Intervention& intervention,
                                  RandomSource& rng) {
  const int n = m.graph().num_vertices();
  std::vector<std::uint8_t> latent_values(m.latents().size());
  for (std::size_t k = 0; k < m.latents().size(); ++k)
    latent_values[k] = rng.bernoulli(m.latents()[k].p_one) ? 1 : 0;

  Assignment z(n);
  for (int v = 0; v < n; ++v) {
    if (intervention.intervened(v)) {
      z[v] = static_cast<std::uint8_t>(intervention.value(v));
    } else {
      unsigned pa = detail::pack_parent_bits(m, v, z, latent_values);
      z[v] = rng.bernoulli(m.prob_one(v, pa)) ? 1 : 0;
    }
  }
  return z;
}

inline constexpr int kDefaultEnumerationBits = 22;

/// Exact joint marginal P[V_targets = bits | do(I)] by enumerating the free
/// observed vertices and marginalizing the latents. Index convention: bit k of
/// the returned vector's index is the value of targets[k].
inline std::vector<double> interventional_marginal(const CausalModel& m,
                                                   const Intervention& intervention,
                                                   std::span<const int> targets,
                                                   int max_enum_bits = kDefaultEnumerationBits) {
  const int n = m.graph().num_vertices();
  const int n_lat = static_cast<int>(m.latents().size());
  std::vector<int> free_observed;
  for (int v = 0; v < n; ++v)
    if (!intervention.intervened(v)) free_observed.push_back(v);

  const int free_bits = static_cast<int>(free_observed.size()) + n_lat;
  if (free_bits > max_enum_bits)
    throw TooLargeForExactOracle("joint state space exceeds the enumeration cap");

  std::vector<double> acc(std::size_t{1} << targets.size(), 0.0);
  std::vector<std::uint8_t> latent_values(static_cast<std::size_t>(n_lat));
  Assignment z(n);
  for (int v = 0; v < n; ++v)
    if (intervention.intervened(v)) z[v] = static_cast<std::uint8_t>(intervention.value(v));

  const std::uint64_t states = std::uint64_t{1} << free_bits;
  for (std::uint64_t state = 0; state < states; ++state) {
    double prob = 1.0;
    for (int k = 0; k < n_lat; ++k) {
      const int bit = static_cast<int>((state >> k) & 1u);
      latent_values[static_cast<std::size_t>(k)] = static_cast<std::uint8_t>(bit);
      prob *= bit ? m.latents()[static_cast<std::size_t>(k)].p_one
                  : 1.0 - m.latents()[static_cast<std::size_t>(k)].p_one;
    }
    for (std::size_t j = 0; j < free_observed.size(); ++j)
      z[free_observed[j]] = static_cast<std::uint8_t>((state >> (n_lat + j)) & 1u);
    for (std::size_t j = 0; j < free_observed.size() && prob > 0.0; ++j) {
      const int v = free_observed[j];
      const double p1 = m.prob_one(v, detail::pack_parent_bits(m, v, z, latent_values));
      prob *= z[v] ? p1 : 1.0 - p1;
    }
    if (prob == 0.0) continue;
    unsigned idx = 0;
    for (std::size_t k = 0; k < targets.size(); ++k)
      idx |= static_cast<unsigned>(z[targets[k]]) << k;
    acc[idx] += prob;
  }
  return acc;
}

/// Exact expected reward mu(A) = P[V_N = 1 | do(A)]. An intervened reward
/// short-circuits to its assigned value; a registered closed form is used
/// next; otherwise the joint is enumerated (latents marginalized) subject to
/// the state-space cap.
inline double true_mean(const CausalModel& m, const Intervention& intervention,
                        int max_enum_bits = kDefaultEnumerationBits) {
  const int reward = m.graph().reward_vertex();
  if (intervention.intervened(reward)) return intervention.value(reward);
  if (m.closed_form_mean()) return m.closed_form_mean()(intervention);
  const int targets[1] = {reward};
  return interventional_marginal(m, intervention, targets, max_enum_bits)[1];
}

}  // namespace cbandits
