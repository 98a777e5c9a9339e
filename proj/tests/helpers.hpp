#pragma once

#include <vector>

#include "cbandits/cbandits.hpp"

namespace cbandits::testing {

/// Random fully observed model: DAG by construction (parents precede
/// children), in-degree capped, CPT entries bounded away from {0,1} so every
/// conditional is well defined.
inline CausalModel random_observed_model(RandomSource& rng, int min_n, int max_n, int max_d) {
  const int n = min_n + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_n - min_n + 1)));
  std::vector<Edge> edges;
  for (int child = 1; child < n; ++child) {
    const int want = static_cast<int>(rng.below(static_cast<std::uint64_t>(
        std::min(max_d, child) + 1)));
    std::vector<int> pool(static_cast<std::size_t>(child));
    for (int k = 0; k < child; ++k) pool[static_cast<std::size_t>(k)] = k;
    for (int k = 0; k < want; ++k) {
      const std::size_t pick =
          static_cast<std::size_t>(k) + rng.below(pool.size() - static_cast<std::size_t>(k));
      std::swap(pool[static_cast<std::size_t>(k)], pool[pick]);
      edges.push_back({pool[static_cast<std::size_t>(k)], child});
    }
  }
  std::vector<std::vector<double>> cpts(static_cast<std::size_t>(n));
  std::vector<int> in_degree(static_cast<std::size_t>(n), 0);
  for (const auto& [p, c] : edges) {
    (void)p;
    ++in_degree[static_cast<std::size_t>(c)];
  }
  for (int v = 0; v < n; ++v) {
    const std::size_t rows = std::size_t{1} << in_degree[static_cast<std::size_t>(v)];
    cpts[static_cast<std::size_t>(v)].resize(rows);
    for (auto& p : cpts[static_cast<std::size_t>(v)]) p = 0.05 + 0.9 * rng.uniform01();
  }
  return CausalModel(n, std::move(edges), n - 1, {}, std::move(cpts));
}

/// Random latent-root model: disjoint latent child groups of size 2..3 keep
/// every c-component at size <= 3.
inline CausalModel random_latent_model(RandomSource& rng, int min_n, int max_n, int max_d) {
  const int n = min_n + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_n - min_n + 1)));
  std::vector<Edge> edges;
  for (int child = 1; child < n; ++child) {
    const int want = static_cast<int>(rng.below(static_cast<std::uint64_t>(
        std::min(max_d, child) + 1)));
    std::vector<int> pool(static_cast<std::size_t>(child));
    for (int k = 0; k < child; ++k) pool[static_cast<std::size_t>(k)] = k;
    for (int k = 0; k < want; ++k) {
      const std::size_t pick =
          static_cast<std::size_t>(k) + rng.below(pool.size() - static_cast<std::size_t>(k));
      std::swap(pool[static_cast<std::size_t>(k)], pool[pick]);
      edges.push_back({pool[static_cast<std::size_t>(k)], child});
    }
  }

  std::vector<LatentVertex> latents;
  std::vector<int> shuffled(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) shuffled[static_cast<std::size_t>(v)] = v;
  for (std::size_t k = 0; k + 1 < shuffled.size(); ++k) {
    const std::size_t pick = k + rng.below(shuffled.size() - k);
    std::swap(shuffled[k], shuffled[pick]);
  }
  std::size_t cursor = 0;
  const int n_groups = 1 + static_cast<int>(rng.below(2));
  for (int g = 0; g < n_groups; ++g) {
    const std::size_t group = 2 + rng.below(2);
    if (cursor + group > shuffled.size()) break;
    LatentVertex lat;
    lat.p_one = 0.2 + 0.6 * rng.uniform01();
    for (std::size_t k = 0; k < group; ++k) lat.children.push_back(shuffled[cursor++]);
    std::sort(lat.children.begin(), lat.children.end());
    latents.push_back(std::move(lat));
  }

  std::vector<int> parent_count(static_cast<std::size_t>(n), 0);
  for (const auto& [p, c] : edges) {
    (void)p;
    ++parent_count[static_cast<std::size_t>(c)];
  }
  for (const auto& lat : latents)
    for (int c : lat.children) ++parent_count[static_cast<std::size_t>(c)];

  std::vector<std::vector<double>> cpts(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) {
    const std::size_t rows = std::size_t{1} << parent_count[static_cast<std::size_t>(v)];
    cpts[static_cast<std::size_t>(v)].resize(rows);
    for (auto& p : cpts[static_cast<std::size_t>(v)]) p = 0.1 + 0.8 * rng.uniform01();
  }
  return CausalModel(n, std::move(edges), n - 1, std::move(latents), std::move(cpts));
}

/// Random intervention with independent per-coordinate set probability.
inline Intervention random_intervention(RandomSource& rng, int n, double set_prob,
                                        bool keep_reward_free = true) {
  Intervention out(n);
  for (int v = 0; v < n; ++v) {
    if (keep_reward_free && v == n - 1) continue;
    if (rng.uniform01() < set_prob) out.set(v, rng.bernoulli(0.5) ? 1 : 0);
  }
  return out;
}

/// Random observed-mode plug-in tables (valid probabilities, not estimates).
inline PluginTables random_tables(RandomSource& rng, const CausalGraph& g) {
  PluginTables tables;
  tables.mode = StoreMode::observed;
  tables.vertex_probs.resize(static_cast<std::size_t>(g.num_vertices()));
  for (int v = 0; v < g.num_vertices(); ++v) {
    const std::size_t rows = std::size_t{1} << g.parents(v).size();
    tables.vertex_probs[static_cast<std::size_t>(v)].resize(rows);
    for (auto& cell : tables.vertex_probs[static_cast<std::size_t>(v)]) {
      const double p1 = rng.uniform01();
      cell = {1.0 - p1, p1};
    }
  }
  return tables;
}

/// Independent oracle for plug-in means: a direct sum over the compliant
/// assignments, no factor machinery shared with the library path.
inline double brute_force_plugin_mean(const PluginTables& tables, const CausalGraph& g,
                                      const Intervention& a, int reward_value = 1) {
  const int n = g.num_vertices();
  if (a.intervened(g.reward_vertex()))
    return a.value(g.reward_vertex()) == reward_value ? 1.0 : 0.0;

  std::vector<int> free_vertices;
  for (int v = 0; v < n; ++v)
    if (!a.intervened(v) && v != g.reward_vertex()) free_vertices.push_back(v);

  Assignment z(n);
  for (int v = 0; v < n; ++v)
    if (a.intervened(v)) z[v] = static_cast<std::uint8_t>(a.value(v));
  z[g.reward_vertex()] = static_cast<std::uint8_t>(reward_value);

  double total = 0.0;
  const std::uint64_t states = std::uint64_t{1} << free_vertices.size();
  for (std::uint64_t state = 0; state < states; ++state) {
    for (std::size_t k = 0; k < free_vertices.size(); ++k)
      z[free_vertices[k]] = static_cast<std::uint8_t>((state >> k) & 1u);
    double product = 1.0;
    for (int v = 0; v < n; ++v) {
      if (a.intervened(v)) continue;
      unsigned pa_bits = 0;
      int slot = 0;
      for (int p : g.parents(v)) pa_bits |= static_cast<unsigned>(z[p]) << slot++;
      product *= tables.vertex_probs[static_cast<std::size_t>(v)][pa_bits][z[v]];
    }
    total += product;
  }
  return total;
}

}  // namespace cbandits::testing
