#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "cbandits/estimation.hpp"
#include "cbandits/or_tree.hpp"
#include "helpers.hpp"

using namespace cbandits;

namespace {

CausalGraph chain2() { return CausalGraph(2, {{0, 1}}, {}, 1); }

PluginTables chain_tables(double p0, double p1_given_0, double p1_given_1) {
  PluginTables tables;
  tables.mode = StoreMode::observed;
  tables.vertex_probs = {{{1.0 - p0, p0}},
                         {{1.0 - p1_given_0, p1_given_0}, {1.0 - p1_given_1, p1_given_1}}};
  return tables;
}

}  // namespace

TEST_CASE("covering attribution credits only intervened-parent keys") {
  const CausalGraph g = chain2();
  SampleStore store(g);
  Intervention a(2);
  a.set(0, 1);
  Assignment z(2);
  z[0] = 1;
  z[1] = 1;
  store.record(a, z);
  CHECK(store.observed_counts(1, 1) == std::pair<std::uint64_t, std::uint64_t>{1, 1});
  CHECK(store.observed_counts(1, 0) == std::pair<std::uint64_t, std::uint64_t>{0, 0});
  CHECK(store.observed_counts(0, 0) == std::pair<std::uint64_t, std::uint64_t>{0, 0});
}

TEST_CASE("all-unset rounds credit only parentless vertices") {
  CausalGraph g(3, {{0, 1}, {0, 2}, {1, 2}}, {}, 2);
  SampleStore store(g);
  Assignment z(3);
  z[0] = 1;
  store.record(Intervention(3), z);
  CHECK(store.observed_counts(0, 0).first == 1);
  for (unsigned pa = 0; pa < 2; ++pa) CHECK(store.observed_counts(1, pa).first == 0);
  for (unsigned pa = 0; pa < 4; ++pa) CHECK(store.observed_counts(2, pa).first == 0);
}

TEST_CASE("smbn attribution keys the whole subset outcome") {
  // Component {0,2} with Pa = {1}; arm leaves the component free.
  CausalGraph g(3, {{1, 2}}, {{0, 2}}, 2);
  Intervention arm(3);
  arm.set(1, 0);
  std::vector<Intervention> arms{arm};
  SampleStore store(g, arms);

  Assignment z(3);
  z[0] = 1;
  z[1] = 0;
  z[2] = 1;
  store.record(arm, z);

  const PluginTables tables = store.finalize();
  const auto it = tables.subset_index.find(std::vector<int>{0, 2});
  REQUIRE(it != tables.subset_index.end());
  const auto& sub = tables.subsets[static_cast<std::size_t>(it->second)];
  CHECK(sub.parents == std::vector<int>{1});
  CHECK(sub.probs[0][0b11] == 1.0);  // the single sample had (z0,z2) = (1,1)
}

TEST_CASE("finalize turns counts into ratios with uniform zero-count defaults") {
  const CausalGraph g = chain2();
  SampleStore store(g);
  Intervention a(2);
  a.set(0, 1);
  Assignment one(2), zero(2);
  one[0] = one[1] = 1;
  zero[0] = 1;
  store.record(a, one);
  store.record(a, one);
  store.record(a, one);
  store.record(a, zero);

  const PluginTables tables = store.finalize();
  CHECK(tables.vertex_probs[1][1][1] == 0.75);
  CHECK(tables.vertex_probs[1][1][0] == 0.25);
  CHECK(tables.vertex_probs[1][0][1] == 0.5);  // never sampled
  CHECK_FALSE(tables.zero_count_warnings.empty());
}

TEST_CASE("smbn finalize normalizes outcome vectors") {
  CausalGraph g(3, {{1, 2}}, {{0, 2}}, 2);
  Intervention arm(3);
  arm.set(1, 0);
  std::vector<Intervention> arms{arm};
  SampleStore store(g, arms);
  Assignment both(3), neither(3);
  both[0] = both[2] = 1;
  store.record(arm, both);
  store.record(arm, both);
  store.record(arm, neither);
  store.record(arm, neither);

  const PluginTables tables = store.finalize();
  const auto& sub = tables.subsets[0];
  CHECK(sub.probs[0] == std::vector<double>{0.5, 0.0, 0.0, 0.5});
  double sum = 0.0;
  for (double p : sub.probs[0]) sum += p;
  CHECK_THAT(sum, Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("plug-in mean on the two-vertex chain") {
  const CausalGraph g = chain2();
  const PluginTables tables = chain_tables(0.4, 0.2, 0.9);
  CHECK_THAT(plugin_mean(tables, g, Intervention(2)), Catch::Matchers::WithinAbs(0.48, 1e-12));
  Intervention a(2);
  a.set(0, 1);
  CHECK_THAT(plugin_mean(tables, g, a), Catch::Matchers::WithinAbs(0.9, 1e-12));
  Intervention reward_set(2);
  reward_set.set(1, 0);
  CHECK(plugin_mean(tables, g, reward_set) == 0.0);
}

TEST_CASE("plug-in with the true tables reproduces the exact oracle") {
  RandomSource rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const CausalModel model = testing::random_observed_model(rng, 2, 10, 3);
    const PluginTables truth = tables_from_truth(model);
    for (int k = 0; k < 10; ++k) {
      const Intervention a =
          testing::random_intervention(rng, model.graph().num_vertices(), 0.35, false);
      CHECK_THAT(plugin_mean(truth, model.graph(), a),
                 Catch::Matchers::WithinAbs(true_mean(model, a), 1e-12));
    }
  }
}

TEST_CASE("plug-in distribution over the reward normalizes") {
  RandomSource rng(37);
  for (int trial = 0; trial < 25; ++trial) {
    const CausalModel model = testing::random_observed_model(rng, 2, 10, 3);
    const PluginTables tables = testing::random_tables(rng, model.graph());
    const Intervention a =
        testing::random_intervention(rng, model.graph().num_vertices(), 0.3, true);
    const double p1 = plugin_mean(tables, model.graph(), a, 1);
    const double p0 = plugin_mean(tables, model.graph(), a, 0);
    CHECK_THAT(p0 + p1, Catch::Matchers::WithinAbs(1.0, 1e-9));
  }
}

TEST_CASE("variable elimination agrees with brute-force enumeration") {
  RandomSource rng(43);
  for (int trial = 0; trial < 100; ++trial) {
    const CausalModel model = testing::random_observed_model(rng, 2, 10, 3);
    const PluginTables tables = testing::random_tables(rng, model.graph());
    const Intervention a =
        testing::random_intervention(rng, model.graph().num_vertices(), 0.3, false);
    const double via_elimination = plugin_mean(tables, model.graph(), a);
    const double via_enumeration = testing::brute_force_plugin_mean(tables, model.graph(), a);
    CHECK_THAT(via_elimination, Catch::Matchers::WithinAbs(via_enumeration, 1e-9));
  }
}

TEST_CASE("a tight width cap falls back to enumeration on small graphs") {
  RandomSource rng(47);
  const CausalModel model = testing::random_observed_model(rng, 8, 10, 3);
  const PluginTables tables = testing::random_tables(rng, model.graph());
  const Intervention a(model.graph().num_vertices());
  const double strict = plugin_mean(tables, model.graph(), a);
  const double capped = plugin_mean(tables, model.graph(), a, 1, /*width_cap_bits=*/0);
  CHECK_THAT(capped, Catch::Matchers::WithinAbs(strict, 1e-9));
}

TEST_CASE("missing smbn subsets raise InsufficientCoverage") {
  CausalGraph g(3, {{1, 2}}, {{0, 2}}, 2);
  Intervention tracked(3);
  tracked.set(1, 0);
  std::vector<Intervention> arms{tracked};
  SampleStore store(g, arms);
  const PluginTables tables = store.finalize();
  // do() on vertex 0 splits the component; {2} was never tracked.
  Intervention untracked(3);
  untracked.set(0, 1);
  untracked.set(1, 0);
  CHECK_THROWS_AS(plugin_mean(tables, g, untracked), InsufficientCoverage);
}

TEST_CASE("the store tallies rounds per intervention") {
  const CausalGraph g = chain2();
  SampleStore store(g);
  Intervention a(2), b(2);
  a.set(0, 1);
  Assignment z(2);
  store.record(a, z);
  store.record(a, z);
  store.record(b, z);
  const auto tally = store.rounds_per_intervention();
  CHECK(tally.at("1*") == 2);
  CHECK(tally.at("**") == 1);
}

TEST_CASE("width cap without an enumeration fallback raises TreewidthCapExceeded") {
  OrTreeSpec spec;
  spec.height = 4;  // 31 free vertices, beyond the 22-bit fallback
  spec.base_prob = 0.1;
  spec.bonus = 0.2;
  const OrTree tree = build_or_tree(spec);
  const PluginTables truth = tables_from_truth(tree.model);
  CHECK_THROWS_AS(
      plugin_mean(truth, tree.model.graph(), Intervention(spec.num_vertices()), 1, 0),
      TreewidthCapExceeded);
}

TEST_CASE("smbn delta_p is the worst per-key total variation") {
  // Latents copied into both children: the joint is (0.5, 0, 0, 0.5).
  CausalModel model(2, {}, 1, {{0.5, {0, 1}}}, {{0.0, 1.0}, {0.0, 1.0}});
  Intervention empty(2);
  std::vector<Intervention> arms{empty};
  SampleStore store(model.graph(), arms);
  RandomSource rng(67);
  for (int k = 0; k < 64; ++k) store.record(empty, sample_under_do(model, empty, rng));
  const PluginTables estimated = store.finalize();
  CHECK(delta_p(estimated, model) >= 0.0);

  PluginTables exact = estimated;
  exact.subsets[0].probs[0] = {0.5, 0.0, 0.0, 0.5};
  CHECK(delta_p(exact, model) == 0.0);
  PluginTables uniform = estimated;
  uniform.subsets[0].probs[0] = {0.25, 0.25, 0.25, 0.25};
  CHECK_THAT(delta_p(uniform, model), Catch::Matchers::WithinAbs(0.5, 1e-12));
}

TEST_CASE("delta_p is zero at the truth and max-abs otherwise") {
  CausalModel model(2, {{0, 1}}, 1, {}, {{0.5}, {0.25, 0.75}});
  CHECK(delta_p(tables_from_truth(model), model) == 0.0);
  PluginTables off = tables_from_truth(model);
  off.vertex_probs[0][0] = {0.25, 0.75};  // truth is 0.5
  CHECK_THAT(delta_p(off, model), Catch::Matchers::WithinAbs(0.25, 1e-12));
}

TEST_CASE("smbn pipeline on an observed graph matches the observed pipeline exactly") {
  RandomSource rng(53);
  for (int trial = 0; trial < 10; ++trial) {
    const CausalModel model = testing::random_observed_model(rng, 3, 8, 2);
    const CausalGraph& g = model.graph();
    const int n = g.num_vertices();

    std::vector<Intervention> arms;
    for (int k = 0; k < 3; ++k) arms.push_back(testing::random_intervention(rng, n, 0.4, true));

    SampleStore observed(g);
    SampleStore smbn(g, arms);
    RandomSource sampler(1000 + static_cast<std::uint64_t>(trial));
    const CoverSet cover = construct_cover(g, 512, sampler);
    for (const auto& intervention : cover.interventions) {
      for (int r = 0; r < 8; ++r) {
        const Assignment z = sample_under_do(model, intervention, sampler);
        observed.record(intervention, z);
        smbn.record(intervention, z);
      }
    }

    const PluginTables observed_tables = observed.finalize();
    const PluginTables smbn_tables = smbn.finalize();
    for (const auto& arm : arms) {
      const double via_observed = plugin_mean(observed_tables, g, arm);
      const double via_smbn = plugin_mean(smbn_tables, g, arm);
      CHECK(via_observed == via_smbn);  // bitwise: the pipelines must coincide
    }
  }
}

TEST_CASE("c-component estimation is exact where per-vertex factorization is biased") {
  // V0 copies the latent, V1 copies V0, V2 = XOR(V1, latent): the true mean
  // under no intervention is 0, but the per-vertex factorization sees
  // P(V2 | do(V1)) = 1/2 and lands near 1/2.
  CausalModel model(3, {{0, 1}, {1, 2}}, 2, {{0.5, {0, 2}}},
                    {{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0, 1.0, 0.0}});
  const CausalGraph& g = model.graph();
  const Intervention target(3);
  REQUIRE(true_mean(model, target) == 0.0);

  const std::vector<Intervention> cover{Intervention::parse("*0*"), Intervention::parse("*1*"),
                                        Intervention::parse("0**"), Intervention::parse("1**")};
  std::vector<Intervention> arms{target};
  SampleStore smbn(g, arms);
  SampleStore observed(g);
  RandomSource rng(71);
  for (const auto& intervention : cover) {
    for (int k = 0; k < 2000; ++k) {
      const Assignment z = sample_under_do(model, intervention, rng);
      smbn.record(intervention, z);
      observed.record(intervention, z);
    }
  }

  const double via_components = plugin_mean(smbn.finalize(), g, target);
  const double via_vertices = plugin_mean(observed.finalize(), g, target);
  CHECK(via_components == 0.0);  // impossible joint outcomes are never counted
  CHECK(via_vertices > 0.4);     // confounding bias
}

TEST_CASE("pseudo-parent factorization holds on enumerable latent models") {
  RandomSource rng(59);
  for (int trial = 0; trial < 12; ++trial) {
    const CausalModel model = testing::random_latent_model(rng, 3, 6, 2);
    const CausalGraph& g = model.graph();
    const int n = g.num_vertices();
    const Intervention a = testing::random_intervention(rng, n, 0.3, false);
    for (const auto& comp : c_components(g, a).components) {
      std::vector<int> scope = comp;
      for (int p : parents_of_set(g, comp)) scope.push_back(p);
      const std::uint64_t states = std::uint64_t{1} << scope.size();
      for (std::uint64_t state = 0; state < states; ++state) {
        Assignment z(n);
        bool consistent = true;
        for (std::size_t k = 0; k < scope.size(); ++k) {
          const auto bit = static_cast<std::uint8_t>((state >> k) & 1u);
          z[scope[k]] = bit;
          if (a.intervened(scope[k]) && a.value(scope[k]) != bit) consistent = false;
        }
        if (!consistent) continue;
        const double lhs = c_component_lhs(model, comp, z);
        const double rhs = factorize_c_component(model, a, comp, z);
        CHECK_THAT(lhs, Catch::Matchers::WithinAbs(rhs, 1e-12));
      }
    }
  }
}

TEST_CASE("factorization of a singleton component is the ordinary conditional") {
  CausalModel model(2, {{0, 1}}, 1, {}, {{0.3}, {0.2, 0.8}});
  const std::vector<int> comp{1};
  Assignment z(2);
  z[0] = 1;
  z[1] = 1;
  const Intervention empty(2);
  CHECK_THAT(factorize_c_component(model, empty, comp, z),
             Catch::Matchers::WithinAbs(0.8, 1e-12));
  CHECK_THAT(c_component_lhs(model, comp, z), Catch::Matchers::WithinAbs(0.8, 1e-12));
}

TEST_CASE("factorization on a chain with a confounded endpoint pair") {
  // 0 -> 1 -> 2 with a latent over {0,2}: component (0,2) under the empty
  // intervention, checked on every assignment.
  CausalModel model(3, {{0, 1}, {1, 2}}, 2, {{0.35, {0, 2}}},
                    {{0.2, 0.7}, {0.3, 0.8}, {0.1, 0.45, 0.55, 0.9}});
  const std::vector<int> comp{0, 2};
  const Intervention empty(3);
  for (unsigned bits = 0; bits < 8; ++bits) {
    Assignment z(3);
    for (int v = 0; v < 3; ++v) z[v] = static_cast<std::uint8_t>((bits >> v) & 1u);
    CHECK_THAT(c_component_lhs(model, comp, z),
               Catch::Matchers::WithinAbs(factorize_c_component(model, empty, comp, z), 1e-12));
  }
}

TEST_CASE("latent pair with no directed edges factorizes over all four outcomes") {
  CausalModel model(2, {}, 1, {{0.5, {0, 1}}}, {{0.2, 0.9}, {0.3, 0.7}});
  const std::vector<int> comp{0, 1};
  const Intervention empty(2);
  double total = 0.0;
  for (int b0 = 0; b0 < 2; ++b0) {
    for (int b1 = 0; b1 < 2; ++b1) {
      Assignment z(2);
      z[0] = static_cast<std::uint8_t>(b0);
      z[1] = static_cast<std::uint8_t>(b1);
      const double lhs = c_component_lhs(model, comp, z);
      const double rhs = factorize_c_component(model, empty, comp, z);
      CHECK_THAT(lhs, Catch::Matchers::WithinAbs(rhs, 1e-12));
      total += lhs;
    }
  }
  CHECK_THAT(total, Catch::Matchers::WithinAbs(1.0, 1e-12));
}
