#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cbandits/errors.hpp"
#include "cbandits/factor.hpp"
#include "cbandits/graph.hpp"
#include "cbandits/intervention.hpp"
#include "cbandits/model.hpp"

namespace cbandits {

enum class StoreMode { observed, smbn };

/// Plug-in conditional tables produced by SampleStore::finalize. Observed
/// entries hold both outcome probabilities of a vertex given an intervened
/// parent assignment; SMBN entries hold a distribution over the joint outcomes
/// of a c-component subset given its intervened parents. Immutable and
/// shareable once built.
struct PluginTables {
  struct SubsetTable {
    std::vector<int> members;
    std::vector<int> parents;
    std::vector<std::vector<double>> probs;  // [pa_bits][outcome_bits]
  };

  StoreMode mode = StoreMode::observed;
  std::vector<std::vector<std::array<double, 2>>> vertex_probs;  // [vertex][pa_bits]
  std::vector<SubsetTable> subsets;
  std::map<std::vector<int>, int> subset_index;
  std::vector<std::string> zero_count_warnings;
};

/// Exploration sample counter. Observed mode tracks (vertex, intervened
/// parent assignment) pairs; SMBN mode tracks the c-component subsets that
/// arise under the target arms. Single writer during exploration.
class SampleStore {
 public:
  /// Observed-graph store: every (vertex, parent-assignment) key is tracked.
  explicit SampleStore(const CausalGraph& g) : graph_(&g), mode_(StoreMode::observed) {
    vertex_counts_.resize(static_cast<std::size_t>(g.num_vertices()));
    for (int v = 0; v < g.num_vertices(); ++v)
      vertex_counts_[static_cast<std::size_t>(v)].assign(std::size_t{1} << g.parents(v).size(),
                                                         {0, 0});
  }

  /// SMBN store: tracks exactly the subsets that occur as c-components under
  /// some target arm, avoiding the 2^l * N blowup when the arm set is small.
  SampleStore(const CausalGraph& g, std::span<const Intervention> target_arms)
      : graph_(&g), mode_(StoreMode::smbn) {
    for (const auto& arm : target_arms) {
      for (auto& comp : c_components(g, arm).components) {
        if (subset_index_.count(comp)) continue;
        const int id = static_cast<int>(subsets_.size());
        subset_index_.emplace(comp, id);
        Subset s;
        s.parents = parents_of_set(g, comp);
        s.members = std::move(comp);
        const std::size_t n_pa = std::size_t{1} << s.parents.size();
        const std::size_t n_out = std::size_t{1} << s.members.size();
        subset_counts_.emplace_back(n_pa, std::vector<std::uint64_t>(n_out, 0));
        subset_totals_.emplace_back(n_pa, 0);
        subsets_.push_back(std::move(s));
      }
    }
  }

  StoreMode mode() const { return mode_; }
  const CausalGraph& graph() const { return *graph_; }

  /// Covering attribution: a key is credited only when the target is free
  /// and all of its parents are intervened by I (so the draw is a genuine
  /// sample of the conditional). Parents that are merely observed do not
  /// count.
  void record(const Intervention& intervention, const Assignment& z) {
    record_with_plan(ensure_plan(intervention), z);
  }

  /// Plan handle for hot loops that replay one intervention many times.
  int ensure_plan(const Intervention& intervention) {
    const std::string key = intervention.str();
    auto [it, inserted] = plan_ids_.try_emplace(key, static_cast<int>(plans_.size()));
    if (inserted) {
      plans_.push_back(build_plan(intervention));
      plan_rounds_.push_back(0);
      plan_keys_.push_back(key);
    }
    return it->second;
  }

  void record_with_plan(int plan_id, const Assignment& z) {
    const Plan& plan = plans_[static_cast<std::size_t>(plan_id)];
    ++plan_rounds_[static_cast<std::size_t>(plan_id)];
    if (mode_ == StoreMode::observed) {
      for (const auto& credit : plan.vertex_credits) {
        auto& slot = vertex_counts_[static_cast<std::size_t>(credit.target)][credit.pa_bits];
        ++slot.total;
        slot.ones += z[credit.target];
      }
    } else {
      for (const auto& credit : plan.subset_credits) {
        const auto& members = subsets_[static_cast<std::size_t>(credit.target)].members;
        unsigned out = 0;
        for (std::size_t k = 0; k < members.size(); ++k)
          out |= static_cast<unsigned>(z[members[k]]) << k;
        ++subset_counts_[static_cast<std::size_t>(credit.target)][credit.pa_bits][out];
        ++subset_totals_[static_cast<std::size_t>(credit.target)][credit.pa_bits];
      }
    }
  }

  /// PropInf-style observational pooling (observed mode only): a vertex is
  /// credited whenever it is un-intervened, keyed by the realized values of
  /// its parents whether or not they were intervened.
  void record_observational(const Intervention& intervention, const Assignment& z) {
    assert(mode_ == StoreMode::observed);
    for (int v = 0; v < graph_->num_vertices(); ++v) {
      if (intervention.intervened(v)) continue;
      unsigned pa_bits = 0;
      int slot = 0;
      for (int p : graph_->parents(v)) pa_bits |= static_cast<unsigned>(z[p]) << slot++;
      auto& counts = vertex_counts_[static_cast<std::size_t>(v)][pa_bits];
      ++counts.total;
      counts.ones += z[v];
    }
  }

  /// Ratio estimates. Zero-count keys fall back to the uniform default (0.5
  /// per outcome observed, 2^-|S| SMBN) and are reported in the warnings set.
  PluginTables finalize() const {
    PluginTables tables;
    tables.mode = mode_;
    if (mode_ == StoreMode::observed) {
      tables.vertex_probs.resize(vertex_counts_.size());
      for (std::size_t v = 0; v < vertex_counts_.size(); ++v) {
        tables.vertex_probs[v].resize(vertex_counts_[v].size());
        for (std::size_t pa = 0; pa < vertex_counts_[v].size(); ++pa) {
          const auto& c = vertex_counts_[v][pa];
          if (c.total == 0) {
            tables.vertex_probs[v][pa] = {0.5, 0.5};
            tables.zero_count_warnings.push_back("vertex " + std::to_string(v) +
                                                 " pa_bits " + std::to_string(pa));
          } else {
            const double total = static_cast<double>(c.total);
            tables.vertex_probs[v][pa] = {static_cast<double>(c.total - c.ones) / total,
                                          static_cast<double>(c.ones) / total};
          }
        }
      }
    } else {
      for (std::size_t s = 0; s < subsets_.size(); ++s) {
        PluginTables::SubsetTable table;
        table.members = subsets_[s].members;
        table.parents = subsets_[s].parents;
        table.probs.resize(subset_totals_[s].size());
        for (std::size_t pa = 0; pa < subset_totals_[s].size(); ++pa) {
          const std::size_t n_out = subset_counts_[s][pa].size();
          table.probs[pa].resize(n_out);
          if (subset_totals_[s][pa] == 0) {
            const double uniform = 1.0 / static_cast<double>(n_out);
            for (auto& p : table.probs[pa]) p = uniform;
            tables.zero_count_warnings.push_back("subset #" + std::to_string(s) + " pa_bits " +
                                                 std::to_string(pa));
          } else {
            const double total = static_cast<double>(subset_totals_[s][pa]);
            for (std::size_t out = 0; out < n_out; ++out)
              table.probs[pa][out] = static_cast<double>(subset_counts_[s][pa][out]) / total;
          }
        }
        tables.subset_index.emplace(table.members, static_cast<int>(s));
        tables.subsets.push_back(std::move(table));
      }
    }
    return tables;
  }

  std::pair<std::uint64_t, std::uint64_t> observed_counts(int v, unsigned pa_bits) const {
    const auto& c = vertex_counts_[static_cast<std::size_t>(v)][pa_bits];
    return {c.total, c.ones};
  }

  std::map<std::string, std::uint64_t> rounds_per_intervention() const {
    std::map<std::string, std::uint64_t> out;
    for (std::size_t k = 0; k < plan_keys_.size(); ++k) out[plan_keys_[k]] = plan_rounds_[k];
    return out;
  }

 private:
  struct Counts {
    std::uint64_t total = 0;
    std::uint64_t ones = 0;
  };
  struct Credit {
    int target = 0;        // vertex id or subset id
    unsigned pa_bits = 0;  // parents' values taken from the intervention
  };
  struct Plan {
    std::vector<Credit> vertex_credits;
    std::vector<Credit> subset_credits;
  };

  Plan build_plan(const Intervention& intervention) const {
    Plan plan;
    if (mode_ == StoreMode::observed) {
      for (int v = 0; v < graph_->num_vertices(); ++v) {
        if (intervention.intervened(v)) continue;
        unsigned pa_bits = 0;
        int slot = 0;
        bool all_parents_set = true;
        for (int p : graph_->parents(v)) {
          if (!intervention.intervened(p)) {
            all_parents_set = false;
            break;
          }
          pa_bits |= static_cast<unsigned>(intervention.value(p)) << slot++;
        }
        if (all_parents_set) plan.vertex_credits.push_back({v, pa_bits});
      }
    } else {
      for (std::size_t s = 0; s < subsets_.size(); ++s) {
        bool members_free = true;
        for (int v : subsets_[s].members) {
          if (intervention.intervened(v)) {
            members_free = false;
            break;
          }
        }
        if (!members_free) continue;
        unsigned pa_bits = 0;
        int slot = 0;
        bool all_parents_set = true;
        for (int p : subsets_[s].parents) {
          if (!intervention.intervened(p)) {
            all_parents_set = false;
            break;
          }
          pa_bits |= static_cast<unsigned>(intervention.value(p)) << slot++;
        }
        if (all_parents_set) plan.subset_credits.push_back({static_cast<int>(s), pa_bits});
      }
    }
    return plan;
  }

  struct Subset {
    std::vector<int> members;
    std::vector<int> parents;
  };

  const CausalGraph* graph_;
  StoreMode mode_;
  std::vector<std::vector<Counts>> vertex_counts_;
  std::vector<Subset> subsets_;
  std::map<std::vector<int>, int> subset_index_;
  std::vector<std::vector<std::vector<std::uint64_t>>> subset_counts_;  // [s][pa][outcome]
  std::vector<std::vector<std::uint64_t>> subset_totals_;               // [s][pa]
  std::unordered_map<std::string, int> plan_ids_;
  std::vector<Plan> plans_;
  std::vector<std::uint64_t> plan_rounds_;
  std::vector<std::string> plan_keys_;
};

inline constexpr int kDefaultWidthCapBits = 24;
inline constexpr int kEnumerationFallbackBits = 22;

namespace detail {

/// Builds one plug-in factor over the free variables of target+parents, with
/// intervened parents substituted from A. lookup(pa_bits, out_bits) reads the
/// underlying table.
template <typename Lookup>
Factor build_factor(std::span<const int> targets, std::span<const int> parents,
                    const Intervention& a, Lookup&& lookup) {
  Factor f;
  std::vector<int> free_parent_slots;  // slot within the full parent list
  unsigned fixed_bits = 0;
  for (std::size_t k = 0; k < parents.size(); ++k) {
    if (a.intervened(parents[k])) {
      fixed_bits |= static_cast<unsigned>(a.value(parents[k])) << k;
    } else {
      free_parent_slots.push_back(static_cast<int>(k));
    }
  }
  f.vars.assign(targets.begin(), targets.end());
  for (int k : free_parent_slots) f.vars.push_back(parents[static_cast<std::size_t>(k)]);
  std::sort(f.vars.begin(), f.vars.end());

  auto var_pos = [&](int v) {
    return static_cast<std::size_t>(
        std::lower_bound(f.vars.begin(), f.vars.end(), v) - f.vars.begin());
  };

  f.table.resize(std::size_t{1} << f.vars.size());
  for (std::size_t idx = 0; idx < f.table.size(); ++idx) {
    unsigned out_bits = 0;
    for (std::size_t k = 0; k < targets.size(); ++k)
      out_bits |= static_cast<unsigned>((idx >> var_pos(targets[k])) & 1u) << k;
    unsigned pa_bits = fixed_bits;
    for (int k : free_parent_slots) {
      const int p = parents[static_cast<std::size_t>(k)];
      pa_bits |= static_cast<unsigned>((idx >> var_pos(p)) & 1u) << k;
    }
    f.table[idx] = lookup(pa_bits, out_bits);
  }
  return f;
}

inline std::vector<Factor> plugin_factors(const PluginTables& tables, const CausalGraph& g,
                                          const Intervention& a) {
  std::vector<Factor> factors;
  if (tables.mode == StoreMode::observed) {
    if (tables.vertex_probs.size() != static_cast<std::size_t>(g.num_vertices()))
      throw InsufficientCoverage("plug-in tables do not match the graph");
    for (int v = 0; v < g.num_vertices(); ++v) {
      if (a.intervened(v)) continue;
      const auto& probs = tables.vertex_probs[static_cast<std::size_t>(v)];
      if (probs.size() != std::size_t{1} << g.parents(v).size())
        throw InsufficientCoverage("plug-in table missing parent assignments");
      const int target[1] = {v};
      factors.push_back(build_factor(target, g.parents(v), a,
                                     [&](unsigned pa, unsigned out) { return probs[pa][out]; }));
    }
  } else {
    for (const auto& comp : c_components(g, a).components) {
      auto it = tables.subset_index.find(comp);
      if (it == tables.subset_index.end())
        throw InsufficientCoverage("c-component subset not tracked for this arm");
      const auto& sub = tables.subsets[static_cast<std::size_t>(it->second)];
      factors.push_back(build_factor(std::span<const int>(sub.members), sub.parents, a,
                                     [&](unsigned pa, unsigned out) { return sub.probs[pa][out]; }));
    }
  }
  return factors;
}

inline double enumerate_factor_product(const std::vector<Factor>& factors) {
  std::set<int> var_set;
  for (const auto& f : factors) var_set.insert(f.vars.begin(), f.vars.end());
  std::vector<int> vars(var_set.begin(), var_set.end());
  auto pos_of = [&](int v) {
    return static_cast<std::size_t>(std::lower_bound(vars.begin(), vars.end(), v) - vars.begin());
  };

  double sum = 0.0;
  const std::uint64_t states = std::uint64_t{1} << vars.size();
  for (std::uint64_t state = 0; state < states; ++state) {
    double prod = 1.0;
    for (const auto& f : factors) {
      std::size_t idx = 0;
      for (std::size_t k = 0; k < f.vars.size(); ++k)
        idx |= ((state >> pos_of(f.vars[k])) & 1u) << k;
      prod *= f.table[idx];
    }
    sum += prod;
  }
  return sum;
}

}  // namespace detail

/// mu-hat(A): the exact value of the plug-in interventional sum (product of
/// per-vertex conditionals in the observed case, product over c-components in
/// the SMBN case), computed by variable elimination with a min-degree order.
/// Falls back to direct enumeration when the induced width exceeds the cap
/// and the free-vertex count is small enough; an intervened reward
/// short-circuits to its assigned value.
inline double plugin_mean(const PluginTables& tables, const CausalGraph& g, const Intervention& a,
                          int reward_value = 1, int width_cap_bits = kDefaultWidthCapBits,
                          int enum_fallback_bits = kEnumerationFallbackBits) {
  const int reward = g.reward_vertex();
  if (a.intervened(reward)) return a.value(reward) == reward_value ? 1.0 : 0.0;

  std::vector<Factor> factors = detail::plugin_factors(tables, g, a);
  for (auto& f : factors) restrict_factor(f, reward, reward_value);
  try {
    return eliminate_all(std::move(factors), width_cap_bits);
  } catch (const TreewidthCapExceeded&) {
    const int free_count = g.num_vertices() - a.num_intervened();
    if (free_count > enum_fallback_bits) throw;
    std::vector<Factor> rebuilt = detail::plugin_factors(tables, g, a);
    for (auto& f : rebuilt) restrict_factor(f, reward, reward_value);
    return detail::enumerate_factor_product(rebuilt);
  }
}

/// Max-norm estimation error against the ground truth (test oracle): largest
/// |p - p_hat| over observed keys, or the largest per-key total-variation
/// distance over SMBN subset keys.
inline double delta_p(const PluginTables& tables, const CausalModel& model,
                      int max_enum_bits = kDefaultEnumerationBits) {
  double worst = 0.0;
  if (tables.mode == StoreMode::observed) {
    assert(model.latents().empty());
    for (std::size_t v = 0; v < tables.vertex_probs.size(); ++v) {
      for (std::size_t pa = 0; pa < tables.vertex_probs[v].size(); ++pa) {
        const double err = std::abs(model.prob_one(static_cast<int>(v), static_cast<unsigned>(pa)) -
                                    tables.vertex_probs[v][pa][1]);
        worst = std::max(worst, err);
      }
    }
  } else {
    const int n = model.graph().num_vertices();
    for (const auto& sub : tables.subsets) {
      const std::size_t n_pa = std::size_t{1} << sub.parents.size();
      for (unsigned pa = 0; pa < n_pa; ++pa) {
        Intervention do_parents(n);
        for (std::size_t k = 0; k < sub.parents.size(); ++k)
          do_parents.set(sub.parents[k], static_cast<int>((pa >> k) & 1u));
        const auto truth = interventional_marginal(model, do_parents, sub.members, max_enum_bits);
        double tv = 0.0;
        for (std::size_t out = 0; out < truth.size(); ++out)
          tv += std::abs(truth[out] - sub.probs[pa][out]);
        worst = std::max(worst, 0.5 * tv);
      }
    }
  }
  return worst;
}

/// Left side of the pseudo-parent factorization (test oracle):
/// P[V_C = z_C | do(Pa(C) = z_Pa(C))], by exhaustive latent marginalization.
inline double c_component_lhs(const CausalModel& model, std::span<const int> component,
                              const Assignment& z, int max_enum_bits = kDefaultEnumerationBits) {
  const int n = model.graph().num_vertices();
  Intervention do_parents(n);
  for (int p : parents_of_set(model.graph(), component)) do_parents.set(p, z[p]);
  const auto marginal = interventional_marginal(model, do_parents, component, max_enum_bits);
  unsigned bits = 0;
  for (std::size_t k = 0; k < component.size(); ++k)
    bits |= static_cast<unsigned>(z[component[k]]) << k;
  return marginal[bits];
}

/// Right side of the pseudo-parent factorization (test oracle):
/// prod_j P[V_{U_j} = z_j | V_{Pa'(j)} = z_{Pa'(j)}, do(A)], each conditional
/// computed by exhaustive latent marginalization. A conditioning event of
/// probability zero yields zero.
inline double factorize_c_component(const CausalModel& model, const Intervention& a,
                                    std::span<const int> component, const Assignment& z,
                                    int max_enum_bits = kDefaultEnumerationBits) {
  double product = 1.0;
  for (int j = 1; j <= static_cast<int>(component.size()); ++j) {
    const int u_j = component[static_cast<std::size_t>(j - 1)];
    std::vector<int> cond = pseudo_parents(model.graph(), component, j);
    std::vector<int> joint = cond;
    joint.push_back(u_j);  // cond is sorted and u_j succeeds every member

    const auto joint_marginal = interventional_marginal(model, a, joint, max_enum_bits);
    unsigned joint_bits = 0;
    for (std::size_t k = 0; k < joint.size(); ++k)
      joint_bits |= static_cast<unsigned>(z[joint[k]]) << k;
    double numerator = joint_marginal[joint_bits];
    double denominator = 0.0;
    const unsigned cond_mask = (1u << cond.size()) - 1u;
    for (std::size_t out = 0; out < joint_marginal.size(); ++out) {
      if ((out & cond_mask) == (joint_bits & cond_mask)) denominator += joint_marginal[out];
    }
    if (denominator == 0.0) return 0.0;
    product *= numerator / denominator;
  }
  return product;
}

/// Observed-mode tables holding the exact ground-truth conditionals; the
/// plug-in mean then reproduces true_mean identically.
inline PluginTables tables_from_truth(const CausalModel& model) {
  assert(model.latents().empty());
  const CausalGraph& g = model.graph();
  PluginTables tables;
  tables.mode = StoreMode::observed;
  tables.vertex_probs.resize(static_cast<std::size_t>(g.num_vertices()));
  for (int v = 0; v < g.num_vertices(); ++v) {
    const std::size_t n_pa = std::size_t{1} << g.parents(v).size();
    tables.vertex_probs[static_cast<std::size_t>(v)].resize(n_pa);
    for (unsigned pa = 0; pa < n_pa; ++pa) {
      const double p1 = model.prob_one(v, pa);
      tables.vertex_probs[static_cast<std::size_t>(v)][pa] = {1.0 - p1, p1};
    }
  }
  return tables;
}

}  // namespace cbandits
