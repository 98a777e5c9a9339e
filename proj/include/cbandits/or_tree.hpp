#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "cbandits/agents.hpp"
#include "cbandits/errors.hpp"
#include "cbandits/model.hpp"

namespace cbandits {

/// Benchmark family: a complete binary tree of height h with edges pointing
/// toward the root (the reward). Leaves are 0 unless intervened; the vertices
/// one level above the leaves are Bernoulli(base_prob), except that the
/// privileged vertex fires with base_prob + bonus when both of its leaf
/// parents are 1; every other internal vertex is a deterministic OR of its
/// parents. Arms intervene one sibling leaf pair with one of the four binary
/// assignments, so the optimal arm sets the privileged pair to (1,1).
struct OrTreeSpec {
  int height = 5;
  double base_prob = 0.001;  // pi
  double bonus = 0.05;       // epsilon
  int privileged = 0;        // w: ordinal among the height-(h-1) vertices

  int num_leaves() const { return 1 << height; }
  int num_vertices() const { return (1 << (height + 1)) - 1; }
  int num_penultimate() const { return 1 << (height - 1); }
  int num_arms() const { return 4 * num_penultimate(); }

  void validate() const {
    if (height < 2) throw BadConfig("or-tree height must be at least 2");
    if (!(base_prob > 0.0 && base_prob < 1.0)) throw BadConfig("base_prob outside (0,1)");
    if (!(bonus > 0.0 && bonus < 1.0 - base_prob))
      throw BadConfig("bonus outside (0, 1 - base_prob)");
    if (privileged < 0 || privileged >= num_penultimate())
      throw BadConfig("privileged vertex ordinal out of range");
  }

  /// Index of the vertex at tree depth k (root = 0), position j in its level.
  /// Leaves come first so indices respect the topological order and the root
  /// is last.
  int vertex_index(int depth, int pos) const {
    // base(h) = 0 and base(k) = base(k+1) + 2^(k+1).
    const int base = (1 << (height + 1)) - (1 << (depth + 1));
    return base + pos;
  }
};

struct OrTree {
  CausalModel model;
  ArmSet arms;
  OrTreeSpec spec;
};

/// Closed-form interventional mean for the family: with m = 2^(h-1)
/// independent penultimate vertices, mu(A) = 1 - prod_x (1 - p_x), where p_x
/// is base_prob except for the privileged vertex under the optimal arm.
/// Accepts exactly the family's arms and the empty intervention.
inline double or_tree_true_mean(const OrTreeSpec& spec, const Intervention& a) {
  spec.validate();
  if (a.size() != spec.num_vertices()) throw ArmOutsideFamily("intervention length mismatch");

  bool privileged_hot = false;
  if (!a.empty_intervention()) {
    std::vector<int> set_coords;
    for (int v = 0; v < a.size(); ++v)
      if (a.intervened(v)) set_coords.push_back(v);
    if (set_coords.size() != 2) throw ArmOutsideFamily("arms intervene exactly one leaf pair");
    const int left = set_coords[0];
    const int right = set_coords[1];
    if (right != left + 1 || left % 2 != 0 || right >= spec.num_leaves())
      throw ArmOutsideFamily("arms intervene a sibling leaf pair");
    const int pair = left / 2;
    privileged_hot = pair == spec.privileged && a.value(left) == 1 && a.value(right) == 1;
  }

  const int m = spec.num_penultimate();
  const double miss_all =
      (privileged_hot ? 1.0 - spec.base_prob - spec.bonus : 1.0 - spec.base_prob) *
      std::pow(1.0 - spec.base_prob, m - 1);
  return 1.0 - miss_all;
}

/// Builds the ground-truth model and the arm set, and registers the closed
/// form as the exact-mean oracle (the tree is far beyond the enumeration cap).
inline OrTree build_or_tree(const OrTreeSpec& spec) {
  spec.validate();
  const int n = spec.num_vertices();

  std::vector<Edge> edges;
  std::vector<std::vector<double>> cpts(static_cast<std::size_t>(n));
  for (int depth = spec.height; depth >= 0; --depth) {
    for (int pos = 0; pos < (1 << depth); ++pos) {
      const int v = spec.vertex_index(depth, pos);
      if (depth == spec.height) {
        cpts[static_cast<std::size_t>(v)] = {0.0};  // leaves: 0 unless intervened
        continue;
      }
      const int left = spec.vertex_index(depth + 1, 2 * pos);
      const int right = spec.vertex_index(depth + 1, 2 * pos + 1);
      edges.push_back({left, v});
      edges.push_back({right, v});
      if (depth == spec.height - 1) {
        const double p = spec.base_prob;
        const double hot = pos == spec.privileged ? spec.base_prob + spec.bonus : p;
        cpts[static_cast<std::size_t>(v)] = {p, p, p, hot};
      } else {
        cpts[static_cast<std::size_t>(v)] = {0.0, 1.0, 1.0, 1.0};  // OR
      }
    }
  }

  CausalModel model(n, std::move(edges), n - 1, {}, std::move(cpts));
  model.set_closed_form_mean(
      [spec](const Intervention& a) { return or_tree_true_mean(spec, a); });

  std::vector<Intervention> arms;
  arms.reserve(static_cast<std::size_t>(spec.num_arms()));
  for (int pair = 0; pair < spec.num_penultimate(); ++pair) {
    for (int s = 0; s < 4; ++s) {
      Intervention arm(n);
      arm.set(2 * pair, s & 1);
      arm.set(2 * pair + 1, (s >> 1) & 1);
      arms.push_back(std::move(arm));
    }
  }
  return {std::move(model), ArmSet(std::move(arms)), spec};
}

}  // namespace cbandits
