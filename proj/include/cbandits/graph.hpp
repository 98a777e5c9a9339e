#pragma once

#include <algorithm>
#include <cassert>
#include <queue>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "cbandits/errors.hpp"
#include "cbandits/intervention.hpp"

namespace cbandits {

using Edge = std::pair<int, int>;

/// Causal graph over observed Bernoulli vertices: a DAG of directed edges plus
/// an optional set of bidirected edges (semi-Markovian form, each bidirected
/// edge standing for an unobserved common parent). Vertex indices must respect
/// a topological order of the directed edges, and the reward vertex is the
/// last index. Immutable once constructed; construction validates and derives
/// the max in-degree d and the max c-component size l.
class CausalGraph {
 public:
  CausalGraph(int n_observed, std::vector<Edge> directed_edges,
              std::vector<Edge> bidirected_edges, int reward_vertex)
      : n_(n_observed),
        reward_(reward_vertex),
        directed_(std::move(directed_edges)),
        bidirected_(std::move(bidirected_edges)) {
    validate();
  }

  int num_vertices() const { return n_; }
  int reward_vertex() const { return reward_; }
  const std::vector<Edge>& directed_edges() const { return directed_; }
  const std::vector<Edge>& bidirected_edges() const { return bidirected_; }

  std::span<const int> parents(int v) const { return parents_[static_cast<std::size_t>(v)]; }
  std::span<const int> bidirected_neighbors(int v) const {
    return bidirected_adj_[static_cast<std::size_t>(v)];
  }

  int max_in_degree() const { return max_in_degree_; }
  int max_component_size() const { return max_component_size_; }
  bool fully_observed() const { return bidirected_.empty(); }

 private:
  void validate() {
    if (n_ < 1) throw BadEdge("graph needs at least one vertex");
    if (reward_ < 0 || reward_ >= n_) throw RewardNotLast("reward vertex out of range");

    parents_.assign(static_cast<std::size_t>(n_), {});
    std::set<Edge> seen;
    bool backward = false;
    for (const auto& [p, c] : directed_) {
      if (p < 0 || p >= n_ || c < 0 || c >= n_) throw BadEdge("directed edge out of range");
      if (p == c) throw BadEdge("self edge");
      if (!seen.insert({p, c}).second) throw BadEdge("duplicate directed edge");
      if (p > c) backward = true;
    }
    if (backward) {
      // Indices are required to respect a topological order; a backward edge
      // means either a genuine cycle or mis-indexed input.
      if (has_cycle()) throw CycleDetected("directed edges contain a cycle");
      throw BadEdge("directed edge violates topological indexing");
    }
    for (const auto& [p, c] : directed_) parents_[static_cast<std::size_t>(c)].push_back(p);
    for (auto& ps : parents_) std::sort(ps.begin(), ps.end());

    if (reward_ != n_ - 1) throw RewardNotLast("reward vertex must have topological index N-1");

    bidirected_adj_.assign(static_cast<std::size_t>(n_), {});
    std::set<Edge> seen_bi;
    for (auto& [a, b] : bidirected_) {
      if (a < 0 || a >= n_ || b < 0 || b >= n_) throw BadEdge("bidirected edge out of range");
      if (a == b) throw BadEdge("bidirected self edge");
      Edge key{std::min(a, b), std::max(a, b)};
      if (!seen_bi.insert(key).second) throw BadEdge("duplicate bidirected edge");
      bidirected_adj_[static_cast<std::size_t>(a)].push_back(b);
      bidirected_adj_[static_cast<std::size_t>(b)].push_back(a);
    }
    for (auto& adj : bidirected_adj_) std::sort(adj.begin(), adj.end());

    max_in_degree_ = 0;
    for (const auto& ps : parents_)
      max_in_degree_ = std::max(max_in_degree_, static_cast<int>(ps.size()));

    max_component_size_ = 1;
    std::vector<char> visited(static_cast<std::size_t>(n_), 0);
    for (int v = 0; v < n_; ++v) {
      if (visited[static_cast<std::size_t>(v)]) continue;
      int size = 0;
      std::queue<int> frontier;
      frontier.push(v);
      visited[static_cast<std::size_t>(v)] = 1;
      while (!frontier.empty()) {
        int u = frontier.front();
        frontier.pop();
        ++size;
        for (int w : bidirected_adj_[static_cast<std::size_t>(u)]) {
          if (!visited[static_cast<std::size_t>(w)]) {
            visited[static_cast<std::size_t>(w)] = 1;
            frontier.push(w);
          }
        }
      }
      max_component_size_ = std::max(max_component_size_, size);
    }
  }

  bool has_cycle() const {
    std::vector<int> indeg(static_cast<std::size_t>(n_), 0);
    std::vector<std::vector<int>> children(static_cast<std::size_t>(n_));
    for (const auto& [p, c] : directed_) {
      ++indeg[static_cast<std::size_t>(c)];
      children[static_cast<std::size_t>(p)].push_back(c);
    }
    std::queue<int> ready;
    for (int v = 0; v < n_; ++v)
      if (indeg[static_cast<std::size_t>(v)] == 0) ready.push(v);
    int removed = 0;
    while (!ready.empty()) {
      int v = ready.front();
      ready.pop();
      ++removed;
      for (int c : children[static_cast<std::size_t>(v)])
        if (--indeg[static_cast<std::size_t>(c)] == 0) ready.push(c);
    }
    return removed != n_;
  }

  int n_ = 0;
  int reward_ = -1;
  std::vector<Edge> directed_;
  std::vector<Edge> bidirected_;
  std::vector<std::vector<int>> parents_;
  std::vector<std::vector<int>> bidirected_adj_;
  int max_in_degree_ = 0;
  int max_component_size_ = 1;
};

/// Pa(U): union of the members' parents, excluding U itself. Ascending.
inline std::vector<int> parents_of_set(const CausalGraph& g, std::span<const int> members) {
  std::set<int> inside(members.begin(), members.end());
  std::set<int> out;
  for (int v : members) {
    for (int p : g.parents(v)) {
      if (!inside.count(p)) out.insert(p);
    }
  }
  return {out.begin(), out.end()};
}

/// Partition of the un-intervened vertices into maximal bidirected-connected
/// components. Members and components are in topological order.
struct CComponentPartition {
  std::vector<std::vector<int>> components;
};

inline CComponentPartition c_components(const CausalGraph& g, const Intervention& a) {
  const int n = g.num_vertices();
  CComponentPartition out;
  std::vector<char> visited(static_cast<std::size_t>(n), 0);
  for (int v = 0; v < n; ++v) {
    if (visited[static_cast<std::size_t>(v)] || a.intervened(v)) continue;
    std::vector<int> comp;
    std::queue<int> frontier;
    frontier.push(v);
    visited[static_cast<std::size_t>(v)] = 1;
    while (!frontier.empty()) {
      int u = frontier.front();
      frontier.pop();
      comp.push_back(u);
      for (int w : g.bidirected_neighbors(u)) {
        if (!visited[static_cast<std::size_t>(w)] && !a.intervened(w)) {
          visited[static_cast<std::size_t>(w)] = 1;
          frontier.push(w);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    out.components.push_back(std::move(comp));
  }
  return out;
}

inline CComponentPartition c_components(const CausalGraph& g) {
  return c_components(g, Intervention(g.num_vertices()));
}

/// Pseudo parents of the prefix_len-th member (1-based) of a topologically
/// sorted c-component (U_1..U_m):
///   Pa'(j) = Pa({U_1..U_j}) union {U_1..U_{j-1}}.
/// Every member precedes U_j and |Pa'(j)| <= d*l + l.
inline std::vector<int> pseudo_parents(const CausalGraph& g, std::span<const int> component,
                                       int prefix_len) {
  assert(prefix_len >= 1 && prefix_len <= static_cast<int>(component.size()));
  std::span<const int> prefix = component.subspan(0, static_cast<std::size_t>(prefix_len));
  std::vector<int> result = parents_of_set(g, prefix);
  result.insert(result.end(), prefix.begin(), prefix.end() - 1);
  std::sort(result.begin(), result.end());
  result.erase(std::unique(result.begin(), result.end()), result.end());

  const int u_j = component[static_cast<std::size_t>(prefix_len - 1)];
  const int bound =
      g.max_in_degree() * g.max_component_size() + g.max_component_size();
  assert(static_cast<int>(result.size()) <= bound);
  for (int v : result) assert(v < u_j);
  (void)u_j;
  (void)bound;
  return result;
}

}  // namespace cbandits
