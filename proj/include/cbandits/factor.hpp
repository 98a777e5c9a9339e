#pragma once

#include <algorithm>
#include <cassert>
#include <set>
#include <vector>

#include "cbandits/errors.hpp"

namespace cbandits {

/// Dense probability factor. vars is ascending; bit k of a table index is the
/// value of vars[k].
struct Factor {
  std::vector<int> vars;
  std::vector<double> table;

  static Factor scalar(double value) { return {{}, {value}}; }

  std::size_t size() const { return table.size(); }
};

namespace detail {

inline Factor multiply(const Factor& a, const Factor& b) {
  Factor out;
  out.vars.resize(a.vars.size() + b.vars.size());
  auto end = std::set_union(a.vars.begin(), a.vars.end(), b.vars.begin(), b.vars.end(),
                            out.vars.begin());
  out.vars.erase(end, out.vars.end());

  // Per-output-bit strides into each operand's table.
  std::vector<std::size_t> stride_a(out.vars.size(), 0), stride_b(out.vars.size(), 0);
  for (std::size_t k = 0; k < out.vars.size(); ++k) {
    auto ia = std::lower_bound(a.vars.begin(), a.vars.end(), out.vars[k]);
    if (ia != a.vars.end() && *ia == out.vars[k])
      stride_a[k] = std::size_t{1} << (ia - a.vars.begin());
    auto ib = std::lower_bound(b.vars.begin(), b.vars.end(), out.vars[k]);
    if (ib != b.vars.end() && *ib == out.vars[k])
      stride_b[k] = std::size_t{1} << (ib - b.vars.begin());
  }

  out.table.resize(std::size_t{1} << out.vars.size());
  for (std::size_t idx = 0; idx < out.table.size(); ++idx) {
    std::size_t ia = 0, ib = 0;
    for (std::size_t k = 0; k < out.vars.size(); ++k) {
      if (idx & (std::size_t{1} << k)) {
        ia += stride_a[k];
        ib += stride_b[k];
      }
    }
    out.table[idx] = a.table[ia] * b.table[ib];
  }
  return out;
}

inline Factor sum_out(const Factor& f, int var) {
  auto it = std::lower_bound(f.vars.begin(), f.vars.end(), var);
  assert(it != f.vars.end() && *it == var);
  const std::size_t pos = static_cast<std::size_t>(it - f.vars.begin());
  const std::size_t low_mask = (std::size_t{1} << pos) - 1;

  Factor out;
  out.vars = f.vars;
  out.vars.erase(out.vars.begin() + static_cast<std::ptrdiff_t>(pos));
  out.table.assign(f.table.size() >> 1, 0.0);
  for (std::size_t idx = 0; idx < out.table.size(); ++idx) {
    const std::size_t base = (idx & low_mask) | ((idx & ~low_mask) << 1);
    out.table[idx] = f.table[base] + f.table[base | (std::size_t{1} << pos)];
  }
  return out;
}

}  // namespace detail

/// Drops var from the factor, keeping only the entries where it equals value.
/// No-op when the factor does not mention var.
inline void restrict_factor(Factor& f, int var, int value) {
  auto it = std::lower_bound(f.vars.begin(), f.vars.end(), var);
  if (it == f.vars.end() || *it != var) return;
  const std::size_t pos = static_cast<std::size_t>(it - f.vars.begin());
  const std::size_t low_mask = (std::size_t{1} << pos) - 1;

  std::vector<double> table(f.table.size() >> 1);
  for (std::size_t idx = 0; idx < table.size(); ++idx) {
    std::size_t src = (idx & low_mask) | ((idx & ~low_mask) << 1);
    if (value) src |= std::size_t{1} << pos;
    table[idx] = f.table[src];
  }
  f.vars.erase(it);
  f.table = std::move(table);
}

/// Sums out every variable using a min-degree elimination order (ties to the
/// smallest vertex index, so the operation sequence is deterministic) and
/// returns the scalar product of what remains. Throws TreewidthCapExceeded if
/// any intermediate factor would span more than width_cap_bits variables.
inline double eliminate_all(std::vector<Factor> factors, int width_cap_bits) {
  std::set<int> all_vars;
  for (const auto& f : factors) all_vars.insert(f.vars.begin(), f.vars.end());

  // Plan the order on the interaction graph first; neighbor sets after each
  // simulated elimination match the factor union that will be materialized.
  std::vector<int> order;
  {
    std::vector<int> vars(all_vars.begin(), all_vars.end());
    std::vector<std::set<int>> adj(vars.size());
    auto slot_of = [&](int v) {
      return static_cast<std::size_t>(
          std::lower_bound(vars.begin(), vars.end(), v) - vars.begin());
    };
    for (const auto& f : factors) {
      for (int a : f.vars) {
        for (int b : f.vars) {
          if (a != b) adj[slot_of(a)].insert(b);
        }
      }
    }
    std::vector<char> eliminated(vars.size(), 0);
    for (std::size_t step = 0; step < vars.size(); ++step) {
      std::size_t best = vars.size();
      for (std::size_t k = 0; k < vars.size(); ++k) {
        if (eliminated[k]) continue;
        if (best == vars.size() || adj[k].size() < adj[best].size()) best = k;
      }
      if (static_cast<int>(adj[best].size()) > width_cap_bits)
        throw TreewidthCapExceeded("elimination width exceeds the configured cap");
      order.push_back(vars[best]);
      eliminated[best] = 1;
      for (int a : adj[best]) {
        adj[slot_of(a)].erase(vars[best]);
        for (int b : adj[best]) {
          if (a != b) adj[slot_of(a)].insert(b);
        }
      }
      adj[best].clear();
    }
  }

  for (int var : order) {
    Factor merged = Factor::scalar(1.0);
    std::vector<Factor> rest;
    rest.reserve(factors.size());
    for (auto& f : factors) {
      if (std::binary_search(f.vars.begin(), f.vars.end(), var)) {
        merged = detail::multiply(merged, f);
      } else {
        rest.push_back(std::move(f));
      }
    }
    rest.push_back(detail::sum_out(merged, var));
    factors = std::move(rest);
  }

  double result = 1.0;
  for (const auto& f : factors) {
    assert(f.vars.empty());
    result *= f.table[0];
  }
  return result;
}

}  // namespace cbandits
