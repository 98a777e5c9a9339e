#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cbandits/errors.hpp"
#include "cbandits/graph.hpp"
#include "cbandits/intervention.hpp"
#include "cbandits/random.hpp"

namespace cbandits {

enum class CoverKind { observed, smbn };

/// A set of interventions claimed to cover every (vertex, parent-assignment)
/// pair (observed) or every (c-component subset, parent-assignment) pair
/// (semi-Markovian).
struct CoverSet {
  std::vector<Intervention> interventions;
  CoverKind kind = CoverKind::observed;
  std::size_t k_target = 0;
  int attempts = 1;  // construction attempts until the certificate passed
};

struct CoverMiss {
  std::vector<int> targets;   // the vertex (singleton) or subset left free
  std::vector<int> parents;   // Pa(targets), ascending
  unsigned parent_bits = 0;   // the uncovered parent assignment
};

struct CoverCertificate {
  bool covered = false;
  std::vector<CoverMiss> missing;
};

/// k = ceil(3d * 2^d * (ln N + 2d + ln T)). d = 0 needs only the all-unset
/// intervention. Natural log throughout.
inline std::size_t cover_size_observed(std::size_t n, std::size_t d, std::uint64_t horizon) {
  assert(n >= 2 && horizon >= 2);
  if (d == 0) return 1;
  const double dd = static_cast<double>(d);
  const double k = 3.0 * dd * std::ldexp(1.0, static_cast<int>(d)) *
                   (std::log(static_cast<double>(n)) + 2.0 * dd +
                    std::log(static_cast<double>(horizon)));
  return static_cast<std::size_t>(std::ceil(k));
}

/// k = ceil((3d)^l * 2^(l d) * (ln N + 2 l d + ln T)); reduces to the observed
/// size at l = 1.
inline std::size_t cover_size_smbn(std::size_t n, std::size_t d, std::size_t l,
                                   std::uint64_t horizon) {
  assert(n >= 2 && horizon >= 2 && l >= 1);
  if (d == 0) return 1;
  const double dd = static_cast<double>(d);
  const double ll = static_cast<double>(l);
  const double k = std::pow(3.0 * dd, ll) * std::ldexp(1.0, static_cast<int>(l * d)) *
                   (std::log(static_cast<double>(n)) + 2.0 * ll * dd +
                    std::log(static_cast<double>(horizon)));
  return static_cast<std::size_t>(std::ceil(k));
}

namespace detail {

inline bool witnesses(const Intervention& candidate, std::span<const int> targets,
                      std::span<const int> parents, unsigned parent_bits) {
  for (int t : targets)
    if (candidate.intervened(t)) return false;
  for (std::size_t k = 0; k < parents.size(); ++k) {
    if (!candidate.intervened(parents[k])) return false;
    if (candidate.value(parents[k]) != static_cast<int>((parent_bits >> k) & 1u)) return false;
  }
  return true;
}

inline void find_misses(const CoverSet& cover, std::span<const int> targets,
                        std::span<const int> parents, std::vector<CoverMiss>& misses) {
  const std::size_t n_assignments = std::size_t{1} << parents.size();
  for (unsigned bits = 0; bits < n_assignments; ++bits) {
    bool found = false;
    for (const auto& candidate : cover.interventions) {
      if (witnesses(candidate, targets, parents, bits)) {
        found = true;
        break;
      }
    }
    if (!found)
      misses.push_back({{targets.begin(), targets.end()}, {parents.begin(), parents.end()}, bits});
  }
}

}  // namespace detail

/// Exhaustive coverage check. Observed: every (vertex, parent-assignment)
/// pair needs a witnessing intervention that leaves the vertex free and pins
/// all of its parents to that assignment. SMBN: the same for every nonempty
/// subset of every c-component of the un-intervened graph. Returns every
/// miss, not just the first.
inline CoverCertificate verify_cover(const CausalGraph& g, const CoverSet& cover) {
  CoverCertificate cert;
  if (cover.kind == CoverKind::observed) {
    for (int v = 0; v < g.num_vertices(); ++v) {
      const int target[1] = {v};
      detail::find_misses(cover, target, g.parents(v), cert.missing);
    }
  } else {
    for (const auto& comp : c_components(g).components) {
      const std::size_t n_subsets = std::size_t{1} << comp.size();
      for (std::size_t mask = 1; mask < n_subsets; ++mask) {
        std::vector<int> subset;
        for (std::size_t k = 0; k < comp.size(); ++k)
          if (mask & (std::size_t{1} << k)) subset.push_back(comp[k]);
        detail::find_misses(cover, subset, parents_of_set(g, subset), cert.missing);
      }
    }
  }
  cert.covered = cert.missing.empty();
  return cert;
}

/// Randomized cover construction: each coordinate is independently 0 or 1 with
/// probability p/(2(1+p)) each, unset otherwise, where p = d (observed) or
/// p = d*l (SMBN). The draw is verified and resampled wholesale until the
/// certificate passes, so a returned cover is always a true cover.
inline CoverSet construct_cover(const CausalGraph& g, std::uint64_t horizon, RandomSource& rng,
                                std::optional<CoverKind> force_kind = std::nullopt,
                                int max_retries = 16) {
  const CoverKind kind =
      force_kind.value_or(g.fully_observed() ? CoverKind::observed : CoverKind::smbn);
  const std::size_t n = static_cast<std::size_t>(g.num_vertices());
  const std::size_t d = static_cast<std::size_t>(g.max_in_degree());
  const std::size_t l = static_cast<std::size_t>(g.max_component_size());

  CoverSet cover;
  cover.kind = kind;
  if (d == 0) {
    // Every parent condition is vacuous; one all-unset intervention covers.
    cover.k_target = 1;
    cover.interventions.emplace_back(static_cast<int>(n));
    return cover;
  }

  const std::size_t param = kind == CoverKind::smbn ? d * l : d;
  cover.k_target = kind == CoverKind::smbn ? cover_size_smbn(n, d, l, horizon)
                                           : cover_size_observed(n, d, horizon);
  const double q = static_cast<double>(param) / (2.0 * (1.0 + static_cast<double>(param)));

  for (int attempt = 1; attempt <= max_retries; ++attempt) {
    cover.interventions.assign(cover.k_target, Intervention(static_cast<int>(n)));
    for (auto& intervention : cover.interventions) {
      for (std::size_t v = 0; v < n; ++v) {
        const double u = rng.uniform01();
        if (u < q) {
          intervention.set(static_cast<int>(v), 0);
        } else if (u < 2.0 * q) {
          intervention.set(static_cast<int>(v), 1);
        }
      }
    }
    cover.attempts = attempt;
    if (verify_cover(g, cover).covered) return cover;
  }
  throw CoverConstructionFailed("no certified cover after max_retries draws");
}

}  // namespace cbandits
