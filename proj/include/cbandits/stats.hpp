#pragma once

#include <cmath>

namespace cbandits {

/// Exact binomial upper tail P[X >= k] for X ~ Binomial(n, p).
inline double binomial_tail_ge(int n, double p, int k) {
  if (k <= 0) return 1.0;
  if (k > n) return 0.0;
  double tail = 0.0;
  for (int i = k; i <= n; ++i) {
    const double log_term = std::lgamma(n + 1.0) - std::lgamma(i + 1.0) -
                            std::lgamma(n - i + 1.0) + i * std::log(p) +
                            (n - i) * std::log1p(-p);
    tail += std::exp(log_term);
  }
  return tail < 1.0 ? tail : 1.0;
}

/// One-sided paired sign test: p-value of seeing at least n_greater positive
/// differences out of n_greater + n_smaller non-ties under a fair coin.
inline double sign_test_p_greater(int n_greater, int n_smaller) {
  return binomial_tail_ge(n_greater + n_smaller, 0.5, n_greater);
}

}  // namespace cbandits
