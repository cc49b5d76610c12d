#pragma once

#include <stdexcept>

#include "tsdetect/ops.hpp"

namespace tsdetect {

// Analytic operation-count models, parameterized by the real problem
// dimension N (square systems), the mean neighborhood size mean_l and, for
// the grouped search, the mean group count mean_k.  They estimate total real
// operations (multiplications plus additions) and are meant to be compared
// against measured OpLedger totals.

// Conventional tabu search: full QR-based initialization plus a residual
// update and L full metric evaluations per iteration.
inline double predict_conventional_ts(int n, double mean_l, double iters) {
  if (n < 1) throw std::invalid_argument("predict_conventional_ts: n must be >= 1");
  double nn = n;
  double init = 2.0 * nn * nn * nn / 3.0 + 3.0 * nn * nn + nn / 3.0;
  double per_iter = 4.0 * mean_l * nn - 2.0;
  return init + iters * per_iter;
}

// Neighbor-grouped tabu search.  Initialization adds the per-column scale
// table to the QR work; each iteration costs about 3 ops per group, 3 per
// neighbor, and the expected cached-inner-product update of roughly
// min(d_l, d*) terms, whose mean over uniform positions is N/3 + O(1).
inline double predict_ngts(int n, double mean_l, double mean_k, double iters) {
  if (n < 1) throw std::invalid_argument("predict_ngts: n must be >= 1");
  double nn = n;
  double init = 4.0 * nn * nn * nn / 3.0 + 4.5 * nn * nn + 1.5 * nn;
  double per_iter =
      3.0 * mean_k + 2.0 * mean_l + 2.0 * mean_l * nn / 3.0 + mean_l / (3.0 * nn);
  return init + iters * per_iter;
}

// P(min(U, V) <= i) for U, V independent uniform on {1, ..., n}: the
// distribution of the effective update length min(d_l, d*).
inline double epsilon_cdf(int i, int n) {
  if (n < 1) throw std::invalid_argument("epsilon_cdf: n must be >= 1");
  if (i < 0 || i > n) throw std::invalid_argument("epsilon_cdf: i out of range");
  double di = i, dn = n;
  return di * (2.0 * dn - di) / (dn * dn);
}

// E[min(U, V)] in closed form: n/3 + 1/2 + 1/(6n).
inline double expected_epsilon(int n) {
  if (n < 1) throw std::invalid_argument("expected_epsilon: n must be >= 1");
  double dn = n;
  return dn / 3.0 + 0.5 + 1.0 / (6.0 * dn);
}

// Percentage of operations saved by `other` relative to `baseline`.
inline double reduction_percent(double baseline_ops, double other_ops) {
  if (baseline_ops <= 0.0)
    throw std::invalid_argument("reduction_percent: baseline must be positive");
  return 100.0 * (1.0 - other_ops / baseline_ops);
}

inline double reduction_percent(const OpLedger& baseline, const OpLedger& other) {
  return reduction_percent(static_cast<double>(baseline.total_ops()),
                           static_cast<double>(other.total_ops()));
}

}  // namespace tsdetect
