#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "tsdetect/model.hpp"
#include "tsdetect/ops.hpp"
#include "tsdetect/qr.hpp"

namespace tsdetect {

struct MlResult {
  Vec solution;
  double metric = 0.0;        // ||y - H x||^2, recomputed fresh at the end
  std::uint64_t nodes = 0;    // candidates visited (brute force) or expanded (sphere)
};

// Exhaustive maximum-likelihood search.  Candidates are enumerated in
// reflected Gray order, so consecutive candidates differ in one coordinate by
// one level and the residual u = y - H x updates in O(N).  Metric ties keep
// the lexicographically smallest candidate.  Refuses alphabets^M beyond
// max_candidates.
inline MlResult brute_force_ml(const RealSystem& sys,
                               std::uint64_t max_candidates = 1000000,
                               OpLedger* led = nullptr) {
  const int n = sys.H.rows(), m = sys.H.cols();
  const auto& lv = sys.cons.levels();
  const int q = static_cast<int>(lv.size());

  std::uint64_t total = 1;
  for (int j = 0; j < m; ++j) {
    if (total > max_candidates / static_cast<std::uint64_t>(q))
      throw std::length_error("brute_force_ml: candidate count exceeds the size guard");
    total *= static_cast<std::uint64_t>(q);
  }

  Vec x(m, lv[0]);
  Vec u(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double acc = sys.y[i];
    for (int j = 0; j < m; ++j) acc -= sys.H(i, j) * x[j];
    u[i] = acc;
  }
  double metric = norm_sq(u);
  if (led) {
    led->init.mults += static_cast<std::uint64_t>(n) * m + n;
    led->init.adds += static_cast<std::uint64_t>(n) * m + n - 1;
  }

  Vec best = x;
  double best_metric = metric;

  // Reflected mixed-radix Gray enumeration with focus pointers: each step
  // moves exactly one digit one level up or down.
  std::vector<int> digit(m, 0), focus(m + 1), dir(m, 1);
  std::iota(focus.begin(), focus.end(), 0);

  std::uint64_t visited = 1;
  while (true) {
    int j = focus[0];
    focus[0] = 0;
    if (j == m) break;
    int old_k = digit[j];
    digit[j] += dir[j];
    if (digit[j] == 0 || digit[j] == q - 1) {
      dir[j] = -dir[j];
      focus[j] = focus[j + 1];
      focus[j + 1] = j + 1;
    }
    double delta = lv[digit[j]] - lv[old_k];
    x[j] = lv[digit[j]];
    for (int i = 0; i < n; ++i) u[i] -= delta * sys.H(i, j);
    metric = norm_sq(u);
    if (led) {
      led->search.mults += static_cast<std::uint64_t>(2 * n);
      led->search.adds += static_cast<std::uint64_t>(2 * n - 1);
    }
    ++visited;

    if (metric < best_metric ||
        (metric == best_metric &&
         std::lexicographical_compare(x.begin(), x.end(), best.begin(), best.end()))) {
      best = x;
      best_metric = metric;
    }
  }

  MlResult res;
  res.solution = std::move(best);
  res.metric = residual_metric(sys.H, sys.y, res.solution);
  res.nodes = visited;
  return res;
}

// Depth-first sphere decoder with Schnorr-Euchner child ordering.  Children
// at each level are visited by increasing distance from the unconstrained
// center (nearest level first, then alternating outward), so the first full
// descent is the Babai point, which sets the initial radius; after that a
// partial distance at or above the radius prunes the remaining siblings.
// Returns the exact maximum-likelihood solution.
inline MlResult se_sphere_decode(const RealSystem& sys, OpLedger* led = nullptr) {
  const int m = sys.H.cols();
  const auto& lv = sys.cons.levels();
  const int q = static_cast<int>(lv.size());

  QrFactors qr = qr_householder(sys.H, led);
  const Mat& r = qr.R;
  Vec qty = qr.apply_qt(sys.y, led);

  // Per-level enumeration state.
  std::vector<std::vector<int>> order(m, std::vector<int>(q));
  std::vector<int> child(m, 0);
  Vec resid(m, 0.0);
  Vec pd_in(m, 0.0);  // distance accumulated at levels above, on entry
  Vec x(m, 0.0);

  auto enter_level = [&](int i) {
    double acc = qty[i];
    for (int k = i + 1; k < m; ++k) acc -= r(i, k) * x[k];
    resid[i] = acc;
    double b = acc / r(i, i);
    if (led) {
      led->search.mults += static_cast<std::uint64_t>(m - i);
      led->search.adds += static_cast<std::uint64_t>(m - 1 - i);
    }
    int k0 = sys.cons.nearest_index(b);
    int s = (b >= lv[k0]) ? 1 : -1;
    int cnt = 0;
    order[i][cnt++] = k0;
    for (int t = 1; t < q && cnt < q; ++t) {
      int kp = k0 + s * t, km = k0 - s * t;
      if (kp >= 0 && kp < q) order[i][cnt++] = kp;
      if (km >= 0 && km < q && cnt < q) order[i][cnt++] = km;
    }
    child[i] = 0;
  };

  MlResult res;
  double radius = std::numeric_limits<double>::infinity();
  Vec best;

  int i = m - 1;
  pd_in[i] = 0.0;
  enter_level(i);
  while (true) {
    if (child[i] == q) {
      if (i == m - 1) break;
      ++i;
      continue;
    }
    int k = order[i][child[i]++];
    double w = resid[i] - r(i, i) * lv[k];
    double d = pd_in[i] + w * w;
    if (led) {
      led->search.mults += 2;
      led->search.adds += 2;
    }
    if (d >= radius) {
      // Children are sorted by distance, so the rest of this level is worse.
      child[i] = q;
      if (i == m - 1) break;
      ++i;
      continue;
    }
    x[i] = lv[k];
    ++res.nodes;
    if (i == 0) {
      radius = d;
      best = x;
      continue;
    }
    pd_in[i - 1] = d;
    --i;
    enter_level(i);
  }

  res.solution = std::move(best);
  res.metric = residual_metric(sys.H, sys.y, res.solution);
  return res;
}

}  // namespace tsdetect
