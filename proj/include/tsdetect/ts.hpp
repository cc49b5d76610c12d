#pragma once

#include <stdexcept>

#include "tsdetect/model.hpp"
#include "tsdetect/ops.hpp"
#include "tsdetect/qr.hpp"
#include "tsdetect/tabu.hpp"
#include "tsdetect/trace.hpp"

namespace tsdetect {

// Conventional tabu search on the full channel matrix.  Starts from the
// zero-forcing point and per iteration moves to the best non-tabu
// single-coordinate neighbor, evaluating each neighbor's full residual
// ||u - step * h_d||^2 against the maintained residual u = y - H c.
inline DetectResult conventional_ts(const RealSystem& sys, int iters, int tabu_cap,
                                    OpLedger& led, SearchTrace* trace = nullptr) {
  if (iters < 0) throw std::invalid_argument("conventional_ts: iters must be >= 0");
  const int n = sys.H.rows(), m = sys.H.cols();

  QrFactors qr = qr_householder(sys.H, &led);
  ZfResult zf = zf_solve(qr, sys.y, sys.cons, &led);
  Vec c = zf.x_hat;

  Vec u(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double acc = sys.y[i];
    for (int j = 0; j < m; ++j) acc -= sys.H(i, j) * c[j];
    u[i] = acc;
  }
  double phi = norm_sq(u);
  led.init.mults += static_cast<std::uint64_t>(n) * m + n;
  led.init.adds += static_cast<std::uint64_t>(n) * m + n - 1;

  TabuList tabu(tabu_cap);
  tabu.push(TabuList::key_of(c));

  DetectResult res;
  res.solution = c;
  res.metric = phi;
  detail::trace_init(trace, c, phi, led);

  for (int it = 1; it <= iters; ++it) {
    auto moves = enumerate_neighbors(c, sys.cons, tabu);
    if (moves.empty()) {
      res.early_terminated = true;
      if (trace) trace->early_terminated = true;
      break;
    }

    int best_idx = -1;
    double best_metric = 0.0;
    for (std::size_t k = 0; k < moves.size(); ++k) {
      const Move& mv = moves[k];
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        double t = u[i] - mv.step * sys.H(i, mv.pos);
        acc += t * t;
      }
      led.search.mults += static_cast<std::uint64_t>(2 * n);
      led.search.adds += static_cast<std::uint64_t>(2 * n - 1);
      if (best_idx < 0 || acc < best_metric) {
        best_idx = static_cast<int>(k);
        best_metric = acc;
      }
    }

    const Move& mv = moves[best_idx];
    c[mv.pos] += mv.step;
    for (int i = 0; i < n; ++i) u[i] -= mv.step * sys.H(i, mv.pos);
    led.search.mults += static_cast<std::uint64_t>(n);
    led.search.adds += static_cast<std::uint64_t>(n);
    phi = best_metric;

    tabu.push(TabuList::key_of(c));
    if (phi < res.metric) {
      res.solution = c;
      res.metric = phi;
      res.best_iteration = it;
    }
    led.sample_iteration(static_cast<int>(moves.size()), 0, mv.pos + 1);
    detail::trace_step(trace, it, mv.pos, mv.step, phi, led);
  }
  return res;
}

// Tabu search in the QR-reduced domain.  The residual z = Q^T y - R c only
// has d+1 entries affected by a move at position d, so each neighbor costs
// O(d) instead of O(N): its metric change is
//   beta = sum_{n<=d} (z_n - step * R(n,d))^2 - sum_{n<=d} z_n^2,
// with the z^2 prefix sums shared across the whole neighborhood.
inline DetectResult qr_ts(const RealSystem& sys, int iters, int tabu_cap,
                          OpLedger& led, SearchTrace* trace = nullptr) {
  if (iters < 0) throw std::invalid_argument("qr_ts: iters must be >= 0");
  const int m = sys.H.cols();

  QrFactors qr = qr_householder(sys.H, &led);
  Vec qty = qr.apply_qt(sys.y, &led);
  Vec x_ls = back_substitute(qr.R, qty, &led);
  Vec c = sys.cons.quantize(x_ls);

  Vec z(m, 0.0);
  for (int i = 0; i < m; ++i) {
    double acc = qty[i];
    for (int k = i; k < m; ++k) acc -= qr.R(i, k) * c[k];
    z[i] = acc;
    led.init.mults += static_cast<std::uint64_t>(m - i);
    led.init.adds += static_cast<std::uint64_t>(m - i);
  }
  double phi = norm_sq(z);
  led.init.mults += static_cast<std::uint64_t>(m);
  led.init.adds += static_cast<std::uint64_t>(m - 1);

  TabuList tabu(tabu_cap);
  tabu.push(TabuList::key_of(c));

  DetectResult res;
  res.solution = c;
  res.metric = phi;
  detail::trace_init(trace, c, phi, led);

  Vec zsq_prefix(m + 1, 0.0);  // zsq_prefix[k] = sum_{n<k} z_n^2
  for (int it = 1; it <= iters; ++it) {
    auto moves = enumerate_neighbors(c, sys.cons, tabu);
    if (moves.empty()) {
      res.early_terminated = true;
      if (trace) trace->early_terminated = true;
      break;
    }

    for (int i = 0; i < m; ++i) zsq_prefix[i + 1] = zsq_prefix[i] + z[i] * z[i];
    led.search.mults += static_cast<std::uint64_t>(m);
    led.search.adds += static_cast<std::uint64_t>(m - 1);

    int best_idx = -1;
    double best_beta = 0.0;
    for (std::size_t k = 0; k < moves.size(); ++k) {
      const Move& mv = moves[k];
      double acc = 0.0;
      for (int i = 0; i <= mv.pos; ++i) {
        double w = z[i] - mv.step * qr.R(i, mv.pos);
        acc += w * w;
      }
      double beta = acc - zsq_prefix[mv.pos + 1];
      led.search.mults += static_cast<std::uint64_t>(2 * (mv.pos + 1));
      led.search.adds += static_cast<std::uint64_t>(2 * (mv.pos + 1));
      if (best_idx < 0 || beta < best_beta) {
        best_idx = static_cast<int>(k);
        best_beta = beta;
      }
    }

    const Move& mv = moves[best_idx];
    c[mv.pos] += mv.step;
    for (int i = 0; i <= mv.pos; ++i) z[i] -= mv.step * qr.R(i, mv.pos);
    phi += best_beta;
    led.search.mults += static_cast<std::uint64_t>(mv.pos + 1);
    led.search.adds += static_cast<std::uint64_t>(mv.pos + 2);

    tabu.push(TabuList::key_of(c));
    if (phi < res.metric) {
      res.solution = c;
      res.metric = phi;
      res.best_iteration = it;
    }
    led.sample_iteration(static_cast<int>(moves.size()), 0, mv.pos + 1);
    detail::trace_step(trace, it, mv.pos, mv.step, phi, led);
  }
  return res;
}

}  // namespace tsdetect
