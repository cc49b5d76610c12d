#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "tsdetect/constellation.hpp"
#include "tsdetect/matrix.hpp"
#include "tsdetect/ops.hpp"

namespace tsdetect {

struct singularity_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Householder QR of a tall N x M matrix (N >= M), kept in implicit form: the
// unit-lower reflector columns V with their scales beta, plus an explicit
// upper-triangular R.  The reflector sign is chosen so the diagonal of R is
// nonnegative.  Q^T is applied through the reflectors in O(N M); the dense Q
// is only materialized by explicit_q() as a test diagnostic.
struct QrFactors {
  Mat R;        // M x M, upper triangular, diag >= 0
  Mat V;        // N x M reflectors, V(j,j) = 1
  Vec beta;     // reflector scales (0 marks an identity reflector)

  int n() const { return V.rows(); }
  int m() const { return V.cols(); }

  // First M entries of Q^T b.
  Vec apply_qt(const Vec& b, OpLedger* led = nullptr) const {
    if (static_cast<int>(b.size()) != n())
      throw std::invalid_argument("apply_qt: size mismatch");
    Vec w = b;
    for (int j = 0; j < m(); ++j) {
      if (beta[j] == 0.0) continue;
      double t = w[j];
      for (int i = j + 1; i < n(); ++i) t += V(i, j) * w[i];
      t *= beta[j];
      w[j] -= t;
      for (int i = j + 1; i < n(); ++i) w[i] -= t * V(i, j);
      if (led) {
        led->init.mults += static_cast<std::uint64_t>(2 * (n() - j) - 1);
        led->init.adds += static_cast<std::uint64_t>(2 * (n() - j) - 1);
      }
    }
    w.resize(m());
    return w;
  }

  // Dense thin Q (N x M); uncounted, for reconstruction checks only.
  Mat explicit_q() const {
    Mat q(n(), m());
    for (int k = 0; k < m(); ++k) {
      Vec e(n(), 0.0);
      e[k] = 1.0;
      for (int j = m() - 1; j >= 0; --j) {
        if (beta[j] == 0.0) continue;
        double t = e[j];
        for (int i = j + 1; i < n(); ++i) t += V(i, j) * e[i];
        t *= beta[j];
        e[j] -= t;
        for (int i = j + 1; i < n(); ++i) e[i] -= t * V(i, j);
      }
      for (int i = 0; i < n(); ++i) q(i, k) = e[i];
    }
    return q;
  }
};

inline QrFactors qr_householder(const Mat& h, OpLedger* led = nullptr) {
  const int n = h.rows(), m = h.cols();
  if (n < m || m < 1)
    throw std::invalid_argument("qr_householder: need N >= M >= 1");
  const double tol = 1e-12 * std::max(frobenius_norm(h), 1e-300);

  Mat a = h;
  QrFactors f;
  f.R = Mat(m, m);
  f.V = Mat(n, m);
  f.beta.assign(m, 0.0);

  for (int j = 0; j < m; ++j) {
    double alpha = a(j, j);
    double sigma = 0.0;
    for (int i = j + 1; i < n; ++i) sigma += a(i, j) * a(i, j);
    double norm = std::sqrt(alpha * alpha + sigma);
    if (led) {
      led->init.mults += static_cast<std::uint64_t>(n - j);
      led->init.adds += static_cast<std::uint64_t>(n - j - 1);
    }
    if (norm <= tol)
      throw singularity_error("qr_householder: rank deficient at column " + std::to_string(j));

    f.V(j, j) = 1.0;
    if (sigma == 0.0 && alpha > 0.0) {
      // Column is already reduced; keep an identity reflector.
      f.R(j, j) = alpha;
      continue;
    }
    double v1 = (alpha <= 0.0) ? alpha - norm : -sigma / (alpha + norm);
    double v1s = v1 * v1;
    f.beta[j] = 2.0 * v1s / (sigma + v1s);
    for (int i = j + 1; i < n; ++i) f.V(i, j) = a(i, j) / v1;
    if (led) {
      led->init.mults += static_cast<std::uint64_t>(n - j) + 4;
      led->init.adds += 3;
    }
    f.R(j, j) = norm;

    for (int k = j + 1; k < m; ++k) {
      double t = a(j, k);
      for (int i = j + 1; i < n; ++i) t += f.V(i, j) * a(i, k);
      t *= f.beta[j];
      a(j, k) -= t;
      for (int i = j + 1; i < n; ++i) a(i, k) -= t * f.V(i, j);
      if (led) {
        led->init.mults += static_cast<std::uint64_t>(2 * (n - j) - 1);
        led->init.adds += static_cast<std::uint64_t>(2 * (n - j) - 1);
      }
    }
  }

  for (int j = 0; j < m; ++j)
    for (int k = j + 1; k < m; ++k) f.R(j, k) = a(j, k);
  return f;
}

// Solves R x = z for upper-triangular R; divisions are charged as
// multiplications.  z may be longer than M; only the first M entries are used.
inline Vec back_substitute(const Mat& r, const Vec& z, OpLedger* led = nullptr) {
  const int m = r.cols();
  if (r.rows() < m || static_cast<int>(z.size()) < m)
    throw std::invalid_argument("back_substitute: size mismatch");
  Vec x(m, 0.0);
  for (int i = m - 1; i >= 0; --i) {
    if (r(i, i) == 0.0)
      throw singularity_error("back_substitute: zero pivot at row " + std::to_string(i));
    double acc = z[i];
    for (int k = i + 1; k < m; ++k) acc -= r(i, k) * x[k];
    x[i] = acc / r(i, i);
    if (led) {
      led->init.mults += static_cast<std::uint64_t>(m - i);
      led->init.adds += static_cast<std::uint64_t>(m - 1 - i);
    }
  }
  return x;
}

struct ZfResult {
  Vec x_ls;   // unconstrained least-squares point
  Vec x_hat;  // x_ls quantized to the alphabet
};

// Zero-forcing detector: least squares through the QR factors, then
// per-component quantization.
inline ZfResult zf_solve(const QrFactors& qr, const Vec& y,
                         const Constellation& cons, OpLedger* led = nullptr) {
  ZfResult out;
  Vec qty = qr.apply_qt(y, led);
  out.x_ls = back_substitute(qr.R, qty, led);
  out.x_hat = cons.quantize(out.x_ls);
  return out;
}

struct ColumnOrdering {
  Mat h;                  // columns permuted by ascending squared norm
  std::vector<int> perm;  // perm[j] = original index of permuted column j
};

// Stable sort of the columns of H by ascending squared norm (ties keep the
// original order).  The squared norms are charged to the initialization
// phase; the sort itself is free.
inline ColumnOrdering order_columns(const Mat& h, OpLedger* led = nullptr) {
  const int n = h.rows(), m = h.cols();
  Vec norms(m, 0.0);
  for (int j = 0; j < m; ++j) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += h(i, j) * h(i, j);
    norms[j] = acc;
    if (led) {
      led->init.mults += static_cast<std::uint64_t>(n);
      led->init.adds += static_cast<std::uint64_t>(n - 1);
    }
  }
  ColumnOrdering out;
  out.perm.resize(m);
  std::iota(out.perm.begin(), out.perm.end(), 0);
  std::stable_sort(out.perm.begin(), out.perm.end(),
                   [&](int a, int b) { return norms[a] < norms[b]; });
  out.h = Mat(n, m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i) out.h(i, j) = h(i, out.perm[j]);
  return out;
}

}  // namespace tsdetect
