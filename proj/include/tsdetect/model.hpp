#pragma once

#include <cmath>
#include <stdexcept>

#include "tsdetect/constellation.hpp"
#include "tsdetect/matrix.hpp"
#include "tsdetect/rng.hpp"

namespace tsdetect {

// Complex-baseband MIMO observation y = H s + v with nt transmit and nr
// receive antennas, Rayleigh channel entries CN(0,1) and noise CN(0, sigma_v^2).
struct ComplexSystem {
  int nt = 0, nr = 0;
  CMat H;                 // nr x nt
  CVec s;                 // transmitted symbols, one per transmit antenna
  CVec v;                 // noise realization
  CVec y;                 // received vector
  double snr_db = 0.0;
  double noise_var = 0.0; // sigma_v^2 = symbol_energy / snr (0 when noiseless)
  Constellation cons = Constellation::qpsk();
};

// Equivalent real-valued model.  With M = 2 nt and N = 2 nr,
//   H_real = [Re H, -Im H; Im H, Re H],  y/s/v stack real over imaginary
// parts, and every detector below works on this form.
struct RealSystem {
  int nt = 0, nr = 0;
  Mat H;                  // N x M
  Vec s;                  // length M
  Vec y;                  // length N
  double noise_var = 0.0;
  Constellation cons = Constellation::qpsk();

  int m() const { return 2 * nt; }
  int n() const { return 2 * nr; }
};

// Draws one random instance.  The draw order (H row-major, then s, then v) is
// fixed so that a seed identifies the instance independently of which
// detectors later run on it.
inline ComplexSystem draw_instance(int nt, int nr, const Constellation& cons,
                                   double snr_db, Rng& rng,
                                   bool noiseless = false) {
  if (nt < 1 || nr < 1)
    throw std::invalid_argument("draw_instance: antenna counts must be >= 1");
  if (!std::isfinite(snr_db))
    throw std::invalid_argument("draw_instance: snr must be finite");

  ComplexSystem cs;
  cs.nt = nt;
  cs.nr = nr;
  cs.cons = cons;
  cs.snr_db = snr_db;

  const double inv_sqrt2 = 0.70710678118654752440;
  cs.H = CMat(nr, nt);
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nt; ++j) {
      double re = rng.normal() * inv_sqrt2;
      double im = rng.normal() * inv_sqrt2;
      cs.H(i, j) = {re, im};
    }

  const auto& lv = cons.levels();
  cs.s.resize(nt);
  for (int j = 0; j < nt; ++j) {
    double re = lv[rng.uniform_int(cons.order_real())];
    double im = lv[rng.uniform_int(cons.order_real())];
    cs.s[j] = {re, im};
  }

  double snr_lin = std::pow(10.0, snr_db / 10.0);
  cs.noise_var = noiseless ? 0.0 : cons.symbol_energy() / snr_lin;
  double dim_sigma = std::sqrt(cs.noise_var / 2.0);
  cs.v.resize(nr);
  for (int i = 0; i < nr; ++i) {
    double re = rng.normal() * dim_sigma;
    double im = rng.normal() * dim_sigma;
    cs.v[i] = {re, im};
  }

  cs.y = matvec(cs.H, cs.s);
  for (int i = 0; i < nr; ++i) cs.y[i] += cs.v[i];
  return cs;
}

inline RealSystem to_real(const ComplexSystem& cs) {
  RealSystem rs;
  rs.nt = cs.nt;
  rs.nr = cs.nr;
  rs.cons = cs.cons;
  rs.noise_var = cs.noise_var;

  const int m = 2 * cs.nt, n = 2 * cs.nr;
  rs.H = Mat(n, m);
  for (int i = 0; i < cs.nr; ++i)
    for (int j = 0; j < cs.nt; ++j) {
      double re = cs.H(i, j).real(), im = cs.H(i, j).imag();
      rs.H(i, j) = re;
      rs.H(i, j + cs.nt) = -im;
      rs.H(i + cs.nr, j) = im;
      rs.H(i + cs.nr, j + cs.nt) = re;
    }

  rs.y.resize(n);
  for (int i = 0; i < cs.nr; ++i) {
    rs.y[i] = cs.y[i].real();
    rs.y[i + cs.nr] = cs.y[i].imag();
  }
  rs.s.resize(m);
  for (int j = 0; j < cs.nt; ++j) {
    rs.s[j] = cs.s[j].real();
    rs.s[j + cs.nt] = cs.s[j].imag();
  }
  return rs;
}

}  // namespace tsdetect
