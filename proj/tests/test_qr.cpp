#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "tsdetect/model.hpp"
#include "tsdetect/qr.hpp"

using namespace tsdetect;

namespace {

Mat random_mat(Rng& rng, int n, int m) {
  Mat h(n, m);
  for (auto& v : h.data()) v = rng.normal();
  return h;
}

double reconstruction_error(const QrFactors& qr, const Mat& h) {
  Mat rec = matmul(qr.explicit_q(), qr.R);
  double acc = 0;
  for (std::size_t i = 0; i < rec.data().size(); ++i) {
    double d = rec.data()[i] - h.data()[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

}  // namespace

TEST_CASE("qr of the identity is trivial") {
  Mat h = Mat::identity(3);
  QrFactors qr = qr_householder(h);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(qr.R(i, j) == Catch::Approx(i == j ? 1.0 : 0.0).margin(1e-14));
  CHECK(reconstruction_error(qr, h) < 1e-14);
}

TEST_CASE("qr of a single tall column") {
  Mat h(2, 1);
  h(0, 0) = 3.0;
  h(1, 0) = 4.0;
  QrFactors qr = qr_householder(h);
  CHECK(qr.R(0, 0) == Catch::Approx(5.0));
  Mat q = qr.explicit_q();
  CHECK(q(0, 0) == Catch::Approx(0.6));
  CHECK(q(1, 0) == Catch::Approx(0.8));
}

TEST_CASE("qr reconstructs random matrices with nonnegative diagonal") {
  Rng rng(21);
  for (int t = 0; t < 60; ++t) {
    int m = 2 + rng.uniform_int(7);
    int n = m + rng.uniform_int(4);
    Mat h = random_mat(rng, n, m);
    QrFactors qr = qr_householder(h);
    CHECK(reconstruction_error(qr, h) <= 1e-9 * frobenius_norm(h));
    for (int i = 0; i < m; ++i) {
      CHECK(qr.R(i, i) >= 0.0);
      for (int j = 0; j < i; ++j) CHECK(qr.R(i, j) == 0.0);
    }
    // Column norms are preserved.
    for (int j = 0; j < m; ++j) {
      double hn = 0, rn = 0;
      for (int i = 0; i < n; ++i) hn += h(i, j) * h(i, j);
      for (int i = 0; i <= j; ++i) rn += qr.R(i, j) * qr.R(i, j);
      CHECK(rn == Catch::Approx(hn).epsilon(1e-9));
    }
  }
}

TEST_CASE("apply_qt matches the explicit transpose") {
  Rng rng(22);
  for (int t = 0; t < 30; ++t) {
    int m = 2 + rng.uniform_int(6), n = m + rng.uniform_int(3);
    Mat h = random_mat(rng, n, m);
    QrFactors qr = qr_householder(h);
    Vec b(n);
    for (auto& v : b) v = rng.normal();
    Vec fast = qr.apply_qt(b);
    Vec slow = matvec(transpose(qr.explicit_q()), b);
    REQUIRE(fast.size() == slow.size());
    for (std::size_t i = 0; i < fast.size(); ++i)
      CHECK(fast[i] == Catch::Approx(slow[i]).margin(1e-10));
  }
}

TEST_CASE("qr rejects rank-deficient and underdetermined input") {
  Mat dup(4, 2);
  for (int i = 0; i < 4; ++i) dup(i, 0) = dup(i, 1) = i + 1.0;
  CHECK_THROWS_AS(qr_householder(dup), singularity_error);

  Mat zero(3, 2);
  CHECK_THROWS_AS(qr_householder(zero), singularity_error);

  Mat wide(2, 3, 1.0);
  CHECK_THROWS_AS(qr_householder(wide), std::invalid_argument);
}

TEST_CASE("back substitution solves a hand-checked system") {
  Mat r(2, 2);
  r(0, 0) = 2.0;
  r(0, 1) = 1.0;
  r(1, 1) = 1.0;
  Vec x = back_substitute(r, Vec{3.0, 1.0});
  CHECK(x == Vec{1.0, 1.0});

  r(1, 1) = 0.0;
  CHECK_THROWS_AS(back_substitute(r, Vec{3.0, 1.0}), singularity_error);
}

TEST_CASE("zero forcing recovers noiseless transmissions") {
  Rng rng(23);
  for (int t = 0; t < 40; ++t) {
    ComplexSystem cs = draw_instance(3, 3, Constellation::qam16(), 20.0, rng, true);
    RealSystem rs = to_real(cs);
    QrFactors qr = qr_householder(rs.H);
    ZfResult zf = zf_solve(qr, rs.y, rs.cons);
    for (std::size_t i = 0; i < zf.x_ls.size(); ++i)
      CHECK(zf.x_ls[i] == Catch::Approx(rs.s[i]).margin(1e-6));
    CHECK(zf.x_hat == rs.s);
  }
}

TEST_CASE("least-squares residual is orthogonal to the column space") {
  Rng rng(24);
  for (int t = 0; t < 30; ++t) {
    ComplexSystem cs = draw_instance(3, 4, Constellation::qam16(), 8.0, rng);
    RealSystem rs = to_real(cs);
    QrFactors qr = qr_householder(rs.H);
    ZfResult zf = zf_solve(qr, rs.y, rs.cons);
    Vec hx = matvec(rs.H, zf.x_ls);
    Vec resid(rs.y.size());
    for (std::size_t i = 0; i < resid.size(); ++i) resid[i] = rs.y[i] - hx[i];
    for (int j = 0; j < rs.H.cols(); ++j) {
      double acc = 0;
      for (int i = 0; i < rs.H.rows(); ++i) acc += rs.H(i, j) * resid[i];
      CHECK(acc == Catch::Approx(0.0).margin(1e-8));
    }
  }
}

TEST_CASE("reduced-domain metric differs from the full metric by a constant") {
  Rng rng(25);
  ComplexSystem cs = draw_instance(3, 4, Constellation::qam16(), 10.0, rng);
  RealSystem rs = to_real(cs);
  QrFactors qr = qr_householder(rs.H);
  Vec qty = qr.apply_qt(rs.y);

  double shift = 0.0;
  bool first = true;
  for (int t = 0; t < 20; ++t) {
    Vec x(rs.m());
    for (auto& v : x) v = rs.cons.levels()[rng.uniform_int(4)];
    double full = residual_metric(rs.H, rs.y, x);
    Vec rx(rs.m(), 0.0);
    double reduced = 0.0;
    for (int i = 0; i < rs.m(); ++i) {
      double acc = qty[i];
      for (int k = i; k < rs.m(); ++k) acc -= qr.R(i, k) * x[k];
      reduced += acc * acc;
    }
    if (first) {
      shift = full - reduced;
      first = false;
    } else {
      CHECK(full - reduced == Catch::Approx(shift).margin(1e-8 * (1.0 + full)));
    }
  }

  // Square systems: the two metrics coincide.
  ComplexSystem sq = draw_instance(3, 3, Constellation::qam16(), 10.0, rng);
  RealSystem rsq = to_real(sq);
  QrFactors qsq = qr_householder(rsq.H);
  Vec qty2 = qsq.apply_qt(rsq.y);
  Vec x(rsq.m());
  for (auto& v : x) v = rsq.cons.levels()[rng.uniform_int(4)];
  double reduced = 0.0;
  for (int i = 0; i < rsq.m(); ++i) {
    double acc = qty2[i];
    for (int k = i; k < rsq.m(); ++k) acc -= qsq.R(i, k) * x[k];
    reduced += acc * acc;
  }
  CHECK(reduced == Catch::Approx(residual_metric(rsq.H, rsq.y, x)).epsilon(1e-9));
}

TEST_CASE("column ordering sorts by ascending norm with stable ties") {
  Mat h(2, 3);
  // Columns with squared norms 5, 2, 9.
  h(0, 0) = 1, h(1, 0) = 2;
  h(0, 1) = 1, h(1, 1) = 1;
  h(0, 2) = 0, h(1, 2) = 3;
  ColumnOrdering ord = order_columns(h);
  CHECK(ord.perm == std::vector<int>{1, 0, 2});
  CHECK(ord.h(0, 0) == 1);
  CHECK(ord.h(1, 0) == 1);

  // All-equal norms: the identity permutation.
  Mat eq(2, 3);
  eq(0, 0) = 1, eq(1, 0) = 0;
  eq(0, 1) = 0, eq(1, 1) = 1;
  eq(0, 2) = 1, eq(1, 2) = 0;
  CHECK(order_columns(eq).perm == std::vector<int>{0, 1, 2});
}

TEST_CASE("ordering keeps paired columns adjacent on random channels") {
  Rng rng(26);
  for (int t = 0; t < 50; ++t) {
    ComplexSystem cs = draw_instance(4, 4, Constellation::qam16(), 10.0, rng);
    RealSystem rs = to_real(cs);
    ColumnOrdering ord = order_columns(rs.H);
    const int half = rs.m() / 2;
    for (int j = 0; j < rs.m(); j += 2)
      CHECK(ord.perm[j] % half == ord.perm[j + 1] % half);
    double prev = -1;
    for (int j = 0; j < rs.m(); ++j) {
      double nrm = 0;
      for (int i = 0; i < rs.n(); ++i) nrm += ord.h(i, j) * ord.h(i, j);
      CHECK(nrm >= prev - 1e-12 * nrm);
      prev = nrm;
    }
  }
}

TEST_CASE("qr initialization cost tracks the cubic model") {
  Rng rng(27);
  const int n = 64;
  Mat h = random_mat(rng, n, n);
  OpLedger led;
  qr_householder(h, &led);
  double model = 2.0 * n * n * n / 3.0;
  CHECK(led.init.mults > 0.9 * model);
  CHECK(led.init.mults < 1.1 * model);
  CHECK(led.init.adds > 0.9 * model);
  CHECK(led.init.adds < 1.1 * model);

  // Back substitution: N^2/2 + N/2 multiplications, N^2/2 - N/2 additions.
  OpLedger bs;
  Vec z(n);
  for (auto& v : z) v = rng.normal();
  QrFactors qr = qr_householder(h);
  back_substitute(qr.R, z, &bs);
  CHECK(bs.init.mults == static_cast<std::uint64_t>(n) * n / 2 + n / 2);
  CHECK(bs.init.adds == static_cast<std::uint64_t>(n) * n / 2 - n / 2);
}
