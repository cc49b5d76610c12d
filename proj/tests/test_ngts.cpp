#include <catch2/catch_amalgamated.hpp>

#include "tsdetect/model.hpp"
#include "tsdetect/ngts.hpp"
#include "tsdetect/oracle.hpp"
#include "tsdetect/ts.hpp"

using namespace tsdetect;

namespace {

std::vector<int> identity_perm(int m) {
  std::vector<int> p(m);
  for (int j = 0; j < m; ++j) p[j] = j;
  return p;
}

}  // namespace

TEST_CASE("neighbors split into groups by base column pair") {
  Constellation q64 = Constellation::qam64();
  TabuList tabu(4);
  Vec c{-7, -5, 5, 5};
  auto moves = enumerate_neighbors(c, q64, tabu);
  // pos0: +2 only; pos1: +2,-2; pos2: +2,-2; pos3: +2,-2.
  REQUIRE(moves.size() == 7);
  auto groups = group_neighbors(moves, identity_perm(4), 2);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0] == std::vector<int>{0, 3, 4});  // positions 0 and 2
  CHECK(groups[1] == std::vector<int>{1, 2, 5, 6});  // positions 1 and 3
}

TEST_CASE("grouping respects a column permutation") {
  Constellation qpsk = Constellation::qpsk();
  TabuList tabu(4);
  Vec c{1, 1, -1, -1};
  auto moves = enumerate_neighbors(c, qpsk, tabu);
  REQUIRE(moves.size() == 4);  // one move per position

  auto plain = group_neighbors(moves, identity_perm(4), 2);
  REQUIRE(plain.size() == 2);
  CHECK(plain[0] == std::vector<int>{0, 2});
  CHECK(plain[1] == std::vector<int>{1, 3});

  // Detection position j sits on original column perm[j]: positions 0 and 1
  // now share base 0, positions 2 and 3 share base 1.
  std::vector<int> perm{2, 0, 3, 1};
  auto permuted = group_neighbors(moves, perm, 2);
  REQUIRE(permuted.size() == 2);
  CHECK(permuted[0] == std::vector<int>{0, 1});
  CHECK(permuted[1] == std::vector<int>{2, 3});
}

TEST_CASE("tabu moves drop out of their groups") {
  Constellation qpsk = Constellation::qpsk();
  TabuList tabu(4);
  tabu.push(TabuList::key_of(Vec{-1, 1, -1, -1}));  // forbid the pos-0 flip
  Vec c{1, 1, -1, -1};
  auto moves = enumerate_neighbors(c, qpsk, tabu);
  REQUIRE(moves.size() == 3);
  auto groups = group_neighbors(moves, identity_perm(4), 2);
  REQUIRE(groups.size() == 2);
  // First-seen order: position 1 (base 1) opens group 0, position 2 (base 0)
  // opens group 1.
  CHECK(groups[0] == std::vector<int>{0, 2});  // moves at positions 1 and 3
  CHECK(groups[1] == std::vector<int>{1});     // move at position 2
}

TEST_CASE("gamma cache evaluates, resumes and recharges like the ledger says") {
  Mat r(3, 3);
  r(0, 0) = 4; r(0, 1) = 1; r(0, 2) = 2;
  r(1, 1) = 5; r(1, 2) = 3;
  r(2, 2) = 6;
  Vec z{1, 2, 3};
  GammaCache cache(3);
  OpLedger led;

  // Cold column 2: full sum 1*2 + 2*3 + 3*6 = 26, charged 3 mults + 2 adds.
  CHECK(cache.eval(2, z, r, led) == Catch::Approx(26.0));
  CHECK(led.search.mults == 3);
  CHECK(led.search.adds == 2);
  CHECK(led.gamma_rebuilds == 1);

  // Re-evaluating before any commit redoes the same work and recharges it.
  CHECK(cache.eval(2, z, r, led) == Catch::Approx(26.0));
  CHECK(led.search.mults == 6);
  CHECK(led.search.adds == 4);
  CHECK(led.gamma_rebuilds == 2);

  // Cold column 0: one product, no additions, and a (length-1) rebuild.
  CHECK(cache.eval(0, z, r, led) == Catch::Approx(4.0));
  CHECK(led.search.mults == 7);
  CHECK(led.search.adds == 4);
  CHECK(led.gamma_rebuilds == 3);

  // Move at position 0: tails above index 0 stay valid.
  cache.commit(0);
  CHECK(cache.valid_from(0) == 1);
  CHECK(cache.valid_from(1) == 2);  // never evaluated, stays stale
  CHECK(cache.valid_from(2) == 1);

  z[0] = 10.0;  // only the entry below the move position changed
  CHECK(cache.eval(2, z, r, led) == Catch::Approx(10 * 2 + 2 * 3 + 3 * 6));
  CHECK(led.search.mults == 8);  // resumed with a single product
  CHECK(led.search.adds == 5);
  CHECK(led.gamma_rebuilds == 3);  // a resume is not a rebuild

  // The audit agrees with a fresh recomputation until an entry is damaged.
  CHECK(cache.audit(z, r) == 0.0);
  REQUIRE(cache.corrupt_one_entry(0.5));
  CHECK(cache.audit(z, r) > 0.01);
}

TEST_CASE("hand-checked first iterations on an identity channel") {
  RealSystem rs;
  rs.nt = rs.nr = 2;
  rs.cons = Constellation::qpsk();
  rs.H = Mat::identity(4);
  rs.s = {1, 1, 1, 1};
  rs.y = {0.2, 1, 1, 1};

  NgtsOptions opt;
  opt.iters = 2;
  opt.tabu_cap = 4;
  OpLedger led;
  SearchTrace tr;
  auto res = ngts(rs, opt, led, &tr);

  // Start: quantize(0.2) = 1, so c0 = (1,1,1,1) with phi = 0.8^2.
  REQUIRE(tr.rows.size() == 3);
  CHECK(tr.x_init == Vec{1, 1, 1, 1});
  CHECK(tr.rows[0].phi == Catch::Approx(0.64));

  // Iteration 1: with R = I, gamma = z = y - c, so the position-0 flip wins
  // its group with beta = f - 2 * step * gamma = 4 - 2*(-2)*(-0.8) = 0.8; the
  // other group's best beta is 4.
  CHECK(tr.rows[1].dstar == 1);
  CHECK(tr.rows[1].step == -2.0);
  CHECK(tr.rows[1].phi == Catch::Approx(1.44));

  // Iteration 2: flipping back is tabu; all remaining moves tie at beta = 4
  // and the first enumerated one (position 1) wins.
  CHECK(tr.rows[2].dstar == 2);
  CHECK(tr.rows[2].step == -2.0);
  CHECK(tr.rows[2].phi == Catch::Approx(5.44));

  // The initial point stays the best candidate.
  CHECK(res.solution == Vec{1, 1, 1, 1});
  CHECK(res.metric == Catch::Approx(0.64));
  CHECK(res.best_iteration == 0);

  // Ledger, iteration 1: cold gammas 1+2+3+4 mults and 0+1+2+3 adds, one
  // mult per neighbor for alpha (4), two mults + one add per group (2), and
  // the move at position 0 (1 mult, 2 adds).
  // Iteration 2: resumed gammas at positions 1..3 (1 mult + 1 add each),
  // alpha (3), groups (2), move at position 1 (2 mults, 3 adds).
  CHECK(led.search.mults == 19 + 12);
  CHECK(led.search.adds == 10 + 8);
  CHECK(led.gamma_rebuilds == 4);
  CHECK(led.iterations == 2);
  CHECK(led.mean_l() == Catch::Approx(3.5));
  CHECK(led.mean_k() == Catch::Approx(2.0));
  CHECK(led.mean_dstar() == Catch::Approx(1.5));
}

TEST_CASE("grouped search follows the same path as conventional search") {
  Rng rng(41);
  const Constellation alphabets[3] = {Constellation::qpsk(), Constellation::qam16(),
                                      Constellation::qam64()};
  for (int t = 0; t < 300; ++t) {
    const Constellation& cons = alphabets[t % 3];
    double snr = 6.0 + 2.0 * (t % 5);
    int nt = 2 + t % 3, nr = nt + (t % 2 == 0 ? 0 : 2);
    ComplexSystem cs = draw_instance(nt, nr, cons, snr, rng);
    RealSystem rs = to_real(cs);

    OpLedger l1, l2;
    SearchTrace t1, t2;
    auto r1 = conventional_ts(rs, 40, 20, l1, &t1);
    NgtsOptions opt;
    opt.iters = 40;
    opt.tabu_cap = 20;
    auto r2 = ngts(rs, opt, l2, &t2);

    CHECK_FALSE(first_divergence(t1, t2).has_value());
    CHECK(r1.solution == r2.solution);
    // best_iteration is deliberately not compared across domains; see the
    // matching note in the conventional-vs-qr equivalence test.
    if (nt == nr)  // square: reduced and full residual metrics coincide
      CHECK(r1.metric == Catch::Approx(r2.metric).epsilon(1e-6).margin(1e-9));
  }
}

TEST_CASE("single-pair systems degenerate to one group") {
  Rng rng(42);
  for (int t = 0; t < 50; ++t) {
    ComplexSystem cs = draw_instance(1, 1, Constellation::qam16(), 12.0, rng);
    RealSystem rs = to_real(cs);
    OpLedger l1, l2;
    SearchTrace t1, t2;
    conventional_ts(rs, 20, 10, l1, &t1);
    NgtsOptions opt;
    opt.iters = 20;
    opt.tabu_cap = 10;
    ngts(rs, opt, l2, &t2);
    CHECK_FALSE(first_divergence(t1, t2).has_value());
    CHECK(t1.early_terminated == t2.early_terminated);
    if (l2.iterations > 0) CHECK(l2.mean_k() == Catch::Approx(1.0));
  }
}

TEST_CASE("the chosen move minimizes the full residual metric") {
  Rng rng(43);
  for (int t = 0; t < 50; ++t) {
    ComplexSystem cs = draw_instance(4, 4, Constellation::qam16(), 10.0, rng);
    RealSystem rs = to_real(cs);

    OpLedger led;
    SearchTrace tr;
    NgtsOptions opt;
    opt.iters = 1;
    opt.tabu_cap = 2;
    ngts(rs, opt, led, &tr);
    REQUIRE(tr.rows.size() == 2);

    TabuList tabu(2);
    tabu.push(TabuList::key_of(tr.x_init));
    auto moves = enumerate_neighbors(tr.x_init, rs.cons, tabu);
    int best = -1;
    double best_metric = 0.0;
    for (std::size_t k = 0; k < moves.size(); ++k) {
      Vec nb = tr.x_init;
      nb[moves[k].pos] += moves[k].step;
      double metric = residual_metric(rs.H, rs.y, nb);
      if (best < 0 || metric < best_metric) {
        best = static_cast<int>(k);
        best_metric = metric;
      }
    }
    REQUIRE(best >= 0);
    CHECK(tr.rows[1].dstar - 1 == moves[best].pos);
    CHECK(tr.rows[1].step == moves[best].step);
    CHECK(tr.rows[1].phi == Catch::Approx(best_metric).epsilon(1e-9));
  }
}

TEST_CASE("continuous audits see no drift in long searches") {
  Rng rng(44);
  for (int t = 0; t < 10; ++t) {
    ComplexSystem cs = draw_instance(4, 4, Constellation::qam16(), 12.0, rng);
    RealSystem rs = to_real(cs);
    NgtsOptions opt;
    opt.iters = 100;
    opt.tabu_cap = 50;
    opt.audit_every = 1;
    OpLedger led;
    NgtsAudit audit;
    SearchTrace tr;
    ngts(rs, opt, led, &tr, &audit);
    CHECK(audit.audits == static_cast<int>(tr.rows.size()) - 1);
    CHECK(audit.audits >= 50);
    CHECK(audit.max_gamma_dev <= 1e-9);
    CHECK(audit.max_z_dev <= 1e-9);
    CHECK(audit.max_phi_dev <= 1e-6);
    CHECK_FALSE(audit.corrupted);
  }
}

TEST_CASE("an injected cache fault is caught by the next audit") {
  Rng rng(45);
  ComplexSystem cs = draw_instance(4, 4, Constellation::qam16(), 12.0, rng);
  RealSystem rs = to_real(cs);
  NgtsOptions opt;
  opt.iters = 200;
  opt.tabu_cap = 100;
  opt.audit_every = 10;
  opt.corrupt_gamma_at = 100;
  OpLedger led;
  NgtsAudit audit;
  ngts(rs, opt, led, nullptr, &audit);
  CHECK(audit.corrupted);
  CHECK(audit.max_gamma_dev > 1e-6);
}

TEST_CASE("noiseless instances are solved exactly, with and without ordering") {
  Rng rng(46);
  for (int t = 0; t < 50; ++t) {
    ComplexSystem cs = draw_instance(4, 4, Constellation::qam16(), 20.0, rng, true);
    RealSystem rs = to_real(cs);
    for (bool ordering : {false, true}) {
      NgtsOptions opt;
      opt.iters = 30;
      opt.tabu_cap = 15;
      opt.ordering = ordering;
      OpLedger led;
      auto res = ngts(rs, opt, led);
      CHECK(res.solution == rs.s);  // also proves the inverse permutation
      CHECK(res.metric <= 1e-18);
    }
  }
}

TEST_CASE("ascending-norm ordering shortens the average update length") {
  Rng rng(47);
  OpLedger plain, ordered;
  for (int t = 0; t < 200; ++t) {
    ComplexSystem cs = draw_instance(8, 8, Constellation::qam16(), 12.0, rng);
    RealSystem rs = to_real(cs);
    NgtsOptions opt;
    opt.iters = 50;
    opt.tabu_cap = 25;
    OpLedger l1, l2;
    ngts(rs, opt, l1);
    opt.ordering = true;
    ngts(rs, opt, l2);
    plain.merge(l1);
    ordered.merge(l2);
  }
  INFO("plain " << plain.mean_dstar() << " ordered " << ordered.mean_dstar());
  CHECK(ordered.mean_dstar() < plain.mean_dstar());
}

TEST_CASE("ordered detection never beats the exact metric bound") {
  // The ordered search explores a different path but must never return a
  // candidate whose metric beats the exact maximum-likelihood one.
  Rng rng(48);
  for (int t = 0; t < 100; ++t) {
    ComplexSystem cs = draw_instance(2, 2, Constellation::qam16(), 8.0, rng);
    RealSystem rs = to_real(cs);
    NgtsOptions opt;
    opt.iters = 30;
    opt.tabu_cap = 15;
    opt.ordering = true;
    OpLedger led;
    auto res = ngts(rs, opt, led);
    auto ml = brute_force_ml(rs);
    double got = residual_metric(rs.H, rs.y, res.solution);
    CHECK(got >= ml.metric - 1e-9 * std::max(1.0, ml.metric));
  }
}

TEST_CASE("invalid arguments are rejected") {
  RealSystem rs;
  rs.nt = rs.nr = 2;
  rs.cons = Constellation::qpsk();
  rs.H = Mat(3, 3);
  rs.H(0, 0) = rs.H(1, 1) = rs.H(2, 2) = 1.0;
  rs.y = {0, 0, 0};
  OpLedger led;
  NgtsOptions opt;
  CHECK_THROWS_AS(ngts(rs, opt, led), std::invalid_argument);

  RealSystem ok;
  ok.nt = ok.nr = 1;
  ok.cons = Constellation::qpsk();
  ok.H = Mat::identity(2);
  ok.y = {1, 1};
  NgtsOptions bad;
  bad.iters = -1;
  CHECK_THROWS_AS(ngts(ok, bad, led), std::invalid_argument);
}
