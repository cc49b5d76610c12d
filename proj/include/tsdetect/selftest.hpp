#pragma once

#include <cmath>
#include <cstdio>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tsdetect/harness.hpp"

namespace tsdetect {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct SelftestReport {
  std::vector<CheckResult> checks;
  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

namespace detail {

inline bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

inline RealSystem random_real_system(Rng& rng, int nt, int nr,
                                     const Constellation& cons, double snr_db,
                                     bool noiseless = false) {
  ComplexSystem cs = draw_instance(nt, nr, cons, snr_db, rng, noiseless);
  return to_real(cs);
}

}  // namespace detail

// Deterministic invariant battery over every module.  Each check reports the
// number of instances it exercised; any failure names the violated invariant.
// The optional fault name deliberately corrupts internal state so the
// corresponding check must fail (supported: "gamma_cache").
inline SelftestReport selftest(const std::string& fault = "") {
  if (!fault.empty() && fault != "gamma_cache")
    throw std::invalid_argument("selftest: unknown fault: " + fault);

  SelftestReport rep;
  auto check = [&](const char* name, bool ok, std::string detail) {
    rep.checks.push_back({name, ok, std::move(detail)});
  };
  const std::vector<Constellation> alphabets = {
      Constellation::qpsk(), Constellation::qam16(), Constellation::qam64()};

  {  // Quantization: idempotent, in-alphabet, midpoints round up.
    bool ok = true;
    Rng rng(101);
    for (const auto& cons : alphabets)
      for (int t = 0; t < 300; ++t) {
        Vec v(8);
        for (auto& x : v) x = rng.normal() * 4.0;
        Vec q1 = cons.quantize(v), q2 = cons.quantize(q1);
        for (std::size_t i = 0; i < v.size(); ++i)
          ok = ok && cons.contains(q1[i]) && q1[i] == q2[i];
      }
    ok = ok && Constellation::qam16().quantize(0.0) == 1.0 &&
         Constellation::qam16().quantize(-2.0) == -1.0;
    check("quantize-idempotent", ok, "3 alphabets x 300 random vectors");
  }

  {  // Gray labels: adjacent levels differ in exactly one bit.
    bool ok = true;
    for (const auto& cons : alphabets) {
      for (int k = 0; k + 1 < cons.order_real(); ++k) {
        std::uint32_t d = cons.gray_label(k) ^ cons.gray_label(k + 1);
        ok = ok && d != 0 && (d & (d - 1)) == 0;
      }
      ok = ok && cons.bit_errors(cons.levels(), cons.levels()) == 0;
    }
    check("gray-adjacency", ok, "3 alphabets, all adjacent level pairs");
  }

  {  // Real decomposition: block structure, paired norms, energy preserved.
    bool ok = true;
    Rng rng(202);
    for (int t = 0; t < 100; ++t) {
      int nt = 1 + (t % 4), nr = nt + (t % 2);
      ComplexSystem cs = draw_instance(nt, nr, alphabets[t % 3], 12.0, rng);
      RealSystem rs = to_real(cs);
      for (int i = 0; i < nr && ok; ++i)
        for (int j = 0; j < nt; ++j) {
          ok = ok && rs.H(i, j) == rs.H(i + nr, j + nt) &&
               rs.H(i, j + nt) == -rs.H(i + nr, j);
        }
      for (int j = 0; j < nt && ok; ++j) {
        double a = 0, b = 0;
        for (int i = 0; i < 2 * nr; ++i) {
          a += rs.H(i, j) * rs.H(i, j);
          b += rs.H(i, j + nt) * rs.H(i, j + nt);
        }
        ok = ok && detail::rel_close(a, b, 1e-12);
      }
      double ey = 0;
      for (auto& v : cs.y) ey += std::norm(v);
      ok = ok && detail::rel_close(ey, norm_sq(rs.y), 1e-12);
    }
    check("real-model-structure", ok, "100 random instances");
  }

  {  // QR: reconstruction, upper-triangular R, nonnegative diagonal,
     // column norms preserved.
    bool ok = true;
    Rng rng(303);
    for (int t = 0; t < 100; ++t) {
      RealSystem rs = detail::random_real_system(rng, 1 + (t % 4), 1 + (t % 4) + (t % 3),
                                                 alphabets[t % 3], 10.0);
      QrFactors qr = qr_householder(rs.H);
      Mat rec = matmul(qr.explicit_q(), qr.R);
      double dev = 0;
      for (std::size_t i = 0; i < rec.data().size(); ++i)
        dev += (rec.data()[i] - rs.H.data()[i]) * (rec.data()[i] - rs.H.data()[i]);
      ok = ok && std::sqrt(dev) <= 1e-9 * frobenius_norm(rs.H);
      for (int i = 0; i < qr.R.rows() && ok; ++i) {
        ok = ok && qr.R(i, i) >= 0.0;
        for (int j = 0; j < i; ++j) ok = ok && qr.R(i, j) == 0.0;
      }
      for (int j = 0; j < rs.H.cols() && ok; ++j) {
        double hn = 0, rn = 0;
        for (int i = 0; i < rs.H.rows(); ++i) hn += rs.H(i, j) * rs.H(i, j);
        for (int i = 0; i <= j; ++i) rn += qr.R(i, j) * qr.R(i, j);
        ok = ok && detail::rel_close(hn, rn, 1e-9);
      }
    }
    check("qr-reconstruction", ok, "100 random instances");
  }

  {  // Zero forcing: the least-squares point satisfies R x = Q^T y, and on a
     // noiseless instance it recovers the transmitted vector.
    bool ok = true;
    Rng rng(404);
    for (int t = 0; t < 100; ++t) {
      RealSystem rs = detail::random_real_system(rng, 2 + (t % 3), 2 + (t % 3),
                                                 alphabets[t % 3], 15.0, t % 2 == 0);
      QrFactors qr = qr_householder(rs.H);
      ZfResult zf = zf_solve(qr, rs.y, rs.cons);
      Vec qty = qr.apply_qt(rs.y);
      double dev = 0;
      for (int i = 0; i < qr.R.cols(); ++i) {
        double acc = qty[i];
        for (int k = i; k < qr.R.cols(); ++k) acc -= qr.R(i, k) * zf.x_ls[k];
        dev = std::max(dev, std::abs(acc));
      }
      ok = ok && dev <= 1e-9 * std::max(1.0, std::sqrt(norm_sq(rs.y)));
      if (t % 2 == 0)
        for (std::size_t i = 0; i < zf.x_ls.size(); ++i)
          ok = ok && std::abs(zf.x_ls[i] - rs.s[i]) <= 1e-6;
    }
    check("zero-forcing", ok, "100 random instances, half noiseless");
  }

  {  // Column ordering: valid permutation, ascending norms, pairs intact.
    bool ok = true;
    Rng rng(505);
    for (int t = 0; t < 100; ++t) {
      RealSystem rs = detail::random_real_system(rng, 2 + (t % 3), 2 + (t % 3),
                                                 alphabets[t % 3], 10.0);
      ColumnOrdering ord = order_columns(rs.H);
      const int m = rs.H.cols(), half = m / 2;
      std::vector<int> seen(m, 0), base_count(half, 0);
      double prev = -1.0;
      for (int j = 0; j < m; ++j) {
        seen[ord.perm[j]]++;
        base_count[ord.perm[j] % half]++;
        double nrm = 0;
        for (int i = 0; i < rs.H.rows(); ++i) nrm += ord.h(i, j) * ord.h(i, j);
        ok = ok && nrm >= prev - 1e-12 * std::max(1.0, nrm);
        prev = nrm;
      }
      for (int j = 0; j < m; ++j) ok = ok && seen[j] == 1;
      for (int b = 0; b < half; ++b) ok = ok && base_count[b] == 2;
    }
    check("column-ordering", ok, "100 random instances");
  }

  {  // Neighborhood: exactly the in-alphabet, non-tabu single-coordinate
     // moves, in fixed order, no duplicates.
    bool ok = true;
    Rng rng(606);
    for (int t = 0; t < 300; ++t) {
      const Constellation& cons = alphabets[t % 3];
      int m = 2 + 2 * (t % 4);
      Vec c(m);
      for (auto& x : c) x = cons.levels()[rng.uniform_int(cons.order_real())];
      TabuList tabu(8);
      for (int p = 0; p < 4; ++p) {
        Vec v(m);
        for (auto& x : v) x = cons.levels()[rng.uniform_int(cons.order_real())];
        auto key = TabuList::key_of(v);
        if (!tabu.contains(key)) tabu.push(key);
      }
      auto moves = enumerate_neighbors(c, cons, tabu);
      std::set<std::pair<int, double>> uniq;
      for (const auto& mv : moves) {
        uniq.insert({mv.pos, mv.step});
        double v = c[mv.pos] + mv.step;
        ok = ok && v >= cons.lo() && v <= cons.hi();
        Vec nb = c;
        nb[mv.pos] = v;
        ok = ok && !tabu.contains(TabuList::key_of(nb));
      }
      ok = ok && uniq.size() == moves.size();
      std::size_t expected = 0;
      for (int pos = 0; pos < m; ++pos)
        for (double st : {cons.spacing(), -cons.spacing()}) {
          double v = c[pos] + st;
          if (v < cons.lo() || v > cons.hi()) continue;
          Vec nb = c;
          nb[pos] = v;
          if (!tabu.contains(TabuList::key_of(nb))) ++expected;
        }
      ok = ok && expected == moves.size();
    }
    check("neighborhood-contract", ok, "300 random states");
  }

  {  // Tabu contract: the accepted candidate is never one of the previous
     // min(i, P) candidates.
    bool ok = true;
    Rng rng(707);
    const int iters = 40, cap = 20;
    for (int t = 0; t < 50; ++t) {
      RealSystem rs = detail::random_real_system(rng, 4, 4, alphabets[1], 12.0);
      OpLedger led;
      SearchTrace tr;
      conventional_ts(rs, iters, cap, led, &tr);
      std::vector<std::string> keys = {TabuList::key_of(tr.x_init)};
      Vec c = tr.x_init;
      for (std::size_t i = 1; i < tr.rows.size(); ++i) {
        c[tr.rows[i].dstar - 1] += tr.rows[i].step;
        std::string k = TabuList::key_of(c);
        std::size_t lo = keys.size() > static_cast<std::size_t>(cap)
                             ? keys.size() - cap : 0;
        for (std::size_t p = lo; p < keys.size(); ++p) ok = ok && keys[p] != k;
        keys.push_back(std::move(k));
      }
    }
    check("tabu-no-revisit", ok, "50 searches x 40 iterations");
  }

  {  // Grouping: partition of the neighborhood by base column pair with
     // matching scale factors.
    bool ok = true;
    Rng rng(808);
    for (int t = 0; t < 300; ++t) {
      RealSystem rs = detail::random_real_system(rng, 4, 4, alphabets[t % 3], 10.0);
      QrFactors qr = qr_householder(rs.H);
      const int m = rs.H.cols(), half = m / 2;
      Vec c(m);
      for (int j = 0; j < m; ++j)
        c[j] = rs.cons.levels()[rng.uniform_int(rs.cons.order_real())];
      TabuList tabu(4);
      auto moves = enumerate_neighbors(c, rs.cons, tabu);
      std::vector<int> perm(m);
      for (int j = 0; j < m; ++j) perm[j] = j;
      auto groups = group_neighbors(moves, perm, half);
      Vec fj(m, 0.0);
      for (int j = 0; j < m; ++j) {
        double acc = 0;
        for (int i = 0; i <= j; ++i) acc += qr.R(i, j) * qr.R(i, j);
        fj[j] = 4.0 * acc;
      }
      std::size_t total = 0;
      ok = ok && groups.size() <= static_cast<std::size_t>(half) && !groups.empty();
      for (const auto& g : groups) {
        ok = ok && !g.empty();
        total += g.size();
        int base0 = moves[g.front()].pos % half;
        for (int idx : g) {
          ok = ok && moves[idx].pos % half == base0;
          ok = ok && detail::rel_close(fj[moves[idx].pos], fj[moves[g.front()].pos], 1e-9);
        }
      }
      ok = ok && total == moves.size();
    }
    check("group-partition", ok, "300 random neighborhoods");
  }

  {  // Group best: the sign-based shortcut picks the same member (and the
     // same metric change) as direct evaluation of every member.
    bool ok = true;
    Rng rng(909);
    long groups_checked = 0;
    while (groups_checked < 20000) {
      RealSystem rs = detail::random_real_system(rng, 4, 4, alphabets[1], 5.0 + 15.0 * rng.uniform01());
      QrFactors qr = qr_householder(rs.H);
      const int m = rs.H.cols(), half = m / 2;
      Vec c(m);
      for (int j = 0; j < m; ++j)
        c[j] = rs.cons.levels()[rng.uniform_int(rs.cons.order_real())];
      Vec qty = qr.apply_qt(rs.y);
      Vec z(m, 0.0);
      for (int i = 0; i < m; ++i) {
        double acc = qty[i];
        for (int k = i; k < m; ++k) acc -= qr.R(i, k) * c[k];
        z[i] = acc;
      }
      Vec fj(m, 0.0);
      for (int j = 0; j < m; ++j) {
        double acc = 0;
        for (int i = 0; i <= j; ++i) acc += qr.R(i, j) * qr.R(i, j);
        fj[j] = rs.cons.spacing() * rs.cons.spacing() * acc;
      }
      TabuList tabu(0);
      auto moves = enumerate_neighbors(c, rs.cons, tabu);
      std::vector<int> perm(m);
      for (int j = 0; j < m; ++j) perm[j] = j;
      for (const auto& g : group_neighbors(moves, perm, half)) {
        int rule_idx = -1;
        double rule_alpha = 0, rule_beta = 0;
        for (int idx : g) {
          const Move& mv = moves[idx];
          double gamma = 0;
          for (int n = 0; n <= mv.pos; ++n) gamma += z[n] * qr.R(n, mv.pos);
          double alpha = mv.step > 0 ? -gamma : gamma;
          if (rule_idx < 0 || alpha < rule_alpha) {
            rule_idx = idx;
            rule_alpha = alpha;
            rule_beta = fj[mv.pos] - 2.0 * mv.step * gamma;
          }
        }
        int direct_idx = -1;
        double direct_beta = 0;
        for (int idx : g) {
          const Move& mv = moves[idx];
          double beta = 0;
          for (int n = 0; n <= mv.pos; ++n) {
            double w = z[n] - mv.step * qr.R(n, mv.pos);
            beta += w * w - z[n] * z[n];
          }
          if (direct_idx < 0 || beta < direct_beta) {
            direct_idx = idx;
            direct_beta = beta;
          }
        }
        ok = ok && rule_idx == direct_idx &&
             detail::rel_close(rule_beta, direct_beta, 1e-9);
        ++groups_checked;
      }
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%ld random groups", groups_checked);
    check("group-best-soundness", ok, buf);
  }

  {  // Incremental state: cached inner products, z and phi agree with fresh
     // recomputation throughout long runs.  The gamma_cache fault must be
     // caught here.
    NgtsAudit agg;
    Rng rng(1010);
    for (int t = 0; t < 30; ++t) {
      RealSystem rs = detail::random_real_system(rng, 4, 4, alphabets[1], 14.0);
      NgtsOptions opt;
      opt.iters = 200;
      opt.tabu_cap = 100;
      opt.audit_every = 10;
      if (fault == "gamma_cache" && t == 0) opt.corrupt_gamma_at = 100;
      OpLedger led;
      NgtsAudit audit;
      ngts(rs, opt, led, nullptr, &audit);
      agg.audits += audit.audits;
      agg.corrupted = agg.corrupted || audit.corrupted;
      agg.max_gamma_dev = std::max(agg.max_gamma_dev, audit.max_gamma_dev);
      agg.max_z_dev = std::max(agg.max_z_dev, audit.max_z_dev);
      agg.max_phi_dev = std::max(agg.max_phi_dev, audit.max_phi_dev);
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%d audits, max gamma dev %.2e%s", agg.audits,
                  agg.max_gamma_dev, agg.corrupted ? " (fault injected)" : "");
    bool gamma_ok = agg.audits > 0 && agg.max_gamma_dev <= 1e-9;
    if (fault == "gamma_cache" && !agg.corrupted) gamma_ok = false;  // hook misfired
    check("incremental-gamma-integrity", gamma_ok, buf);
    std::snprintf(buf, sizeof(buf), "%d audits, max z dev %.2e, max phi dev %.2e",
                  agg.audits, agg.max_z_dev, agg.max_phi_dev);
    check("incremental-state-integrity",
          agg.audits > 0 && agg.max_z_dev <= 1e-9 && agg.max_phi_dev <= 1e-6, buf);
  }

  {  // Path equivalence: all three tabu searches make identical decisions.
    bool ok = true;
    Rng rng(1111);
    for (int t = 0; t < 200; ++t) {
      const Constellation& cons = alphabets[t % 2];
      double snr = t % 2 == 0 ? 6.0 : 14.0;
      ComplexSystem cs = draw_instance(4, 4, cons, snr, rng);
      RealSystem rs = to_real(cs);
      OpLedger l1, l2, l3;
      SearchTrace t1, t2, t3;
      auto r1 = conventional_ts(rs, 60, 30, l1, &t1);
      auto r2 = qr_ts(rs, 60, 30, l2, &t2);
      NgtsOptions opt;
      opt.iters = 60;
      opt.tabu_cap = 30;
      auto r3 = ngts(rs, opt, l3, &t3);
      ok = ok && !first_divergence(t1, t2) && !first_divergence(t1, t3);
      ok = ok && r1.solution == r2.solution && r1.solution == r3.solution;
      ok = ok && detail::rel_close(r1.metric, r2.metric, 1e-6) &&
           detail::rel_close(r1.metric, r3.metric, 1e-6);
    }
    check("search-path-equivalence", ok, "200 instances x 3 detectors");
  }

  {  // Oracles: sphere decoder and exhaustive search agree exactly, and no
     // tabu search returns a better metric than the exact one.
    bool ok = true, ok_bound = true;
    Rng rng(1212);
    for (int t = 0; t < 150; ++t) {
      const Constellation& cons = alphabets[t % 2];
      double snr = t % 2 == 0 ? 6.0 : 12.0;
      ComplexSystem cs = draw_instance(2, 2, cons, snr, rng);
      RealSystem rs = to_real(cs);
      MlResult bf = brute_force_ml(rs);
      MlResult se = se_sphere_decode(rs);
      ok = ok && bf.solution == se.solution &&
           detail::rel_close(bf.metric, se.metric, 1e-9);
      NgtsOptions opt;
      opt.iters = 60;
      opt.tabu_cap = 30;
      OpLedger led;
      auto ng = ngts(rs, opt, led);
      double ng_metric = residual_metric(rs.H, rs.y, ng.solution);
      ok_bound = ok_bound && ng_metric >= se.metric - 1e-9 * std::max(1.0, se.metric);
    }
    check("oracle-agreement", ok, "150 instances, both oracles");
    check("search-respects-oracle-bound", ok_bound, "150 instances");
  }

  {  // Measured per-iteration cost agrees with the analytic models.
    Rng rng(1313);
    OpLedger conv, ng;
    const int trials = 20, iters = 2000;
    for (int t = 0; t < trials; ++t) {
      RealSystem rs = detail::random_real_system(rng, 8, 8, alphabets[1], 14.0);
      OpLedger l1, l2;
      conventional_ts(rs, iters, iters / 2, l1);
      NgtsOptions opt;
      opt.iters = iters;
      opt.tabu_cap = iters / 2;
      ngts(rs, opt, l2);
      conv.merge(l1);
      ng.merge(l2);
    }
    const int n = 16;
    double conv_model = (predict_conventional_ts(n, conv.mean_l(), 1) -
                         predict_conventional_ts(n, conv.mean_l(), 0));
    double ng_model =
        (predict_ngts(n, ng.mean_l(), ng.mean_k(), 1) - predict_ngts(n, ng.mean_l(), ng.mean_k(), 0));
    double conv_ratio = conv.ops_per_iteration() / conv_model;
    double ng_ratio = ng.ops_per_iteration() / ng_model;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "measured/model: conventional %.3f, grouped %.3f",
                  conv_ratio, ng_ratio);
    check("ledger-model-agreement",
          conv_ratio > 0.75 && conv_ratio < 1.25 && ng_ratio > 0.75 && ng_ratio < 1.25,
          buf);
  }

  {  // Closed-form expected update length and its distribution.
    bool ok = true;
    for (int n = 1; n <= 64; ++n) {
      double exact = 0.0;
      for (int i = 1; i <= n; ++i)
        exact += i * (epsilon_cdf(i, n) - epsilon_cdf(i - 1, n));
      ok = ok && std::abs(exact - expected_epsilon(n)) <= 1e-12;
      ok = ok && std::abs(epsilon_cdf(n, n) - 1.0) <= 1e-15;
    }
    Rng rng(1414);
    const int n = 8, samples = 1000000;
    std::vector<int> count(n + 1, 0);
    for (int t = 0; t < samples; ++t) {
      int u = 1 + rng.uniform_int(n), v = 1 + rng.uniform_int(n);
      count[std::min(u, v)]++;
    }
    double cum = 0.0, worst = 0.0;
    for (int i = 1; i <= n; ++i) {
      cum += static_cast<double>(count[i]) / samples;
      worst = std::max(worst, std::abs(cum - epsilon_cdf(i, n)));
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "n=1..64 exact, %d samples, max cdf dev %.4f",
                  samples, worst);
    check("update-length-model", ok && worst <= 0.01, buf);
  }

  return rep;
}

}  // namespace tsdetect
