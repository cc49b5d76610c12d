#pragma once

#include <cstdint>

namespace tsdetect {

struct OpCounts {
  std::uint64_t mults = 0;
  std::uint64_t adds = 0;

  std::uint64_t total() const { return mults + adds; }
  void merge(const OpCounts& o) {
    mults += o.mults;
    adds += o.adds;
  }
};

// Instrumented tally of real multiplications and additions, split into the
// one-off initialization phase (factorizations, initial residuals) and the
// per-iteration search phase.  Divisions are charged as multiplications;
// comparisons, sign flips and copies are free.  Detectors also sample the
// neighborhood size L, group count K and move position d* once per iteration
// so that measured averages can be fed back into the analytic cost models.
struct OpLedger {
  OpCounts init;
  OpCounts search;

  std::uint64_t iterations = 0;
  std::uint64_t sum_l = 0;
  std::uint64_t sum_k = 0;
  std::uint64_t sum_dstar = 0;       // 1-based move positions
  std::uint64_t gamma_rebuilds = 0;  // cached inner products recomputed from scratch

  void sample_iteration(int l, int k, int dstar_1based) {
    ++iterations;
    sum_l += static_cast<std::uint64_t>(l);
    sum_k += static_cast<std::uint64_t>(k);
    sum_dstar += static_cast<std::uint64_t>(dstar_1based);
  }

  std::uint64_t total_mults() const { return init.mults + search.mults; }
  std::uint64_t total_adds() const { return init.adds + search.adds; }
  std::uint64_t total_ops() const { return total_mults() + total_adds(); }

  double mean_l() const { return iterations ? double(sum_l) / double(iterations) : 0.0; }
  double mean_k() const { return iterations ? double(sum_k) / double(iterations) : 0.0; }
  double mean_dstar() const { return iterations ? double(sum_dstar) / double(iterations) : 0.0; }

  // Measured search cost of one iteration, averaged over the run.
  double ops_per_iteration() const {
    return iterations ? double(search.total()) / double(iterations) : 0.0;
  }

  void merge(const OpLedger& o) {
    init.merge(o.init);
    search.merge(o.search);
    iterations += o.iterations;
    sum_l += o.sum_l;
    sum_k += o.sum_k;
    sum_dstar += o.sum_dstar;
    gamma_rebuilds += o.gamma_rebuilds;
  }
};

}  // namespace tsdetect
