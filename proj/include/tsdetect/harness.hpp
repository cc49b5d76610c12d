#pragma once

#include <chrono>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "tsdetect/complexity.hpp"
#include "tsdetect/model.hpp"
#include "tsdetect/ngts.hpp"
#include "tsdetect/oracle.hpp"
#include "tsdetect/ts.hpp"

namespace tsdetect {

enum class DetectorKind { conventional_ts, qr_ts, ngts, ngts_co, se_sd, brute_force };

inline const char* detector_name(DetectorKind k) {
  switch (k) {
    case DetectorKind::conventional_ts: return "conventional_ts";
    case DetectorKind::qr_ts: return "qr_ts";
    case DetectorKind::ngts: return "ngts";
    case DetectorKind::ngts_co: return "ngts_co";
    case DetectorKind::se_sd: return "se_sd";
    case DetectorKind::brute_force: return "brute_force";
  }
  return "?";
}

inline DetectorKind parse_detector(const std::string& s) {
  if (s == "conventional_ts") return DetectorKind::conventional_ts;
  if (s == "qr_ts") return DetectorKind::qr_ts;
  if (s == "ngts") return DetectorKind::ngts;
  if (s == "ngts_co") return DetectorKind::ngts_co;
  if (s == "se_sd") return DetectorKind::se_sd;
  if (s == "brute_force") return DetectorKind::brute_force;
  throw std::invalid_argument("unknown detector: " + s);
}

inline bool is_tabu_kind(DetectorKind k) {
  return k == DetectorKind::conventional_ts || k == DetectorKind::qr_ts ||
         k == DetectorKind::ngts || k == DetectorKind::ngts_co;
}

struct ExperimentConfig {
  int nt = 4, nr = 4;
  std::string modulation = "qam16";
  std::vector<double> snr_db = {10.0};
  int trials = 1000;
  int iters = 100;
  int tabu = -1;  // -1: half the iteration budget
  std::vector<std::string> detectors = {"conventional_ts", "qr_ts", "ngts"};
  bool ordering = false;  // run plain ngts with column ordering (reported as ngts_co)
  std::uint64_t seed = 1;
  int threads = 1;
  bool noiseless = false;  // draw instances without the noise term
  std::string out;         // CSV path (ber/complexity) or file prefix (trace)

  int effective_tabu() const { return tabu >= 0 ? tabu : iters / 2; }
};

// One CSV row: a detector's merged results over all trials at one SNR point.
struct ResultRow {
  std::string detector;
  int nt = 0, nr = 0;
  std::string modulation;
  double snr_db = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t bit_errors = 0;
  double ber = 0.0;
  std::uint64_t iters = 0, tabu = 0;
  std::uint64_t mults = 0, adds = 0, ops_total = 0;
  double mean_k = 0.0, mean_l = 0.0, mean_dstar = 0.0;
  double wall_seconds = 0.0;
};

inline std::string csv_header() {
  return "detector,nt,nr,modulation,snr_db,trials,bit_errors,ber,I,P,mults,adds,"
         "ops_total,mean_K,mean_L,mean_dstar,wall_seconds";
}

inline std::string to_csv(const ResultRow& r) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "%s,%d,%d,%s,%g,%llu,%llu,%.8e,%llu,%llu,%llu,%llu,%llu,%.6f,%.6f,%.6f,%.6f",
                r.detector.c_str(), r.nt, r.nr, r.modulation.c_str(), r.snr_db,
                static_cast<unsigned long long>(r.trials),
                static_cast<unsigned long long>(r.bit_errors), r.ber,
                static_cast<unsigned long long>(r.iters),
                static_cast<unsigned long long>(r.tabu),
                static_cast<unsigned long long>(r.mults),
                static_cast<unsigned long long>(r.adds),
                static_cast<unsigned long long>(r.ops_total), r.mean_k, r.mean_l,
                r.mean_dstar, r.wall_seconds);
  return std::string(buf);
}

inline void write_csv(const std::string& path, const std::vector<ResultRow>& rows) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open output file: " + path);
  f << csv_header() << '\n';
  for (const auto& r : rows) f << to_csv(r) << '\n';
  if (!f) throw std::runtime_error("write failed: " + path);
}

namespace detail {

inline Vec run_detector(DetectorKind kind, const RealSystem& rs,
                        const ExperimentConfig& cfg, OpLedger& led,
                        SearchTrace* trace = nullptr, NgtsAudit* audit = nullptr) {
  switch (kind) {
    case DetectorKind::conventional_ts:
      return conventional_ts(rs, cfg.iters, cfg.effective_tabu(), led, trace).solution;
    case DetectorKind::qr_ts:
      return qr_ts(rs, cfg.iters, cfg.effective_tabu(), led, trace).solution;
    case DetectorKind::ngts:
    case DetectorKind::ngts_co: {
      NgtsOptions opt;
      opt.iters = cfg.iters;
      opt.tabu_cap = cfg.effective_tabu();
      opt.ordering = (kind == DetectorKind::ngts_co) || cfg.ordering;
      return ngts(rs, opt, led, trace, audit).solution;
    }
    case DetectorKind::se_sd:
      return se_sphere_decode(rs, &led).solution;
    case DetectorKind::brute_force:
      return brute_force_ml(rs, 1000000, &led).solution;
  }
  throw std::logic_error("unreachable detector kind");
}

struct Accum {
  std::uint64_t bit_errors = 0;
  OpLedger led;
  double wall = 0.0;

  void merge(const Accum& o) {
    bit_errors += o.bit_errors;
    led.merge(o.led);
    wall += o.wall;
  }
};

inline std::vector<DetectorKind> validate_config(const ExperimentConfig& cfg) {
  if (cfg.nt < 1 || cfg.nr < 1)
    throw std::invalid_argument("config: antenna counts must be >= 1");
  if (cfg.trials < 1) throw std::invalid_argument("config: trials must be >= 1");
  if (cfg.iters < 0) throw std::invalid_argument("config: iters must be >= 0");
  if (cfg.threads < 1) throw std::invalid_argument("config: threads must be >= 1");
  if (cfg.snr_db.empty()) throw std::invalid_argument("config: need at least one snr point");
  if (cfg.detectors.empty()) throw std::invalid_argument("config: need at least one detector");
  Constellation cons = Constellation::from_name(cfg.modulation);
  std::vector<DetectorKind> kinds;
  for (const auto& d : cfg.detectors) kinds.push_back(parse_detector(d));
  for (DetectorKind k : kinds) {
    if (k == DetectorKind::brute_force) {
      std::uint64_t total = 1;
      for (int j = 0; j < 2 * cfg.nt; ++j) {
        if (total > 1000000ULL / cons.order_real())
          throw std::length_error("config: brute_force candidate count exceeds the size guard");
        total *= static_cast<std::uint64_t>(cons.order_real());
      }
    }
  }
  return kinds;
}

// Shared Monte-Carlo engine: for every SNR point, all detectors run on the
// same drawn instances (common random numbers), with one deterministic
// substream per trial.  Worker threads split trials round-robin and their
// partial sums merge in worker order, so results do not depend on timing.
inline std::vector<ResultRow> run_grid(const ExperimentConfig& cfg) {
  auto kinds = validate_config(cfg);
  Constellation cons = Constellation::from_name(cfg.modulation);
  const int n_snr = static_cast<int>(cfg.snr_db.size());
  const int n_det = static_cast<int>(kinds.size());
  const int n_threads = std::min(cfg.threads, cfg.trials);

  std::vector<std::vector<Accum>> partial(
      static_cast<std::size_t>(n_threads),
      std::vector<Accum>(static_cast<std::size_t>(n_snr) * n_det));

  auto worker = [&](int w) {
    auto& grid = partial[w];
    for (int si = 0; si < n_snr; ++si) {
      for (int t = w; t < cfg.trials; t += n_threads) {
        std::uint64_t stream =
            static_cast<std::uint64_t>(si) * cfg.trials + static_cast<std::uint64_t>(t);
        Rng rng = Rng::substream(cfg.seed, stream);
        ComplexSystem cs =
            draw_instance(cfg.nt, cfg.nr, cons, cfg.snr_db[si], rng, cfg.noiseless);
        RealSystem rs = to_real(cs);
        for (int di = 0; di < n_det; ++di) {
          Accum& acc = grid[static_cast<std::size_t>(si) * n_det + di];
          auto t0 = std::chrono::steady_clock::now();
          OpLedger led;
          Vec sol = run_detector(kinds[di], rs, cfg, led);
          acc.wall += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                          .count();
          acc.bit_errors += cons.bit_errors(sol, rs.s);
          acc.led.merge(led);
        }
      }
    }
  };

  if (n_threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int w = 0; w < n_threads; ++w) pool.emplace_back(worker, w);
    for (auto& th : pool) th.join();
  }

  std::vector<ResultRow> rows;
  const std::uint64_t bits_per_trial =
      static_cast<std::uint64_t>(2 * cfg.nt) * cons.bits_per_level();
  for (int si = 0; si < n_snr; ++si) {
    for (int di = 0; di < n_det; ++di) {
      Accum merged;
      for (int w = 0; w < n_threads; ++w)
        merged.merge(partial[w][static_cast<std::size_t>(si) * n_det + di]);
      ResultRow r;
      r.detector = detector_name(kinds[di]);
      if (kinds[di] == DetectorKind::ngts && cfg.ordering) r.detector = "ngts_co";
      r.nt = cfg.nt;
      r.nr = cfg.nr;
      r.modulation = cons.name();
      r.snr_db = cfg.snr_db[si];
      r.trials = static_cast<std::uint64_t>(cfg.trials);
      r.bit_errors = merged.bit_errors;
      r.ber = static_cast<double>(merged.bit_errors) /
              (static_cast<double>(bits_per_trial) * cfg.trials);
      if (is_tabu_kind(kinds[di])) {
        r.iters = static_cast<std::uint64_t>(cfg.iters);
        r.tabu = static_cast<std::uint64_t>(cfg.effective_tabu());
      }
      r.mults = merged.led.total_mults();
      r.adds = merged.led.total_adds();
      r.ops_total = merged.led.total_ops();
      r.mean_k = merged.led.mean_k();
      r.mean_l = merged.led.mean_l();
      r.mean_dstar = merged.led.mean_dstar();
      r.wall_seconds = merged.wall;
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

}  // namespace detail

// Bit-error-rate sweep over the configured SNR points; writes cfg.out when set.
inline std::vector<ResultRow> run_ber(const ExperimentConfig& cfg) {
  auto rows = detail::run_grid(cfg);
  if (!cfg.out.empty()) write_csv(cfg.out, rows);
  return rows;
}

// Same engine viewed through the operation ledgers; writes cfg.out when set.
inline std::vector<ResultRow> run_complexity(const ExperimentConfig& cfg) {
  auto rows = detail::run_grid(cfg);
  if (!cfg.out.empty()) write_csv(cfg.out, rows);
  return rows;
}

// Human-readable reduction summary of complexity rows: per SNR point, each
// detector's total operation count per trial against the first-listed
// detector as the baseline.
inline std::vector<std::string> complexity_summary(const std::vector<ResultRow>& rows,
                                                   std::uint64_t trials) {
  std::vector<std::string> lines;
  if (rows.empty() || trials == 0) return lines;
  double prev_snr = rows.front().snr_db;
  double baseline = 0.0;
  std::string baseline_name;
  bool first_in_block = true;
  for (const auto& r : rows) {
    if (r.snr_db != prev_snr) {
      first_in_block = true;
      prev_snr = r.snr_db;
    }
    double per_trial = static_cast<double>(r.ops_total) / static_cast<double>(trials);
    char buf[256];
    if (first_in_block) {
      baseline = per_trial;
      baseline_name = r.detector;
      std::snprintf(buf, sizeof(buf), "snr %g dB  %-16s %14.1f ops/trial  (baseline)",
                    r.snr_db, r.detector.c_str(), per_trial);
      first_in_block = false;
    } else {
      std::snprintf(buf, sizeof(buf),
                    "snr %g dB  %-16s %14.1f ops/trial  %5.1f%% reduction vs %s",
                    r.snr_db, r.detector.c_str(), per_trial,
                    reduction_percent(baseline, per_trial), baseline_name.c_str());
    }
    lines.emplace_back(buf);
  }
  return lines;
}

struct TraceRunResult {
  std::vector<std::string> files;
  std::vector<std::string> summary;
  std::vector<SearchTrace> traces;
};

// Runs every configured detector on one deterministic instance (substream 0
// of the seed, first SNR point), writes one per-detector trace CSV under the
// cfg.out prefix, and reports where each decision sequence first diverges
// from the first-listed detector's.
inline TraceRunResult run_trace(const ExperimentConfig& cfg) {
  auto kinds = detail::validate_config(cfg);
  for (DetectorKind k : kinds)
    if (!is_tabu_kind(k))
      throw std::invalid_argument("run_trace: trace requires iterative detectors");
  Constellation cons = Constellation::from_name(cfg.modulation);

  Rng rng = Rng::substream(cfg.seed, 0);
  ComplexSystem cs = draw_instance(cfg.nt, cfg.nr, cons, cfg.snr_db.front(), rng,
                                   cfg.noiseless);
  RealSystem rs = to_real(cs);

  const std::string prefix = cfg.out.empty() ? "trace_" : cfg.out;
  TraceRunResult out;
  for (std::size_t di = 0; di < kinds.size(); ++di) {
    OpLedger led;
    SearchTrace trace;
    detail::run_detector(kinds[di], rs, cfg, led, &trace);
    std::string path = prefix + detector_name(kinds[di]) + ".csv";
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open output file: " + path);
    f << "iteration,d_star,step,phi,cum_mults,cum_adds\n";
    for (const auto& row : trace.rows) {
      char buf[192];
      std::snprintf(buf, sizeof(buf), "%d,%d,%g,%.12e,%llu,%llu", row.iteration,
                    row.dstar, row.step, row.phi,
                    static_cast<unsigned long long>(row.cum_mults),
                    static_cast<unsigned long long>(row.cum_adds));
      f << buf << '\n';
    }
    if (!f) throw std::runtime_error("write failed: " + path);
    out.files.push_back(path);
    out.traces.push_back(std::move(trace));
  }

  for (std::size_t di = 1; di < kinds.size(); ++di) {
    char buf[256];
    auto div = first_divergence(out.traces[0], out.traces[di]);
    if (div) {
      std::snprintf(buf, sizeof(buf), "%s vs %s: first divergence at iteration %d",
                    detector_name(kinds[di]), detector_name(kinds[0]), *div);
    } else {
      double max_dev = 0.0;
      for (std::size_t i = 0; i < out.traces[0].rows.size(); ++i) {
        double a = out.traces[0].rows[i].phi, b = out.traces[di].rows[i].phi;
        max_dev = std::max(max_dev, std::abs(a - b) / std::max(1.0, std::abs(a)));
      }
      std::snprintf(buf, sizeof(buf),
                    "%s vs %s: identical decision sequences over %d iterations "
                    "(max metric deviation %.2e)",
                    detector_name(kinds[di]), detector_name(kinds[0]),
                    static_cast<int>(out.traces[0].rows.size()) - 1, max_dev);
    }
    out.summary.emplace_back(buf);
  }
  return out;
}

}  // namespace tsdetect
