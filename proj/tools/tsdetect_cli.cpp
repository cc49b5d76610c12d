// Command-line front end for the MIMO tabu-search detection toolkit.
//
// Subcommands:
//   ber         Monte-Carlo bit-error-rate sweep over SNR points
//   complexity  same engine, reported through the operation ledgers
//   trace       per-iteration decision trace of one deterministic instance
//   selftest    invariant battery over every module
//
// All experiment options can also come from a flat key=value config file
// (--config FILE); command-line flags override file values.

#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tsdetect/selftest.hpp"
#include "tsdetect/tsdetect.hpp"

namespace {

// Flat key=value file ('#' starts a comment).  Recognized keys mirror the
// long option names: nt, nr, mod, snr, trials, iters, tabu, detectors,
// ordering, seed, out, threads, noiseless.  Lists use commas.
void apply_config_file(const std::string& path, tsdetect::ExperimentConfig& cfg) {
  std::ifstream f(path);
  if (!f) throw CLI::ValidationError("--config", "cannot open config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto notspace = [](unsigned char c) { return !std::isspace(c); };
    line.erase(line.begin(), std::find_if(line.begin(), line.end(), notspace));
    line.erase(std::find_if(line.rbegin(), line.rend(), notspace).base(), line.end());
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError("--config", "line " + std::to_string(lineno) +
                                                 ": expected key=value");
    std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    auto trim = [&](std::string& s) {
      s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
      s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
    };
    trim(key);
    trim(value);
    auto split_list = [](const std::string& s) {
      std::vector<std::string> out;
      std::stringstream ss(s);
      std::string item;
      while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
      return out;
    };
    try {
      if (key == "nt") cfg.nt = std::stoi(value);
      else if (key == "nr") cfg.nr = std::stoi(value);
      else if (key == "mod") cfg.modulation = value;
      else if (key == "snr") {
        cfg.snr_db.clear();
        for (const auto& s : split_list(value)) cfg.snr_db.push_back(std::stod(s));
      } else if (key == "trials") cfg.trials = std::stoi(value);
      else if (key == "iters") cfg.iters = std::stoi(value);
      else if (key == "tabu") cfg.tabu = std::stoi(value);
      else if (key == "detectors") cfg.detectors = split_list(value);
      else if (key == "ordering") cfg.ordering = (value == "1" || value == "true");
      else if (key == "seed") cfg.seed = std::stoull(value);
      else if (key == "out") cfg.out = value;
      else if (key == "threads") cfg.threads = std::stoi(value);
      else if (key == "noiseless") cfg.noiseless = (value == "1" || value == "true");
      else
        throw CLI::ValidationError("--config", "line " + std::to_string(lineno) +
                                                   ": unknown key: " + key);
    } catch (const std::invalid_argument&) {
      throw CLI::ValidationError("--config", "line " + std::to_string(lineno) +
                                                 ": bad value for " + key);
    }
  }
}

void add_experiment_options(CLI::App* sub, tsdetect::ExperimentConfig& cfg,
                            std::string& config_path) {
  sub->add_option("--config", config_path, "flat key=value config file");
  sub->add_option("--nt", cfg.nt, "transmit antennas");
  sub->add_option("--nr", cfg.nr, "receive antennas");
  sub->add_option("--mod", cfg.modulation, "modulation: qpsk, qam16, qam64");
  sub->add_option("--snr", cfg.snr_db, "SNR points in dB")->delimiter(',');
  sub->add_option("--trials", cfg.trials, "Monte-Carlo trials per SNR point");
  sub->add_option("--iters", cfg.iters, "tabu search iterations I");
  sub->add_option("--tabu", cfg.tabu, "tabu list length P (default: iters/2)");
  sub->add_option("--detectors", cfg.detectors,
                  "detectors: conventional_ts, qr_ts, ngts, ngts_co, se_sd, brute_force")
      ->delimiter(',');
  sub->add_flag("--ordering", cfg.ordering,
                "run ngts with ascending-norm column ordering (reported as ngts_co)");
  sub->add_option("--seed", cfg.seed, "master RNG seed");
  sub->add_option("--out", cfg.out, "output CSV path (trace: file prefix)");
  sub->add_option("--threads", cfg.threads, "worker threads over trials");
  sub->add_flag("--noiseless", cfg.noiseless, "draw instances without noise");
}

// CLI11 parses flags after the config file has seeded the defaults, so
// command-line values win.  The prescan only needs --config itself.
std::string prescan_config(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) return argv[i + 1];
    if (a.rfind("--config=", 0) == 0) return a.substr(9);
  }
  return "";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MIMO symbol detection: tabu search, grouped tabu search, exact oracles"};
  app.require_subcommand(1);

  tsdetect::ExperimentConfig cfg;
  std::string config_path;
  std::string fault;

  std::string pre = prescan_config(argc, argv);
  if (!pre.empty()) {
    try {
      apply_config_file(pre, cfg);
    } catch (const CLI::Error& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return 2;
    }
  }

  CLI::App* ber = app.add_subcommand("ber", "bit-error-rate sweep");
  add_experiment_options(ber, cfg, config_path);
  CLI::App* cx = app.add_subcommand("complexity", "operation-count comparison");
  add_experiment_options(cx, cfg, config_path);
  CLI::App* tr = app.add_subcommand("trace", "per-iteration decision trace");
  add_experiment_options(tr, cfg, config_path);
  CLI::App* st = app.add_subcommand("selftest", "module invariant battery");
  st->add_option("--fault", fault, "inject a named fault (gamma_cache); selftest must fail");

  CLI11_PARSE(app, argc, argv);

  try {
    if (ber->parsed()) {
      if (cfg.out.empty()) cfg.out = "ber.csv";
      auto rows = tsdetect::run_ber(cfg);
      std::printf("%s\n", tsdetect::csv_header().c_str());
      for (const auto& r : rows) std::printf("%s\n", tsdetect::to_csv(r).c_str());
      std::printf("wrote %s\n", cfg.out.c_str());
    } else if (cx->parsed()) {
      if (cfg.out.empty()) cfg.out = "complexity.csv";
      auto rows = tsdetect::run_complexity(cfg);
      std::printf("%s\n", tsdetect::csv_header().c_str());
      for (const auto& r : rows) std::printf("%s\n", tsdetect::to_csv(r).c_str());
      for (const auto& line :
           tsdetect::complexity_summary(rows, static_cast<std::uint64_t>(cfg.trials)))
        std::printf("%s\n", line.c_str());
      std::printf("wrote %s\n", cfg.out.c_str());
    } else if (tr->parsed()) {
      if (cfg.out.empty()) cfg.out = "trace_";
      auto res = tsdetect::run_trace(cfg);
      for (const auto& f : res.files) std::printf("wrote %s\n", f.c_str());
      for (const auto& line : res.summary) std::printf("%s\n", line.c_str());
    } else if (st->parsed()) {
      auto rep = tsdetect::selftest(fault);
      for (const auto& c : rep.checks)
        std::printf("[%s] %s (%s)\n", c.pass ? "pass" : "FAIL", c.name.c_str(),
                    c.detail.c_str());
      std::printf("%s\n", rep.all_pass() ? "selftest passed" : "selftest FAILED");
      return rep.all_pass() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
