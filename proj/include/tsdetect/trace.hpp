#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tsdetect/matrix.hpp"
#include "tsdetect/ops.hpp"

namespace tsdetect {

// One accepted move.  dstar is the 1-based coordinate of the move (0 on the
// initial row, which records the zero-forcing start before any iteration).
struct TraceRow {
  int iteration = 0;
  int dstar = 0;
  double step = 0.0;
  double phi = 0.0;             // search metric after the move
  std::uint64_t cum_mults = 0;  // ledger totals when the row was recorded
  std::uint64_t cum_adds = 0;
};

// Iteration-by-iteration record of a tabu search run.  rows[0] always holds
// the initial candidate, so a zero-iteration run still produces one row.
struct SearchTrace {
  Vec x_init;
  std::vector<TraceRow> rows;
  bool early_terminated = false;
};

struct DetectResult {
  Vec solution;
  double metric = 0.0;          // detector's search metric at the solution
  int best_iteration = 0;       // iteration that produced the solution
  bool early_terminated = false;
};

namespace detail {

inline void trace_init(SearchTrace* trace, const Vec& c, double phi, const OpLedger& led) {
  if (!trace) return;
  trace->x_init = c;
  trace->rows.push_back({0, 0, 0.0, phi, led.total_mults(), led.total_adds()});
}

inline void trace_step(SearchTrace* trace, int iter, int pos, double step, double phi,
                       const OpLedger& led) {
  if (!trace) return;
  trace->rows.push_back({iter, pos + 1, step, phi, led.total_mults(), led.total_adds()});
}

}  // namespace detail

// First iteration index at which two traces decide differently (different
// move position or step, or one trace ends early); empty when the decision
// sequences agree.
inline std::optional<int> first_divergence(const SearchTrace& a, const SearchTrace& b) {
  std::size_t n = std::min(a.rows.size(), b.rows.size());
  for (std::size_t i = 1; i < n; ++i) {
    if (a.rows[i].dstar != b.rows[i].dstar || a.rows[i].step != b.rows[i].step)
      return a.rows[i].iteration;
  }
  if (a.rows.size() != b.rows.size())
    return static_cast<int>(n);
  return std::nullopt;
}

}  // namespace tsdetect
