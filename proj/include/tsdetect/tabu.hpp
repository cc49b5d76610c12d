#pragma once

#include <cassert>
#include <deque>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "tsdetect/constellation.hpp"
#include "tsdetect/matrix.hpp"

namespace tsdetect {

// Fixed-capacity FIFO of recently visited candidates with O(1) membership.
// Keys are byte strings with one byte per symbol, which is unambiguous for
// the small odd-integer alphabets used here.
class TabuList {
 public:
  explicit TabuList(int capacity) : cap_(capacity) {
    if (capacity < 0) throw std::invalid_argument("tabu capacity must be >= 0");
  }

  static std::string key_of(const Vec& x) {
    std::string k(x.size(), '\0');
    for (std::size_t i = 0; i < x.size(); ++i)
      k[i] = static_cast<char>(static_cast<int>(x[i]));
    return k;
  }

  bool contains(const std::string& key) const { return set_.count(key) != 0; }

  // Inserts a key, evicting the oldest entry beyond capacity.  Callers only
  // push keys that are currently non-tabu, so the list never holds duplicates.
  void push(const std::string& key) {
    if (cap_ == 0) return;
    assert(!contains(key));
    fifo_.push_back(key);
    set_.insert(key);
    if (static_cast<int>(fifo_.size()) > cap_) {
      set_.erase(fifo_.front());
      fifo_.pop_front();
    }
  }

  int size() const { return static_cast<int>(fifo_.size()); }
  int capacity() const { return cap_; }
  const std::deque<std::string>& entries() const { return fifo_; }

 private:
  int cap_;
  std::deque<std::string> fifo_;
  std::unordered_set<std::string> set_;
};

// A single-coordinate move: the neighbor is c with c[pos] replaced by
// c[pos] + step, where step is +/- the alphabet spacing.
struct Move {
  int pos;
  double step;
};

// All admissible neighbors of c, in a fixed order: positions ascending, and
// at each position the +spacing move before the -spacing move.  A move is
// admissible when the new value stays inside the alphabet and the resulting
// vector is not tabu.  Every detector shares this enumeration, so tie-breaks
// by "first encountered" agree across them.
inline std::vector<Move> enumerate_neighbors(const Vec& c, const Constellation& cons,
                                             const TabuList& tabu) {
  std::vector<Move> moves;
  moves.reserve(2 * c.size());
  std::string key = TabuList::key_of(c);
  const double d = cons.spacing();
  for (int pos = 0; pos < static_cast<int>(c.size()); ++pos) {
    const char saved = key[pos];
    for (double step : {d, -d}) {
      double v = c[pos] + step;
      if (v < cons.lo() || v > cons.hi()) continue;
      key[pos] = static_cast<char>(static_cast<int>(v));
      if (!tabu.contains(key)) moves.push_back({pos, step});
    }
    key[pos] = saved;
  }
  return moves;
}

}  // namespace tsdetect
