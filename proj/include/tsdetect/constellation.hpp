#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace tsdetect {

// One real (pulse-amplitude) dimension of a square QAM constellation.
//
// The points are the odd integers {-(q-1), ..., -1, +1, ..., q-1} with
// spacing 2, so a complex Q-QAM symbol is a pair of entries from the q = 2^b
// point alphabet below (Q = q^2).  Bit labels are Gray-coded per dimension,
// which makes adjacent levels differ in exactly one bit.
class Constellation {
 public:
  Constellation(std::string name, int levels_count)
      : name_(std::move(name)) {
    if (levels_count < 2 || (levels_count & (levels_count - 1)) != 0)
      throw std::invalid_argument("constellation: level count must be a power of two >= 2");
    levels_.reserve(levels_count);
    for (int k = 0; k < levels_count; ++k)
      levels_.push_back(static_cast<double>(2 * k - (levels_count - 1)));
    bits_per_level_ = 0;
    for (int q = levels_count; q > 1; q >>= 1) ++bits_per_level_;
  }

  static Constellation qpsk()  { return Constellation("qpsk", 2); }
  static Constellation qam16() { return Constellation("qam16", 4); }
  static Constellation qam64() { return Constellation("qam64", 8); }

  // Accepts the canonical names plus the common reversed spellings.
  static Constellation from_name(const std::string& s) {
    if (s == "qpsk" || s == "4qam" || s == "qam4") return qpsk();
    if (s == "qam16" || s == "16qam") return qam16();
    if (s == "qam64" || s == "64qam") return qam64();
    throw std::invalid_argument("unknown modulation: " + s);
  }

  const std::string& name() const { return name_; }
  const std::vector<double>& levels() const { return levels_; }
  int order_real() const { return static_cast<int>(levels_.size()); }
  int order_complex() const { return order_real() * order_real(); }
  int bits_per_level() const { return bits_per_level_; }
  double spacing() const { return 2.0; }
  double lo() const { return levels_.front(); }
  double hi() const { return levels_.back(); }

  // Mean energy of one complex symbol (two independent uniform levels).
  double symbol_energy() const {
    double acc = 0.0;
    for (double v : levels_) acc += v * v;
    return 2.0 * acc / static_cast<double>(levels_.size());
  }

  // Index of the alphabet point nearest to v; midpoints round to the larger
  // level so quantization is deterministic.
  int nearest_index(double v) const {
    double t = std::floor((v - lo()) / spacing() + 0.5);
    if (t < 0.0) return 0;
    if (t > static_cast<double>(order_real() - 1)) return order_real() - 1;
    return static_cast<int>(t);
  }

  double quantize(double v) const { return levels_[nearest_index(v)]; }

  std::vector<double> quantize(const std::vector<double>& v) const {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = quantize(v[i]);
    return out;
  }

  bool contains(double v) const { return levels_[nearest_index(v)] == v; }

  // Exact index of an alphabet member; non-members are a caller bug.
  int index_of(double v) const {
    int k = nearest_index(v);
    if (levels_[k] != v)
      throw std::invalid_argument("value is not an alphabet point");
    return k;
  }

  // Gray label of the level at index k (adjacent indices differ in one bit).
  std::uint32_t gray_label(int k) const {
    auto u = static_cast<std::uint32_t>(k);
    return u ^ (u >> 1);
  }

  // Hamming distance between the Gray labels of two symbol vectors.
  std::uint64_t bit_errors(const std::vector<double>& a,
                           const std::vector<double>& b) const {
    if (a.size() != b.size())
      throw std::invalid_argument("bit_errors: size mismatch");
    std::uint64_t errs = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      std::uint32_t diff = gray_label(index_of(a[i])) ^ gray_label(index_of(b[i]));
      while (diff != 0) {
        errs += diff & 1u;
        diff >>= 1;
      }
    }
    return errs;
  }

 private:
  std::string name_;
  std::vector<double> levels_;
  int bits_per_level_ = 0;
};

}  // namespace tsdetect
