#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace tsdetect {

// Dense row-major matrix over double or std::complex<double>.
template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, T value = T{})
      : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows) * cols, value) {
    if (rows < 0 || cols < 0)
      throw std::invalid_argument("matrix: negative dimension");
  }

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = T{1};
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  T& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
  const T& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * cols_ + j]; }

  std::vector<T>& data() { return a_; }
  const std::vector<T>& data() const { return a_; }

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<T> a_;
};

using Mat = Matrix<double>;
using CMat = Matrix<std::complex<double>>;
using Vec = std::vector<double>;
using CVec = std::vector<std::complex<double>>;

inline double dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline double norm_sq(const Vec& a) {
  double acc = 0.0;
  for (double v : a) acc += v * v;
  return acc;
}

template <class T>
std::vector<T> matvec(const Matrix<T>& m, const std::vector<T>& x) {
  if (static_cast<int>(x.size()) != m.cols())
    throw std::invalid_argument("matvec: size mismatch");
  std::vector<T> y(m.rows(), T{});
  for (int i = 0; i < m.rows(); ++i) {
    T acc{};
    for (int j = 0; j < m.cols(); ++j) acc += m(i, j) * x[j];
    y[i] = acc;
  }
  return y;
}

template <class T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: size mismatch");
  Matrix<T> c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int k = 0; k < a.cols(); ++k) {
      T aik = a(i, k);
      for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

template <class T>
Matrix<T> transpose(const Matrix<T>& m) {
  Matrix<T> t(m.cols(), m.rows());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
  return t;
}

inline double frobenius_norm(const Mat& m) {
  double acc = 0.0;
  for (double v : m.data()) acc += v * v;
  return std::sqrt(acc);
}

// Residual energy ||y - H x||^2, the maximum-likelihood decision metric.
inline double residual_metric(const Mat& h, const Vec& y, const Vec& x) {
  if (static_cast<int>(y.size()) != h.rows() || static_cast<int>(x.size()) != h.cols())
    throw std::invalid_argument("residual_metric: size mismatch");
  double acc = 0.0;
  for (int i = 0; i < h.rows(); ++i) {
    double r = y[i];
    for (int j = 0; j < h.cols(); ++j) r -= h(i, j) * x[j];
    acc += r * r;
  }
  return acc;
}

}  // namespace tsdetect
