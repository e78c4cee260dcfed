#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

// Small dense helpers over std::vector<double>.  Every object in this
// library is tiny (tens of coordinates), so plain vectors beat a matrix
// library here; the solvers that matter (Gaussian elimination, power
// iteration, Frank-Wolfe, Dykstra) are part of the artifact itself.

namespace orthant {

using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vec& a) { return dot(a, a); }

inline double norm(const Vec& a) { return std::sqrt(norm2(a)); }

inline double dist2(const Vec& a, const Vec& b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline double dist(const Vec& a, const Vec& b) { return std::sqrt(dist2(a, b)); }

// a += c * b
inline void axpy(Vec& a, double c, const Vec& b) {
  assert(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += c * b[i];
}

inline void scale(Vec& a, double c) {
  for (double& x : a) x *= c;
}

inline double max_abs(const Vec& a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, x < 0 ? -x : x);
  return m;
}

inline double max_abs_diff(const Vec& a, const Vec& b) {
  assert(a.size() == b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Row-major dense matrix, just enough for the regret engine and tests.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows) * cols, fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * cols_ + j]; }

  double* row(int i) { return a_.data() + static_cast<std::size_t>(i) * cols_; }
  const double* row(int i) const { return a_.data() + static_cast<std::size_t>(i) * cols_; }

  // Largest absolute entry; the scale used for relative tolerances.
  double max_abs() const {
    double m = 0.0;
    for (double x : a_) m = std::max(m, x < 0 ? -x : x);
    return m;
  }

  const std::vector<double>& data() const { return a_; }
  std::vector<double>& data() { return a_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> a_;
};

}  // namespace orthant
