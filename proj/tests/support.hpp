#pragma once

// Hand-rolled generators for property tests. Seeds are fixed so failures
// reproduce; a failing case prints its index.

#include <random>

#include <Eigen/Dense>

#include "gapcert/numkit.hpp"

namespace gctest {

using gapcert::Matrix;
using gapcert::Vec;

class Gen {
 public:
  explicit Gen(unsigned long long seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  /// Entries spread over several magnitudes, with occasional exact zeros and
  /// repeated values to hit degenerate shapes.
  double entry() {
    const int kind = integer(0, 9);
    if (kind == 0) return 0.0;
    if (kind == 1) return 1.0;
    const double mag = std::pow(10.0, uniform(-3.0, 3.0));
    return integer(0, 1) ? mag : -mag;
  }

  Matrix matrix(std::size_t r, std::size_t c) {
    Matrix m(r, c);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) m(i, j) = entry();
    return m;
  }

  Matrix dense(std::size_t n, double lo = -1.0, double hi = 1.0) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m(i, j) = uniform(lo, hi);
    return m;
  }

  Matrix symmetric(std::size_t n) {
    Matrix m = dense(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j) m(i, j) = m(j, i);
    return m;
  }

  Vec vec(std::size_t n, double lo = -1.0, double hi = 1.0) {
    Vec v(n);
    for (double& x : v) x = uniform(lo, hi);
    return v;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

inline double max_abs(const Matrix& m) {
  double s = 0.0;
  for (double v : m.data()) s = std::max(s, std::abs(v));
  return s;
}

}  // namespace gctest
