#pragma once

// Dense linear algebra for the small (n <= ~10) matrices that show up in
// Jacobians, monodromy matrices and projector construction.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace gapcert {

using Vec = std::vector<double>;
using Complex = std::complex<double>;

/// Row-major dense matrix with value semantics.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> d);
  /// Interprets `values` as a rows x cols row-major block.
  static Matrix from_row_major(std::size_t rows, std::size_t cols,
                               std::span<const double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  Matrix transpose() const;
  Vec column(std::size_t j) const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Vec operator*(const Matrix& a, std::span<const double> x);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> x);
Vec axpy(double alpha, std::span<const double> x, std::span<const double> y);  // alpha*x + y
Vec subtract(std::span<const double> a, std::span<const double> b);

/// Eigen-decomposition of a symmetric matrix. Eigenvalues ascend; column j of
/// `eigenvectors` belongs to eigenvalues[j]. Ties keep the input coordinate
/// order, so projectors built from leading columns are deterministic.
struct SymSpectrum {
  Vec eigenvalues;
  Matrix eigenvectors;
};

/// max |a_ij - a_ji| relative to max(1, max |a_ij|).
double relative_asymmetry(const Matrix& a);

/// Cyclic Jacobi rotations. Rejects input whose relative asymmetry exceeds 1e-12.
SymSpectrum sym_eigen(const Matrix& a);

double norm_1(const Matrix& b);    // max absolute column sum
double norm_inf(const Matrix& b);  // max absolute row sum
double norm_2(const Matrix& b);    // largest singular value
double det(const Matrix& b);       // partial-pivot elimination

Matrix inverse(const Matrix& a);
Vec solve(const Matrix& a, std::span<const double> rhs);

/// Eigenvalues of a general real matrix: balancing, Hessenberg reduction and
/// Francis double-shift QR. Complex pairs are returned adjacently. Sorted by
/// descending real part (ties by descending imaginary part).
std::vector<Complex> eigenvalues(const Matrix& a);

/// Eigenvector of `a` for an (approximate) eigenvalue via complex inverse
/// iteration; normalized to unit Euclidean norm.
std::vector<Complex> eigenvector(const Matrix& a, Complex eigenvalue);

/// Orthogonal projector onto the span of the first `m` columns of `v`.
Matrix leading_projector(const Matrix& v, std::size_t m);

}  // namespace gapcert
