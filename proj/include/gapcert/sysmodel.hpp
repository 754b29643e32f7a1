#pragma once

// Vector fields of the form  x' = -A x + F(x)  with symmetric A, the two
// built-in model families (satellite, cell process), an analytic Hopf test
// model, linear changes of variables and expression-defined systems.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gapcert/numkit.hpp"

namespace gapcert {

/// Axis-aligned box lower < x < upper (open); most checks use its closure.
class BoxDomain {
 public:
  BoxDomain() = default;
  BoxDomain(Vec lower, Vec upper);

  std::size_t dim() const noexcept { return lower_.size(); }
  const Vec& lower() const noexcept { return lower_; }
  const Vec& upper() const noexcept { return upper_; }
  double width(std::size_t i) const { return upper_[i] - lower_[i]; }
  Vec center() const;
  double diameter() const;
  /// Closed-box membership with per-coordinate slack `tol * (1 + width_i)`.
  bool contains_closed(std::span<const double> x, double tol = 0.0) const;
  bool contains_open(std::span<const double> x) const;
  /// Maps unit-cube coordinates u in [0,1]^n to the box.
  Vec at_fraction(std::span<const double> u) const;

  friend bool operator==(const BoxDomain&, const BoxDomain&) = default;

 private:
  Vec lower_;
  Vec upper_;
};

enum class ModelFamily { Satellite, Cell, Hopf, Custom };

using VectorMap = std::function<Vec(const Vec&)>;
using MatrixMap = std::function<Matrix(const Vec&)>;

/// Immutable after construction; evaluation is reentrant.
class OdeSystem {
 public:
  OdeSystem(std::string label, Matrix a, VectorMap f, MatrixMap jac_f, bool analytic,
            bool analytic_jacobian);

  std::size_t dim() const noexcept { return a_.rows(); }
  const Matrix& A() const noexcept { return a_; }
  const std::string& label() const noexcept { return label_; }
  bool analytic() const noexcept { return analytic_; }
  bool analytic_jacobian() const noexcept { return analytic_jacobian_; }

  Vec nonlinearity(const Vec& x) const { return f_(x); }
  Matrix nonlinearity_jacobian(const Vec& x) const { return jac_f_(x); }
  /// f(x) = -A x + F(x)
  Vec field(const Vec& x) const;
  /// f'(x) = -A + F'(x)
  Matrix jacobian(const Vec& x) const;

  ModelFamily family = ModelFamily::Custom;
  /// Named scalar parameters of the family (mu1, k, omega, ...).
  std::map<std::string, double> params;

 private:
  std::string label_;
  Matrix a_;
  VectorMap f_;
  MatrixMap jac_f_;
  bool analytic_;
  bool analytic_jacobian_;
};

/// Central differences with step 1e-6 * (1 + ||x||).
Matrix finite_difference_jacobian(const VectorMap& f, const Vec& x);

/// Largest relative deviation between jac_F and finite differences of F over
/// the given points: max_i ||J_fd - J|| / max(1, ||J||) (max-entry norms).
double jacobian_consistency(const OdeSystem& sys, const std::vector<Vec>& points);

// ---------------------------------------------------------------- satellite

/// Scalar control function g for the satellite model together with the
/// bound M of 0 < g < M.
struct AdmissibleFunction {
  std::function<double(double)> g;
  std::function<double(double)> dg;
  double bound = 0.0;
  std::string label;
};

/// g(s) = arccot(s - nu) with nu = pi / (2 mu1 mu2 mu3); M = pi.
AdmissibleFunction default_satellite_control(double mu1, double mu2, double mu3);

/// Samples 0 < g < M and -1 <= g' < 0 densely on [lo, hi] and on a
/// logarithmic far field; throws Rejected naming the violated bound.
void check_admissible(const AdmissibleFunction& g, double lo, double hi);

OdeSystem satellite_system(double mu1, double mu2, double mu3, const AdmissibleFunction& g);
BoxDomain satellite_domain(double mu1, double mu2, double mu3, double bound);

// --------------------------------------------------------------------- cell

struct CellParams {
  double k = 3.0;
  double q = 0.1;
  double T = 10.0;
  double L = 1e6;
};

namespace cell {
double R(double z);
double R_z(double z);
double G(const CellParams& p, double y, double z);
double G_y(const CellParams& p, double y, double z);
double G_z(const CellParams& p, double y, double z);
/// Positive root of G(y, 0) = 1/k.
double y0(const CellParams& p);
}  // namespace cell

OdeSystem cell_system(const CellParams& p);
BoxDomain cell_domain(const CellParams& p);

// ------------------------------------------------------- change of variables

/// p = C p_new. Construction checks ||C C^{-1} - I||_2 <= 1e-10.
class LinearChange {
 public:
  explicit LinearChange(Matrix c);
  const Matrix& c() const noexcept { return c_; }
  const Matrix& c_inv() const noexcept { return c_inv_; }
  LinearChange inverse() const;

 private:
  LinearChange(Matrix c, Matrix c_inv) : c_(std::move(c)), c_inv_(std::move(c_inv)) {}
  Matrix c_;
  Matrix c_inv_;
};

/// y = u - z, i.e. C = [[1,0,0],[0,1,-1],[0,0,1]].
LinearChange cell_change();

/// The system in new coordinates p_new = C^{-1} p. The symmetric linear part A
/// is kept; the remainder of C^{-1} A C moves into the nonlinearity:
/// F_new(y) = C^{-1} F(C y) + (A - C^{-1} A C) y.
OdeSystem apply_change(const OdeSystem& sys, const LinearChange& ch);

// --------------------------------------------------------------------- hopf

/// (x1 - w x2 - x1 r^2, w x1 + x2 - x2 r^2, -lz x3): unit-circle cycle with
/// period 2 pi / |w| and multipliers {1, e^{-2T}, e^{-lz T}}.
OdeSystem hopf_oracle(double omega, double lambda_z);

// ------------------------------------------------------------------- custom

/// One expression per component over x1..xn; A must be symmetric n x n.
/// Jacobian by central differences. Probes the field at `probe` (or the
/// origin) and rejects non-finite values.
OdeSystem parse_system(const std::vector<std::string>& expressions, const Matrix& a,
                       const std::optional<Vec>& probe = std::nullopt,
                       std::string label = "custom");

/// Same, with one expression per line of `text`.
OdeSystem parse_system_text(const std::string& text, const Matrix& a,
                            const std::optional<Vec>& probe = std::nullopt);

}  // namespace gapcert
