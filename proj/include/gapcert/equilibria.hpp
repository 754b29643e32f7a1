#pragma once

// Singular points: multistart damped Newton, uniqueness evidence and
// instability (Routh-Hurwitz for n = 3, eigenvalues in general).

#include <optional>
#include <vector>

#include "gapcert/numkit.hpp"
#include "gapcert/sysmodel.hpp"

namespace gapcert {

/// char(-J)(s) = s^3 + a1 s^2 + a2 s + a3.
struct RouthHurwitz {
  double a1 = 0.0, a2 = 0.0, a3 = 0.0;
  bool unstable = false;  // a1 < 0 or a1 a2 - a3 < 0 or a3 < 0
  bool stable = false;    // all a_i > 0 and a1 a2 > a3
  /// Smallest |.| of a1, a3, a1 a2 - a3 relative to the coefficient scale;
  /// verdicts near zero are numerically fragile.
  double margin = 0.0;

  friend bool operator==(const RouthHurwitz&, const RouthHurwitz&) = default;
};

RouthHurwitz routh_hurwitz_3(const Matrix& jac);

struct SpectrumCheck {
  std::vector<Complex> spectrum;  // descending real part
  bool unstable = false;
  int positive_real = 0;
  bool exactly_two_positive = false;
};

SpectrumCheck instability_spectrum(const Matrix& jac);

struct SatelliteInstability {
  double lhs = 0.0;  // -g'(nu) + l1 l2 l3
  double rhs = 0.0;  // (l1+l2+l3)(l1 l2 + l1 l3 + l2 l3)
  bool unstable = false;

  friend bool operator==(const SatelliteInstability&, const SatelliteInstability&) = default;
};

SatelliteInstability satellite_instability(double mu1, double mu2, double mu3, double dg_nu);

/// Derived quantities of the cell Jacobian at an equilibrium:
/// b = -R'(z), c = G_y, d = G_z.
struct CellQuantities {
  double b = 0.0, c = 0.0, d = 0.0;
  double b_minus_kq = 0.0;
  double c_times_b_minus_kq = 0.0;

  friend bool operator==(const CellQuantities&, const CellQuantities&) = default;
};

CellQuantities cell_quantities(const CellParams& p, const Vec& x_s);

struct Equilibrium {
  Vec x;
  double residual = 0.0;
  Matrix jac;
  std::vector<Complex> spectrum;
  double det = 0.0;
  bool unstable = false;
  int positive_real = 0;
  std::optional<RouthHurwitz> rh;
  bool unique_in_domain = false;
  int basin_count = 0;  // starts that converged here
  int starts = 0;

  friend bool operator==(const Equilibrium&, const Equilibrium&) = default;
};

/// Damped Newton (halving line search, <= 100 iterations) from a lattice of
/// at least 3 points per axis (enough for `starts` in total) plus the box
/// center. Roots in the closed box are merged within 1e-6 * diam, in start
/// order. An empty result means no start converged.
std::vector<Equilibrium> find_equilibria(const OdeSystem& sys, const BoxDomain& dom,
                                         int starts = 27);

}  // namespace gapcert
