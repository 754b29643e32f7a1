#include "gapcert/equilibria.hpp"

#include <algorithm>
#include <cmath>

#include "gapcert/error.hpp"

namespace gapcert {

RouthHurwitz routh_hurwitz_3(const Matrix& j) {
  if (j.rows() != 3 || j.cols() != 3) invalid_argument("Routh-Hurwitz test needs a 3x3 matrix");
  RouthHurwitz r;
  // char(-J)(s) = det(s I + J): a1 = tr J, a2 = sum of principal 2x2 minors, a3 = det J.
  r.a1 = j(0, 0) + j(1, 1) + j(2, 2);
  r.a2 = (j(0, 0) * j(1, 1) - j(0, 1) * j(1, 0)) + (j(0, 0) * j(2, 2) - j(0, 2) * j(2, 0)) +
         (j(1, 1) * j(2, 2) - j(1, 2) * j(2, 1));
  r.a3 = det(j);
  // The sign flip to the characteristic polynomial of -J.
  r.a1 = -r.a1;
  r.a3 = -r.a3;
  const double hurwitz = r.a1 * r.a2 - r.a3;
  r.unstable = r.a1 < 0.0 || hurwitz < 0.0 || r.a3 < 0.0;
  r.stable = r.a1 > 0.0 && r.a2 > 0.0 && r.a3 > 0.0 && hurwitz > 0.0;
  const double scale = 1.0 + std::abs(r.a1) * (1.0 + std::abs(r.a2)) + std::abs(r.a3);
  r.margin = std::min({std::abs(r.a1), std::abs(r.a3), std::abs(hurwitz)}) / scale;
  return r;
}

SpectrumCheck instability_spectrum(const Matrix& jac) {
  SpectrumCheck s;
  s.spectrum = eigenvalues(jac);
  for (const Complex& z : s.spectrum)
    if (z.real() > 0.0) ++s.positive_real;
  s.unstable = !s.spectrum.empty() && s.spectrum.front().real() > 0.0;
  s.exactly_two_positive = s.positive_real == 2;
  return s;
}

SatelliteInstability satellite_instability(double mu1, double mu2, double mu3, double dg_nu) {
  if (!(mu1 > 0.0 && mu2 > 0.0 && mu3 > 0.0)) invalid_argument("mu_i must be positive");
  if (!(dg_nu >= -1.0 && dg_nu < 0.0)) invalid_argument("g'(nu) must lie in [-1, 0)");
  Vec l = {mu1, mu2, mu3};
  std::sort(l.begin(), l.end());
  SatelliteInstability s;
  s.lhs = -dg_nu + l[0] * l[1] * l[2];
  s.rhs = (l[0] + l[1] + l[2]) * (l[0] * l[1] + l[0] * l[2] + l[1] * l[2]);
  s.unstable = s.lhs > s.rhs;
  return s;
}

CellQuantities cell_quantities(const CellParams& p, const Vec& x_s) {
  if (x_s.size() != 3) invalid_argument("cell equilibrium must be 3-dimensional");
  CellQuantities q;
  q.b = -cell::R_z(x_s[2]);
  q.c = cell::G_y(p, x_s[1], x_s[2]);
  q.d = cell::G_z(p, x_s[1], x_s[2]);
  q.b_minus_kq = q.b - p.k * p.q;
  q.c_times_b_minus_kq = q.c * q.b_minus_kq;
  return q;
}

namespace {

struct NewtonResult {
  Vec x;
  double residual = 0.0;
  bool converged = false;
};

double tolerance(const Vec& x) { return 1e-10 * (1.0 + norm(x)); }

NewtonResult damped_newton(const OdeSystem& sys, Vec x) {
  NewtonResult out;
  Vec f = sys.field(x);
  double r = norm(f);
  for (int it = 0; it < 100; ++it) {
    if (!std::isfinite(r)) return out;
    if (r <= tolerance(x)) {
      out.converged = true;
      break;
    }
    Vec step;
    try {
      step = solve(sys.jacobian(x), f);
    } catch (const Error&) {
      return out;
    }
    double alpha = 1.0;
    bool improved = false;
    for (int h = 0; h < 40; ++h, alpha *= 0.5) {
      const Vec xn = axpy(-alpha, step, x);
      const Vec fn = sys.field(xn);
      const double rn = norm(fn);
      if (std::isfinite(rn) && rn < r) {
        x = xn;
        f = fn;
        r = rn;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  out.converged = out.converged || r <= tolerance(x);
  out.x = std::move(x);
  out.residual = r;
  return out;
}

}  // namespace

std::vector<Equilibrium> find_equilibria(const OdeSystem& sys, const BoxDomain& dom, int starts) {
  if (starts < 27) invalid_argument("find_equilibria needs at least 27 starts");
  const std::size_t n = sys.dim();
  if (dom.dim() != n) invalid_argument("domain dimension does not match the system");

  int per_axis = 3;
  while (std::pow(static_cast<double>(per_axis), static_cast<double>(n)) < starts) ++per_axis;

  std::vector<Vec> points;
  points.push_back(dom.center());
  std::vector<int> idx(n, 0);
  Vec u(n);
  for (;;) {
    for (std::size_t i = 0; i < n; ++i) u[i] = (idx[i] + 0.5) / per_axis;
    points.push_back(dom.at_fraction(u));
    std::size_t d = 0;
    while (d < n && ++idx[d] >= per_axis) idx[d++] = 0;
    if (d == n) break;
  }

  const double merge = 1e-6 * dom.diameter();
  std::vector<Equilibrium> roots;
  for (const Vec& s : points) {
    NewtonResult nr = damped_newton(sys, s);
    if (!nr.converged || !dom.contains_closed(nr.x, 1e-12)) continue;
    auto hit = std::find_if(roots.begin(), roots.end(), [&](const Equilibrium& e) {
      return norm(subtract(e.x, nr.x)) <= merge;
    });
    if (hit != roots.end()) {
      ++hit->basin_count;
      continue;
    }
    Equilibrium e;
    e.x = nr.x;
    e.residual = nr.residual;
    e.basin_count = 1;
    roots.push_back(std::move(e));
  }

  for (Equilibrium& e : roots) {
    e.jac = sys.jacobian(e.x);
    const SpectrumCheck s = instability_spectrum(e.jac);
    e.spectrum = s.spectrum;
    e.unstable = s.unstable;
    e.positive_real = s.positive_real;
    e.det = det(e.jac);
    if (n == 3) e.rh = routh_hurwitz_3(e.jac);
    e.unique_in_domain = roots.size() == 1;
    e.starts = static_cast<int>(points.size());
  }
  return roots;
}

}  // namespace gapcert
