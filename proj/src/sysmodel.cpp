#include "gapcert/sysmodel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "gapcert/error.hpp"
#include "gapcert/expr.hpp"

namespace gapcert {

BoxDomain::BoxDomain(Vec lower, Vec upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size() || lower_.empty())
    invalid_argument("BoxDomain: bounds must be non-empty vectors of equal length");
  for (std::size_t i = 0; i < lower_.size(); ++i) {
    if (!std::isfinite(lower_[i]) || !std::isfinite(upper_[i]))
      invalid_argument("BoxDomain: bounds must be finite");
    if (!(lower_[i] < upper_[i]))
      invalid_argument("BoxDomain: lower bound must be below upper bound on axis " +
                       std::to_string(i + 1));
  }
}

Vec BoxDomain::center() const {
  Vec c(dim());
  for (std::size_t i = 0; i < dim(); ++i) c[i] = 0.5 * (lower_[i] + upper_[i]);
  return c;
}

double BoxDomain::diameter() const { return norm(subtract(upper_, lower_)); }

bool BoxDomain::contains_closed(std::span<const double> x, double tol) const {
  for (std::size_t i = 0; i < dim(); ++i) {
    const double slack = tol * (1.0 + width(i));
    if (x[i] < lower_[i] - slack || x[i] > upper_[i] + slack) return false;
  }
  return true;
}

bool BoxDomain::contains_open(std::span<const double> x) const {
  for (std::size_t i = 0; i < dim(); ++i)
    if (!(x[i] > lower_[i] && x[i] < upper_[i])) return false;
  return true;
}

Vec BoxDomain::at_fraction(std::span<const double> u) const {
  Vec x(dim());
  for (std::size_t i = 0; i < dim(); ++i) x[i] = lower_[i] + u[i] * width(i);
  return x;
}

OdeSystem::OdeSystem(std::string label, Matrix a, VectorMap f, MatrixMap jac_f, bool analytic,
                     bool analytic_jacobian)
    : label_(std::move(label)),
      a_(std::move(a)),
      f_(std::move(f)),
      jac_f_(std::move(jac_f)),
      analytic_(analytic),
      analytic_jacobian_(analytic_jacobian) {
  if (!a_.square() || a_.rows() == 0) invalid_argument("OdeSystem: A must be a non-empty square matrix");
  const double asym = relative_asymmetry(a_);
  if (asym > 1e-12) {
    std::ostringstream os;
    os << "OdeSystem: A is not symmetric (relative asymmetry " << asym << ")";
    reject(os.str());
  }
}

Vec OdeSystem::field(const Vec& x) const {
  Vec fx = f_(x);
  const Vec ax = a_ * x;
  for (std::size_t i = 0; i < fx.size(); ++i) fx[i] -= ax[i];
  return fx;
}

Matrix OdeSystem::jacobian(const Vec& x) const { return jac_f_(x) - a_; }

Matrix finite_difference_jacobian(const VectorMap& f, const Vec& x) {
  const std::size_t n = x.size();
  const double h = 1e-6 * (1.0 + norm(x));
  Matrix j(n, n);
  Vec xp = x;
  Vec xm = x;
  for (std::size_t c = 0; c < n; ++c) {
    xp[c] = x[c] + h;
    xm[c] = x[c] - h;
    const Vec fp = f(xp);
    const Vec fm = f(xm);
    for (std::size_t r = 0; r < n; ++r) j(r, c) = (fp[r] - fm[r]) / (2.0 * h);
    xp[c] = x[c];
    xm[c] = x[c];
  }
  return j;
}

double jacobian_consistency(const OdeSystem& sys, const std::vector<Vec>& points) {
  double worst = 0.0;
  const VectorMap f = [&sys](const Vec& x) { return sys.nonlinearity(x); };
  for (const Vec& x : points) {
    const Matrix exact = sys.nonlinearity_jacobian(x);
    const Matrix fd = finite_difference_jacobian(f, x);
    double scale = 1.0, diff = 0.0;
    for (std::size_t k = 0; k < exact.data().size(); ++k) {
      scale = std::max(scale, std::abs(exact.data()[k]));
      diff = std::max(diff, std::abs(exact.data()[k] - fd.data()[k]));
    }
    worst = std::max(worst, diff / scale);
  }
  return worst;
}

// ---------------------------------------------------------------- satellite

AdmissibleFunction default_satellite_control(double mu1, double mu2, double mu3) {
  const double nu = std::numbers::pi / (2.0 * mu1 * mu2 * mu3);
  AdmissibleFunction g;
  g.g = [nu](double s) { return expr::arccot(s - nu); };
  g.dg = [nu](double s) {
    const double d = s - nu;
    return -1.0 / (1.0 + d * d);
  };
  g.bound = std::numbers::pi;
  g.label = "arccot(x3 - nu)";
  return g;
}

void check_admissible(const AdmissibleFunction& g, double lo, double hi) {
  if (!g.g || !g.dg) invalid_argument("admissible function: g and g' must both be provided");
  if (!(g.bound > 0.0)) reject("admissible function: bound M must be positive");
  std::vector<double> samples;
  constexpr int dense = 20001;
  for (int i = 0; i < dense; ++i) samples.push_back(lo + (hi - lo) * i / (dense - 1));
  const double mid = 0.5 * (lo + hi);
  for (int e = 0; e <= 8; ++e) {
    const double r = std::pow(10.0, e) * (1.0 + std::abs(hi - lo));
    samples.push_back(mid - r);
    samples.push_back(mid + r);
  }
  for (double s : samples) {
    const double v = g.g(s);
    const double d = g.dg(s);
    std::ostringstream os;
    os.precision(17);
    if (!std::isfinite(v) || !std::isfinite(d)) {
      os << "admissible function: non-finite value at s = " << s;
      reject(os.str());
    }
    if (!(v > 0.0)) {
      os << "admissible function violates 0 < g: g(" << s << ") = " << v;
      reject(os.str());
    }
    if (!(v < g.bound)) {
      os << "admissible function violates g < M: g(" << s << ") = " << v << ", M = " << g.bound;
      reject(os.str());
    }
    if (!(d >= -1.0)) {
      os << "admissible function violates -1 <= g': g'(" << s << ") = " << d;
      reject(os.str());
    }
    if (!(d < 0.0)) {
      os << "admissible function violates g' < 0: g'(" << s << ") = " << d;
      reject(os.str());
    }
  }
}

OdeSystem satellite_system(double mu1, double mu2, double mu3, const AdmissibleFunction& g) {
  if (!(mu1 > 0 && mu2 > 0 && mu3 > 0)) reject("satellite: parameters mu1, mu2, mu3 must be positive");
  const double top = g.bound / (mu1 * mu2 * mu3);
  check_admissible(g, -top, 2.0 * top);
  const Vec mu{mu1, mu2, mu3};
  auto gv = g.g;
  auto dg = g.dg;
  OdeSystem sys(
      "satellite", Matrix::diagonal(mu),
      [gv](const Vec& x) { return Vec{gv(x[2]), x[0], x[1]}; },
      [dg](const Vec& x) {
        return Matrix{{0.0, 0.0, dg(x[2])}, {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}};
      },
      true, true);
  sys.family = ModelFamily::Satellite;
  sys.params = {{"mu1", mu1}, {"mu2", mu2}, {"mu3", mu3}, {"M", g.bound}};
  return sys;
}

BoxDomain satellite_domain(double mu1, double mu2, double mu3, double bound) {
  if (!(mu1 > 0 && mu2 > 0 && mu3 > 0 && bound > 0))
    reject("satellite_domain: parameters and bound must be positive");
  return BoxDomain({0.0, 0.0, 0.0},
                   {bound / mu1, bound / (mu1 * mu2), bound / (mu1 * mu2 * mu3)});
}

// --------------------------------------------------------------------- cell

namespace cell {

double R(double z) {
  const double z2 = z * z;
  return 1.0 / (1.0 + z2 * z2);
}

double R_z(double z) {
  const double z2 = z * z;
  const double d = 1.0 + z2 * z2;
  return -4.0 * z2 * z / (d * d);
}

double G(const CellParams& p, double y, double z) {
  const double a = (1.0 + y) * (1.0 + z);
  return p.T * y * (1.0 + y) * (1.0 + z) * (1.0 + z) / (p.L + a * a);
}

double G_y(const CellParams& p, double y, double z) {
  const double a = (1.0 + y) * (1.0 + z);
  const double den = p.L + a * a;
  const double z1sq = (1.0 + z) * (1.0 + z);
  return 2.0 * p.T * p.L * y * z1sq / (den * den) + p.T * z1sq / den;
}

double G_z(const CellParams& p, double y, double z) {
  const double a = (1.0 + y) * (1.0 + z);
  const double den = p.L + a * a;
  return 2.0 * p.T * p.L * y * (1.0 + y) * (1.0 + z) / (den * den);
}

double y0(const CellParams& p) {
  const double target = 1.0 / p.k;
  if (!(p.k * p.T > 1.0)) reject("cell: y0 requires kT > 1");
  double lo = 0.0, hi = 1.0;
  int guard = 0;
  while (G(p, hi, 0.0) < target) {
    lo = hi;
    hi *= 2.0;
    if (++guard > 200) reject("cell: failed to bracket G(y, 0) = 1/k");
  }
  for (int i = 0; i < 200 && hi - lo > 1e-13 * (1.0 + hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    (G(p, mid, 0.0) < target ? lo : hi) = mid;
  }
  double y = 0.5 * (lo + hi);
  for (int i = 0; i < 5; ++i) {
    const double r = G(p, y, 0.0) - target;
    const double d = G_y(p, y, 0.0);
    if (d == 0.0) break;
    y -= r / d;
  }
  if (std::abs(G(p, y, 0.0) - target) > 1e-10) reject("cell: y0 residual above 1e-10");
  return y;
}

}  // namespace cell

namespace {
void check_cell_params(const CellParams& p) {
  if (!(p.k > 0 && p.q > 0 && p.T > 0 && p.L > 0)) reject("cell: k, q, T, L must be positive");
  if (!(p.k * p.T > 1.0)) reject("cell: requires kT > 1");
  if (!(p.k > p.q)) reject("cell: requires k > q");
}
}  // namespace

OdeSystem cell_system(const CellParams& p) {
  check_cell_params(p);
  const Vec diag{p.k, 0.0, p.q};
  OdeSystem sys(
      "cell", Matrix::diagonal(diag),
      [p](const Vec& v) {
        const double g = cell::G(p, v[1], v[2]);
        return Vec{cell::R(v[2]), v[0] - g, g};
      },
      [p](const Vec& v) {
        const double gy = cell::G_y(p, v[1], v[2]);
        const double gz = cell::G_z(p, v[1], v[2]);
        return Matrix{{0.0, 0.0, cell::R_z(v[2])}, {1.0, -gy, -gz}, {0.0, gy, gz}};
      },
      true, true);
  sys.family = ModelFamily::Cell;
  sys.params = {{"k", p.k}, {"q", p.q}, {"T", p.T}, {"L", p.L}};
  return sys;
}

BoxDomain cell_domain(const CellParams& p) {
  if (!(p.k * p.T > 1.0)) reject("cell_domain: requires kT > 1");
  return BoxDomain({0.0, 0.0, 0.0}, {1.0 / p.k, cell::y0(p), p.T / p.q});
}

// ------------------------------------------------------- change of variables

LinearChange::LinearChange(Matrix c) : c_(std::move(c)) {
  if (!c_.square()) invalid_argument("LinearChange: C must be square");
  try {
    c_inv_ = gapcert::inverse(c_);
  } catch (const Error&) {
    reject("LinearChange: C is singular");
  }
  const double err = norm_2(c_ * c_inv_ - Matrix::identity(c_.rows()));
  if (err > 1e-10) reject("LinearChange: C is too ill-conditioned to invert reliably");
}

LinearChange LinearChange::inverse() const { return LinearChange(c_inv_, c_); }

LinearChange cell_change() { return LinearChange(Matrix{{1, 0, 0}, {0, 1, -1}, {0, 0, 1}}); }

OdeSystem apply_change(const OdeSystem& sys, const LinearChange& ch) {
  if (ch.c().rows() != sys.dim()) invalid_argument("apply_change: dimension mismatch");
  const Matrix c = ch.c();
  const Matrix ci = ch.c_inv();
  const Matrix residual_linear = sys.A() - ci * sys.A() * c;  // A - C^{-1} A C
  auto base = std::make_shared<const OdeSystem>(sys);
  OdeSystem out(
      sys.label() + " (changed)", sys.A(),
      [base, c, ci, residual_linear](const Vec& y) {
        const Vec x = c * y;
        Vec fy = ci * base->nonlinearity(x);
        const Vec r = residual_linear * y;
        for (std::size_t i = 0; i < fy.size(); ++i) fy[i] += r[i];
        return fy;
      },
      [base, c, ci, residual_linear](const Vec& y) {
        const Vec x = c * y;
        return ci * base->nonlinearity_jacobian(x) * c + residual_linear;
      },
      sys.analytic(), sys.analytic_jacobian());
  out.family = sys.family;
  out.params = sys.params;
  return out;
}

// --------------------------------------------------------------------- hopf

OdeSystem hopf_oracle(double omega, double lambda_z) {
  if (omega == 0.0) reject("hopf_oracle: omega must be non-zero");
  if (!(lambda_z > 0.0)) reject("hopf_oracle: lambda_z must be positive");
  const Vec diag{0.0, 0.0, lambda_z};
  OdeSystem sys(
      "hopf", Matrix::diagonal(diag),
      [omega](const Vec& x) {
        const double r2 = x[0] * x[0] + x[1] * x[1];
        return Vec{x[0] - omega * x[1] - x[0] * r2, omega * x[0] + x[1] - x[1] * r2, 0.0};
      },
      [omega](const Vec& x) {
        const double a = x[0], b = x[1];
        const double r2 = a * a + b * b;
        return Matrix{{1.0 - r2 - 2.0 * a * a, -omega - 2.0 * a * b, 0.0},
                      {omega - 2.0 * a * b, 1.0 - r2 - 2.0 * b * b, 0.0},
                      {0.0, 0.0, 0.0}};
      },
      true, true);
  sys.family = ModelFamily::Hopf;
  sys.params = {{"omega", omega}, {"lambda_z", lambda_z}};
  return sys;
}

// ------------------------------------------------------------------- custom

namespace {

OdeSystem build_expression_system(std::vector<expr::Expression> exprs, const Matrix& a,
                                  const std::optional<Vec>& probe, std::string label) {
  const std::size_t n = exprs.size();
  if (a.rows() != n || a.cols() != n)
    reject("custom model: A must be " + std::to_string(n) + "x" + std::to_string(n));
  const double asym = relative_asymmetry(a);
  if (asym > 1e-12) {
    std::ostringstream os;
    os << "custom model: A is not symmetric (relative asymmetry " << asym << ")";
    reject(os.str());
  }
  auto shared = std::make_shared<const std::vector<expr::Expression>>(std::move(exprs));
  // The expressions give the full field f; F = f + A x.
  VectorMap nonlin = [shared, a](const Vec& x) {
    Vec out(shared->size());
    const Vec ax = a * x;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*shared)[i].evaluate(x) + ax[i];
    return out;
  };
  MatrixMap jac = [nonlin](const Vec& x) { return finite_difference_jacobian(nonlin, x); };

  const Vec at = probe.value_or(Vec(n, 0.0));
  const Vec fx = nonlin(at);
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(fx[i])) {
      std::ostringstream os;
      os << "custom model: expression " << i + 1 << " is not finite at the probe point";
      reject(os.str());
    }
  OdeSystem sys(std::move(label), a, nonlin, jac, false, false);
  sys.family = ModelFamily::Custom;
  return sys;
}

}  // namespace

OdeSystem parse_system(const std::vector<std::string>& expressions, const Matrix& a,
                       const std::optional<Vec>& probe, std::string label) {
  if (expressions.empty()) reject("custom model: no expressions");
  const int n = static_cast<int>(expressions.size());
  std::vector<expr::Expression> exprs;
  for (int i = 0; i < n; ++i) exprs.push_back(expr::parse(expressions[i], n, i + 1));
  return build_expression_system(std::move(exprs), a, probe, std::move(label));
}

OdeSystem parse_system_text(const std::string& text, const Matrix& a,
                            const std::optional<Vec>& probe) {
  std::vector<std::string> lines;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) lines.push_back(line);
  while (!lines.empty() && lines.back().find_first_not_of(" \t\r") == std::string::npos)
    lines.pop_back();
  return parse_system(lines, a, probe);
}

}  // namespace gapcert
