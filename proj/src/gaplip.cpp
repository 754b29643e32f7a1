#include "gapcert/gaplip.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "gapcert/equilibria.hpp"
#include "gapcert/error.hpp"
#include "gapcert/flow.hpp"

namespace gapcert {

namespace {

struct Tracker {
  double value = -1.0;
  Vec point;
  void offer(double v, const Vec& p) {
    if (v > value) {
      value = v;
      point = p;
    }
  }
};

struct NormEval {
  double n1, ninf, n2, bound;
};

NormEval eval_norms(const OdeSystem& sys, const SampleRegion& region, const Vec& p) {
  const Matrix j = sys.nonlinearity_jacobian(region.to_system(p));
  for (double v : j.data()) {
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "non-finite Jacobian entry at (";
      for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
      os << ")";
      reject(os.str());
    }
  }
  NormEval e{};
  e.n1 = norm_1(j);
  e.ninf = norm_inf(j);
  e.n2 = norm_2(j);
  e.bound = std::sqrt(e.n1 * e.ninf);
  return e;
}

// Visits every point of the lattice center + k*step (|k| <= half per axis),
// clamped to the closed box.
template <class Fn>
void local_lattice(const BoxDomain& box, const Vec& center, const Vec& step, int half, Fn&& fn) {
  const std::size_t n = box.dim();
  std::vector<int> idx(n, -half);
  Vec p(n);
  for (;;) {
    for (std::size_t i = 0; i < n; ++i)
      p[i] = std::clamp(center[i] + idx[i] * step[i], box.lower()[i], box.upper()[i]);
    fn(p);
    std::size_t d = 0;
    while (d < n && ++idx[d] > half) idx[d++] = -half;
    if (d == n) break;
  }
}

template <class Fn>
void coarse_lattice(const BoxDomain& box, int grid, Fn&& fn) {
  const std::size_t n = box.dim();
  std::vector<int> idx(n, 0);
  Vec u(n);
  for (;;) {
    for (std::size_t i = 0; i < n; ++i) u[i] = static_cast<double>(idx[i]) / (grid - 1);
    fn(box.at_fraction(u));
    std::size_t d = 0;
    while (d < n && ++idx[d] >= grid) idx[d++] = 0;
    if (d == n) break;
  }
}

}  // namespace

LipschitzEstimate estimate_lipschitz(const OdeSystem& sys, const SampleRegion& region,
                                     const LipschitzOptions& opts) {
  if (opts.grid < 8) invalid_argument("Lipschitz grid needs at least 8 points per axis");
  if (opts.refine_levels < 0) invalid_argument("refine_levels must be non-negative");
  if (region.box.dim() != sys.dim()) invalid_argument("domain dimension does not match the system");
  const std::size_t n = sys.dim();

  Tracker k2, kb, k1, kinf;
  long evals = 0;
  auto visit = [&](const Vec& p) {
    const NormEval e = eval_norms(sys, region, p);
    ++evals;
    k2.offer(e.n2, p);
    kb.offer(e.bound, p);
    k1.offer(e.n1, p);
    kinf.offer(e.ninf, p);
  };
  coarse_lattice(region.box, opts.grid, visit);

  Vec step(n);
  for (std::size_t i = 0; i < n; ++i) step[i] = region.box.width(i) / (opts.grid - 1);
  // A window of +-2 old spacings at 4x density is +-8 new spacings.
  const int half = n <= 4 ? 8 : 2;
  for (int level = 0; level < opts.refine_levels; ++level) {
    for (double& s : step) s /= 4.0;
    const std::vector<Vec> centers = {k2.point, kb.point, k1.point, kinf.point};
    for (const Vec& c : centers) local_lattice(region.box, c, step, half, visit);
  }

  LipschitzEstimate est;
  est.k = k2.value;
  est.k_bound = kb.value;
  est.norm_1_max = k1.value;
  est.norm_inf_max = kinf.value;
  est.argmax = k2.point;
  est.argmax_bound = kb.point;
  est.evaluations = evals;
  return est;
}

std::vector<NormSample> norm_table(const OdeSystem& sys, const SampleRegion& region, int grid) {
  if (grid < 2) invalid_argument("norm table grid needs at least 2 points per axis");
  std::vector<NormSample> rows;
  coarse_lattice(region.box, grid, [&](const Vec& p) {
    const NormEval e = eval_norms(sys, region, p);
    rows.push_back({p, e.n1, e.ninf, e.n2, e.bound});
  });
  return rows;
}

GapReport gap_report(const OdeSystem& sys, const SampleRegion& region, std::size_t m,
                     const LipschitzOptions& opts) {
  const std::size_t n = sys.dim();
  if (m < 1 || m >= n) invalid_argument("gap index m must satisfy 1 <= m < n");
  GapReport r;
  r.m = m;
  r.eigenvalues = sym_eigen(sys.A()).eigenvalues;
  r.lambda_m = r.eigenvalues[m - 1];
  r.lambda_m1 = r.eigenvalues[m];
  r.gap = r.lambda_m1 - r.lambda_m;
  const double scale = 1.0 + std::abs(r.lambda_m) + std::abs(r.lambda_m1);
  if (r.gap <= 1e-12 * scale) reject("degenerate spectral gap: lambda_m = lambda_{m+1}");
  r.lipschitz = estimate_lipschitz(sys, region, opts);
  r.margin = r.gap - 2.0 * r.lipschitz.k_bound;
  r.margin_exact = r.gap - 2.0 * r.lipschitz.k;
  r.lambda_cone = 0.5 * (r.lambda_m1 + r.lambda_m);
  r.eps_cone = 0.5 * r.gap - r.lipschitz.k_bound;
  r.passed = r.margin > 0.0;
  return r;
}

ConeCheck cone_condition_check(const OdeSystem& sys, const SampleRegion& region,
                               const GapReport& report, int n_pairs, double horizon,
                               unsigned long long seed, int grid_points) {
  if (!report.passed) reject("cone check needs a passing gap report");
  if (n_pairs < 1 || !(horizon > 0.0) || grid_points < 3)
    invalid_argument("cone check needs n_pairs >= 1, horizon > 0 and >= 3 grid points");
  const std::size_t n = sys.dim();
  const SymSpectrum spec = sym_eigen(sys.A());
  const Matrix p = leading_projector(spec.eigenvectors, report.m);
  const double lam = report.lambda_cone, eps = report.eps_cone;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  IntegratorOptions opts;
  opts.tol_rel = 1e-10;
  opts.tol_abs = 1e-12;

  ConeCheck out;
  out.worst_slack = -std::numeric_limits<double>::infinity();
  const double dt = horizon / (grid_points - 1);
  auto quad = [&](const Vec& w) {
    const Vec pw = p * w;
    double np = 0.0, nw = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      np += pw[i] * pw[i];
      nw += w[i] * w[i];
    }
    return std::pair{nw - 2.0 * np, nw};  // |Qw|^2 - |Pw|^2 = |w|^2 - 2|Pw|^2
  };

  for (int pair = 0; pair < n_pairs; ++pair) {
    Vec f1(n), f2(n);
    for (double& v : f1) v = u(rng);
    for (double& v : f2) v = u(rng);
    const Vec x0 = region.to_system(region.box.at_fraction(f1));
    const Vec y0 = region.to_system(region.box.at_fraction(f2));
    const Trajectory tx = integrate_dense(field_rhs(sys), x0, 0.0, horizon, opts);
    const Trajectory ty = integrate_dense(field_rhs(sys), y0, 0.0, horizon, opts);

    std::vector<double> v, w2;
    bool exited = !tx.result.ok() || !ty.result.ok();
    for (int i = 0; i < grid_points && !exited; ++i) {
      const double t = i * dt;
      const Vec xi = tx.eval(t), yi = ty.eval(t);
      if (!region.box.contains_closed(region.to_box(xi), 1e-9) ||
          !region.box.contains_closed(region.to_box(yi), 1e-9)) {
        exited = true;
        break;
      }
      const auto [vi, wi] = quad(subtract(xi, yi));
      v.push_back(vi);
      w2.push_back(wi);
    }
    if (exited) ++out.pairs_skipped;
    else ++out.pairs_used;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
      if (!(w2[i] > 0.0)) {
        out.worst_slack = std::max(out.worst_slack, 0.0);
        ++out.samples;
        continue;
      }
      const double dv = (v[i + 1] - v[i - 1]) / (2.0 * dt);
      const double slack = (dv + 2.0 * lam * v[i] + eps * w2[i]) / w2[i];
      out.worst_slack = std::max(out.worst_slack, slack);
      ++out.samples;
    }
  }
  if (out.samples == 0) out.worst_slack = 0.0;
  return out;
}

// -------------------------------------------------------------- region scan

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string to_csv(const RegionTable& table) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + csv_field(cells[i]);
    out += "\r\n";
  };
  line(table.columns);
  for (const auto& r : table.rows) line(r);
  return out;
}

RegionTable satellite_region_scan(const std::vector<double>& mu1, const std::vector<double>& mu2,
                                  const std::vector<double>& mu3) {
  RegionTable t;
  t.columns = {"mu1", "mu2", "mu3", "gap", "gap_margin", "gap_pass", "instability_lhs",
               "instability_rhs", "instability_margin", "instability_pass", "in_region", "note"};
  // With the default control, K = 1 on every box and g'(nu) = -1; the
  // Routh-Hurwitz failure of -f'(x_s) reads 1 > (mu1+mu2+mu3)(mu1 mu2 + mu2 mu3 + mu1 mu3) - mu1 mu2 mu3.
  for (double a : mu1)
    for (double b : mu2)
      for (double c : mu3) {
        std::vector<std::string> row = {num(a), num(b), num(c)};
        if (!(a > 0.0 && b > 0.0 && c > 0.0)) {
          row.insert(row.end(), {"", "", "false", "", "", "", "false", "false", "non-positive mu"});
          t.rows.push_back(row);
          continue;
        }
        Vec lam = {a, b, c};
        std::sort(lam.begin(), lam.end());
        const double gap = lam[2] - lam[1];
        const double gm = gap - 2.0;
        const double lhs = 1.0 + a * b * c;  // -g'(nu) + mu1 mu2 mu3
        const double rhs = (a + b + c) * (a * b + b * c + a * c);
        const double im = lhs - rhs;
        const bool gp = gm > 0.0, ip = im > 0.0;
        row.insert(row.end(), {num(gap), num(gm), gp ? "true" : "false", num(lhs), num(rhs),
                               num(im), ip ? "true" : "false", (gp && ip) ? "true" : "false", ""});
        t.rows.push_back(row);
      }
  return t;
}

RegionTable cell_region_scan(const std::vector<double>& k, const std::vector<double>& q, double T,
                             double L, const LipschitzOptions& opts) {
  RegionTable t;
  t.columns = {"k",  "q",  "gap", "K", "K_bound", "gap_margin", "gap_pass",
               "a1", "a2", "a3",  "unstable", "in_region", "note"};
  for (double kk : k)
    for (double qq : q) {
      std::vector<std::string> row = {num(kk), num(qq)};
      try {
        const CellParams prm{kk, qq, T, L};
        const OdeSystem sys = cell_system(prm);
        const BoxDomain dom = cell_domain(prm);
        const OdeSystem tr = apply_change(sys, cell_change());
        const GapReport g = gap_report(tr, SampleRegion{dom, cell_change()}, 2, opts);
        const std::vector<Equilibrium> eq = find_equilibria(sys, dom);
        if (eq.size() != 1) {
          row.insert(row.end(), {num(g.gap), num(g.k()), num(g.k_bound()), num(g.margin),
                                 g.passed ? "true" : "false", "", "", "", "false", "false",
                                 "equilibrium not unique"});
          t.rows.push_back(row);
          continue;
        }
        const RouthHurwitz rh = routh_hurwitz_3(sys.jacobian(eq.front().x));
        const bool unstable = rh.unstable;
        row.insert(row.end(), {num(g.gap), num(g.k()), num(g.k_bound()), num(g.margin),
                               g.passed ? "true" : "false", num(rh.a1), num(rh.a2), num(rh.a3),
                               unstable ? "true" : "false",
                               (g.passed && unstable) ? "true" : "false", ""});
      } catch (const Error& e) {
        row.insert(row.end(), {"", "", "", "", "false", "", "", "", "false", "false", e.what()});
      }
      t.rows.push_back(row);
    }
  return t;
}

}  // namespace gapcert
