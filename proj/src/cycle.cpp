#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "gapcert/error.hpp"
#include "gapcert/flow.hpp"

namespace gapcert {

namespace {

constexpr double kMarginal = 1e-4;

struct FlowJac {
  Vec x;
  Matrix psi;
  double trace_integral = 0.0;
  bool ok = false;
  std::string message;
};

// Augmented state [x, Psi (row-major), integral of tr f'].
FlowJac flow_with_jacobian(const OdeSystem& sys, const Vec& p, double period,
                           const IntegratorOptions& opts) {
  const std::size_t n = sys.dim();
  Vec z(n + n * n + 1, 0.0);
  std::copy(p.begin(), p.end(), z.begin());
  for (std::size_t i = 0; i < n; ++i) z[n + i * n + i] = 1.0;

  Rhs rhs = [&sys, n](std::span<const double> s, std::span<double> ds) {
    const Vec x(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(n));
    const Vec f = sys.field(x);
    const Matrix j = sys.jacobian(x);
    std::copy(f.begin(), f.end(), ds.begin());
    double tr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      tr += j(i, i);
      for (std::size_t c = 0; c < n; ++c) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) acc += j(i, k) * s[n + k * n + c];
        ds[n + i * n + c] = acc;
      }
    }
    ds[n + n * n] = tr;
  };

  FlowJac out;
  const IntegrationResult r = integrate_rhs(rhs, z, 0.0, period, opts);
  out.ok = r.ok();
  out.message = r.message;
  if (!out.ok) return out;
  out.x.assign(r.x.begin(), r.x.begin() + static_cast<std::ptrdiff_t>(n));
  out.psi = Matrix::from_row_major(n, n, std::span<const double>(r.x).subspan(n, n * n));
  out.trace_integral = r.x[n + n * n];
  return out;
}

IntegratorOptions options_of(const CycleSettings& s) {
  IntegratorOptions o;
  o.tol_rel = s.tol_rel;
  o.tol_abs = s.tol_abs;
  return o;
}

double lipschitz_k1(const OdeSystem& sys, const CycleSettings& s, const Vec& x) {
  if (s.k1 > 0.0) return s.k1;
  double lam = 0.0;
  for (double v : sym_eigen(sys.A()).eigenvalues) lam = std::max(lam, std::abs(v));
  return lam + norm_2(sys.nonlinearity_jacobian(x));
}

Vec unit_field(const OdeSystem& sys, const Vec& p) {
  Vec f = sys.field(p);
  const double nf = norm(f);
  if (!(nf > 0.0) || !std::isfinite(nf)) numerical_failure("vector field vanishes at section anchor");
  for (double& v : f) v /= nf;
  return f;
}

bool finish_cycle(const OdeSystem& sys, const BoxDomain& dom, const CycleSettings& settings,
                  CycleInfo& c) {
  const IntegratorOptions opts = options_of(settings);
  const Trajectory tr = integrate_dense(field_rhs(sys), c.anchor, 0.0, c.period, opts);
  if (!tr.result.ok()) return false;
  c.closure_error = norm(subtract(tr.final_state(), c.anchor));
  c.orbit_times.assign(static_cast<std::size_t>(std::max(settings.orbit_samples, 8)), 0.0);
  sample_orbit(sys, c, opts);
  c.inside_domain = std::all_of(c.orbit.begin(), c.orbit.end(),
                                [&](const Vec& x) { return dom.contains_open(x); });
  const Monodromy mono = monodromy(sys, c.anchor, c.period, opts);
  c.multipliers = mono.multipliers;
  c.trivial_index = mono.trivial_index;
  c.stability = mono.stability;
  c.stable = mono.stability == StabilityVerdict::Stable;
  c.monodromy_det = mono.det;
  c.liouville_det = mono.liouville_det;
  c.liouville_error = mono.liouville_error;
  c.period_lower_bound = 2.0 * std::numbers::pi / lipschitz_k1(sys, settings, c.anchor);
  return true;
}

}  // namespace

std::string to_string(StabilityVerdict v) {
  switch (v) {
    case StabilityVerdict::Stable: return "stable";
    case StabilityVerdict::Marginal: return "marginal";
    case StabilityVerdict::Unstable: return "unstable";
  }
  return "unknown";
}

StabilityVerdict classify_multipliers(const std::vector<Complex>& multipliers,
                                      std::size_t trivial_index) {
  bool marginal = false;
  for (std::size_t i = 0; i < multipliers.size(); ++i) {
    if (i == trivial_index) continue;
    const double r = std::abs(multipliers[i]);
    if (r > 1.0 + kMarginal) return StabilityVerdict::Unstable;
    if (r >= 1.0 - kMarginal) marginal = true;
  }
  return marginal ? StabilityVerdict::Marginal : StabilityVerdict::Stable;
}

Monodromy monodromy(const OdeSystem& sys, const Vec& anchor, double period,
                    const IntegratorOptions& opts) {
  if (!(period > 0.0)) invalid_argument("monodromy needs a positive period");
  const FlowJac fj = flow_with_jacobian(sys, anchor, period, opts);
  if (!fj.ok) numerical_failure("variational integration failed: " + fj.message);
  Monodromy m;
  m.matrix = fj.psi;
  m.multipliers = eigenvalues(fj.psi);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m.multipliers.size(); ++i) {
    const double d = std::abs(m.multipliers[i] - Complex(1.0, 0.0));
    if (d < best) {
      best = d;
      m.trivial_index = i;
    }
  }
  m.det = det(fj.psi);
  m.log_liouville = fj.trace_integral;
  m.liouville_det = std::exp(fj.trace_integral);

  // Segments short enough that each determinant is about e^{-10} or larger.
  const int segments = std::max(1, static_cast<int>(std::ceil(std::abs(fj.trace_integral) / 10.0)));
  if (segments == 1) {
    m.log_det_segments = std::log(std::abs(m.det));
  } else {
    Vec x = anchor;
    const double dt = period / segments;
    for (int s = 0; s < segments; ++s) {
      const FlowJac part = flow_with_jacobian(sys, x, dt, opts);
      if (!part.ok) numerical_failure("variational integration failed: " + part.message);
      m.log_det_segments += std::log(std::abs(det(part.psi)));
      x = part.x;
    }
  }
  m.liouville_error = std::abs(std::expm1(m.log_det_segments - m.log_liouville));
  m.stability = classify_multipliers(m.multipliers, m.trivial_index);
  return m;
}

Monodromy monodromy(const OdeSystem& sys, const CycleInfo& cycle, double tol_rel, double tol_abs) {
  IntegratorOptions o;
  o.tol_rel = tol_rel;
  o.tol_abs = tol_abs;
  return monodromy(sys, cycle.anchor, cycle.period, o);
}

void sample_orbit(const OdeSystem& sys, CycleInfo& cycle, const IntegratorOptions& opts) {
  const std::size_t n_samples = cycle.orbit_times.empty() ? 1024 : cycle.orbit_times.size();
  const Trajectory tr = integrate_dense(field_rhs(sys), cycle.anchor, 0.0, cycle.period, opts);
  if (!tr.result.ok()) numerical_failure("orbit sampling failed: " + tr.result.message);
  cycle.orbit_times.resize(n_samples);
  cycle.orbit.resize(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double t = cycle.period * static_cast<double>(i) / static_cast<double>(n_samples);
    cycle.orbit_times[i] = t;
    cycle.orbit[i] = tr.eval(t);
  }
}

std::optional<CycleInfo> refine_cycle(const OdeSystem& sys, const BoxDomain& dom, const Vec& guess,
                                      double period_guess, const CycleSettings& settings) {
  const std::size_t n = sys.dim();
  const double diam = dom.diameter();
  const IntegratorOptions opts = options_of(settings);
  const Vec p_ref = guess;
  const Vec normal = unit_field(sys, guess);
  Vec p = guess;
  double period = period_guess;

  for (int it = 1; it <= settings.max_newton; ++it) {
    const FlowJac fj = flow_with_jacobian(sys, p, period, opts);
    if (!fj.ok) return std::nullopt;
    const Vec r = subtract(fj.x, p);
    const Vec f_end = sys.field(fj.x);

    // [[Psi - I, f(x_T)], [n^T, 0]] (dp, dT) = -(r, n.(p - p_ref))
    Matrix jac(n + 1, n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) jac(i, j) = fj.psi(i, j) - (i == j ? 1.0 : 0.0);
      jac(i, n) = f_end[i];
      jac(n, i) = normal[i];
    }
    Vec rhs(n + 1);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = -r[i];
    rhs[n] = -dot(normal, subtract(p, p_ref));

    Vec delta;
    try {
      delta = solve(jac, rhs);
    } catch (const Error&) {
      return std::nullopt;
    }
    Vec dp(delta.begin(), delta.begin() + static_cast<std::ptrdiff_t>(n));
    double dT = delta[n];
    // Damp both parts together; an unbounded period step can land on a
    // multiple of the period, which is also a fixed point.
    const double s = std::min({1.0, 0.05 * diam / std::max(norm(dp), 1e-300),
                               0.1 * period_guess / std::max(std::abs(dT), 1e-300)});
    for (double& v : dp) v *= s;
    dT *= s;
    for (std::size_t i = 0; i < n; ++i) p[i] += dp[i];
    period += dT;
    if (!(period > 0.0) || !std::isfinite(period)) return std::nullopt;

    if (norm(dp) < settings.convergence * diam &&
        std::abs(dT) < settings.convergence * std::max(1.0, period)) {
      if (std::abs(period - period_guess) > 0.25 * period_guess) return std::nullopt;
      CycleInfo c;
      c.anchor = p;
      c.section_normal = normal;
      c.period = period;
      c.newton_iterations = it;
      if (!finish_cycle(sys, dom, settings, c)) return std::nullopt;
      return c;
    }
  }
  return std::nullopt;
}

CycleSearch locate_cycle(const OdeSystem& sys, const BoxDomain& dom, const Vec& x_s,
                         const CycleSettings& settings) {
  if (x_s.size() != sys.dim() || dom.dim() != sys.dim())
    invalid_argument("equilibrium or domain dimension does not match the system");
  CycleSearch out;
  const double diam = dom.diameter();
  const IntegratorOptions opts = options_of(settings);

  // Start off the equilibrium along its most unstable direction.
  const Matrix j = sys.jacobian(x_s);
  const std::vector<Complex> eig = eigenvalues(j);
  if (eig.empty() || !(eig.front().real() > 0.0))
    invalid_argument("equilibrium is not unstable; no departing orbit to follow");
  const std::vector<Complex> ev = eigenvector(j, eig.front());
  Vec v(ev.size());
  for (std::size_t i = 0; i < ev.size(); ++i) v[i] = ev[i].real();
  if (norm(v) < 1e-8)
    for (std::size_t i = 0; i < ev.size(); ++i) v[i] = ev[i].imag();
  const double nv = norm(v);
  for (double& c : v) c /= nv;
  const double delta = 1e-3 * diam;
  Vec x0 = axpy(delta, v, x_s);
  if (!dom.contains_open(x0)) x0 = axpy(-delta, v, x_s);

  const double k1 = lipschitz_k1(sys, settings, x_s);
  const double transient =
      std::min(settings.transient_factor * 2.0 * std::numbers::pi / k1, settings.transient_cap);
  bool left = false;
  const IntegrationResult tr =
      integrate_rhs(field_rhs(sys), x0, 0.0, transient, opts, [&](const DenseStep& st) {
        const Vec x = st.eval(st.t1());
        if (!dom.contains_closed(x, 1e-9)) {
          left = true;
          return false;
        }
        return true;
      });
  if (left) {
    out.failure = CycleFailure::LeftDomain;
    out.message = "transient orbit left the domain";
    return out;
  }
  if (!tr.ok()) {
    out.failure = CycleFailure::IntegratorFailure;
    out.message = "transient integration failed: " + tr.message;
    return out;
  }

  CycleSettings local = settings;
  local.k1 = k1;
  Vec p = tr.x;
  out.last_iterates.push_back(p);
  double switch_at = settings.shooting_switch * diam;
  for (int loop = 1; loop <= settings.max_loops; ++loop) {
    const Section sec{p, unit_field(sys, p)};
    const ReturnResult ret = first_return(sys, p, sec, settings.max_return_time, opts, &dom);
    if (ret.left_domain) {
      out.failure = CycleFailure::LeftDomain;
      out.message = "orbit left the domain during loop " + std::to_string(loop);
      return out;
    }
    if (!ret.crossing) {
      out.failure = ret.timed_out ? CycleFailure::NoCrossings : CycleFailure::IntegratorFailure;
      out.message = ret.timed_out ? "no return to the section within the time limit"
                                  : "integration failed: " + ret.integration.message;
      return out;
    }
    const double moved = norm(subtract(ret.crossing->x, p));
    p = ret.crossing->x;
    out.last_iterates.push_back(p);
    if (out.last_iterates.size() > 8) out.last_iterates.erase(out.last_iterates.begin());

    if (moved < switch_at) {
      if (auto c = refine_cycle(sys, dom, p, ret.crossing->t, local)) {
        c->loops = loop;
        out.cycle = std::move(c);
        return out;
      }
      // Newton did not converge from here; keep iterating the return map closer.
      switch_at *= 0.1;
    }
  }
  out.failure = CycleFailure::Stalled;
  out.message = "return map did not settle within " + std::to_string(settings.max_loops) + " loops";
  return out;
}

GraphCheck graph_property_check(const std::vector<Vec>& orbit, const SymSpectrum& spectrum,
                                std::size_t m) {
  GraphCheck g;
  if (orbit.size() < 2) return g;
  const Matrix p = leading_projector(spectrum.eigenvectors, m);
  const std::size_t n = p.rows();
  double scale = 0.0;
  for (const Vec& x : orbit) scale = std::max(scale, norm(x));
  const double tiny = 1e-12 * std::max(1.0, scale);

  // Project every sample once; differences of projections are projections of differences.
  std::vector<Vec> px(orbit.size()), qx(orbit.size());
  for (std::size_t i = 0; i < orbit.size(); ++i) {
    px[i] = p * orbit[i];
    qx[i] = subtract(orbit[i], px[i]);
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < orbit.size(); ++i) {
    for (std::size_t j = i + 1; j < orbit.size(); ++j) {
      double np = 0.0, nq = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const double a = px[i][k] - px[j][k];
        const double b = qx[i][k] - qx[j][k];
        np += a * a;
        nq += b * b;
      }
      np = std::sqrt(np);
      nq = std::sqrt(nq);
      if (np + nq < tiny) continue;
      const double ratio = np > 0.0 ? nq / np : std::numeric_limits<double>::infinity();
      worst = std::max(worst, ratio);
    }
  }
  g.worst_ratio = worst;
  g.ok = worst <= 1.0 + 1e-6;
  return g;
}

namespace {

// Distance from x to the closed polyline through the orbit samples.
double distance_to_orbit(const std::vector<Vec>& orbit, std::span<const double> x) {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < orbit.size(); ++i) {
    const Vec& a = orbit[i];
    const Vec& b = orbit[(i + 1) % orbit.size()];
    double ab2 = 0.0, t = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      ab2 += (b[k] - a[k]) * (b[k] - a[k]);
      t += (x[k] - a[k]) * (b[k] - a[k]);
    }
    t = ab2 > 0.0 ? std::clamp(t / ab2, 0.0, 1.0) : 0.0;
    double d2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double c = a[k] + t * (b[k] - a[k]) - x[k];
      d2 += c * c;
    }
    best = std::min(best, d2);
  }
  return std::sqrt(best);
}

}  // namespace

TrackingReport exponential_tracking_probe(const OdeSystem& sys, const BoxDomain& dom,
                                          const CycleInfo& cycle, const std::vector<Vec>& starts,
                                          double horizon, double tol_rel, double tol_abs) {
  if (cycle.orbit.size() < 8) invalid_argument("cycle has no orbit samples");
  if (!(horizon > 0.0)) invalid_argument("tracking horizon must be positive");
  TrackingReport rep;
  IntegratorOptions opts;
  opts.tol_rel = tol_rel;
  opts.tol_abs = tol_abs;

  // Floor: the chord error of the sampled orbit, measured at mid-sample points.
  {
    const Trajectory tr = integrate_dense(field_rhs(sys), cycle.anchor, 0.0, cycle.period, opts);
    const std::size_t ns = cycle.orbit.size();
    for (std::size_t i = 0; i < ns; ++i) {
      const double t = cycle.period * (static_cast<double>(i) + 0.5) / static_cast<double>(ns);
      rep.distance_floor = std::max(rep.distance_floor, distance_to_orbit(cycle.orbit, tr.eval(t)));
    }
  }

  double extent = 0.0;
  for (const Vec& x : cycle.orbit) extent = std::max(extent, norm(subtract(x, cycle.anchor)));
  const double diam = dom.diameter();
  constexpr int kSamples = 2000;

  for (const Vec& s : starts) {
    ProbeResult pr;
    pr.start = s;
    const Trajectory tr = integrate_dense(field_rhs(sys), s, 0.0, horizon, opts);
    if (!tr.result.ok()) {
      pr.other_attractor = false;
      rep.probes.push_back(pr);
      continue;
    }
    std::vector<double> ts, ds;
    ts.reserve(kSamples + 1);
    ds.reserve(kSamples + 1);
    for (int i = 0; i <= kSamples; ++i) {
      const double t = horizon * i / kSamples;
      ts.push_back(t);
      ds.push_back(distance_to_orbit(cycle.orbit, tr.eval(t)));
    }
    pr.final_distance = ds.back();
    pr.converged = pr.final_distance < 1e-4 * diam;
    pr.other_attractor = !pr.converged;

    // Least-squares slope of log d over the decaying window above the floor.
    const double lo = 50.0 * rep.distance_floor, hi = 0.05 * std::max(extent, 1e-300);
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int cnt = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (ds[i] > lo && ds[i] < hi) {
        const double ly = std::log(ds[i]);
        sx += ts[i];
        sy += ly;
        sxx += ts[i] * ts[i];
        sxy += ts[i] * ly;
        ++cnt;
      }
    }
    if (cnt >= 8) {
      const double den = cnt * sxx - sx * sx;
      if (den > 0.0) {
        pr.rate = (cnt * sxy - sx * sy) / den;
        pr.rate_fitted = true;
      }
    }
    rep.converged += pr.converged ? 1 : 0;
    rep.other_attractors += pr.other_attractor ? 1 : 0;
    rep.probes.push_back(std::move(pr));
  }
  return rep;
}

TrackingReport exponential_tracking_probe(const OdeSystem& sys, const BoxDomain& dom,
                                          const CycleInfo& cycle, int n_probes, double horizon,
                                          unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec> starts;
  for (int i = 0; i < n_probes; ++i) {
    Vec frac(dom.dim());
    for (double& f : frac) f = u(rng);
    starts.push_back(dom.at_fraction(frac));
  }
  return exponential_tracking_probe(sys, dom, cycle, starts, horizon);
}

}  // namespace gapcert
