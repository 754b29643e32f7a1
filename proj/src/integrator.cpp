#include <algorithm>
#include <cmath>
#include <limits>

#include "gapcert/error.hpp"
#include "gapcert/flow.hpp"

namespace gapcert {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 0.2, c3 = 0.3, c4 = 0.8, c5 = 8.0 / 9.0;
constexpr double a21 = 0.2;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

// Step-size control.
constexpr double kSafe = 0.9, kFacl = 0.2, kFacr = 10.0, kBeta = 0.04;

bool all_finite(const Vec& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

struct Stepper {
  const Rhs& rhs;
  std::size_t n;
  Vec k1, k2, k3, k4, k5, k6, k7, ytmp, ynew, err;

  Stepper(const Rhs& r, std::size_t dim)
      : rhs(r), n(dim), k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim),
        ytmp(dim), ynew(dim), err(dim) {}

  void f(const Vec& x, Vec& out) { rhs(x, out); }

  // One trial step from (y, k1); fills ynew, k7 and the error vector.
  void trial(const Vec& y, double h) {
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
    f(ytmp, k2);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    f(ytmp, k3);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    f(ytmp, k4);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    f(ytmp, k5);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    f(ytmp, k6);
    for (std::size_t i = 0; i < n; ++i)
      ynew[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    f(ynew, k7);
    for (std::size_t i = 0; i < n; ++i)
      err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
  }

  double error_norm(const Vec& y, double rtol, double atol) const {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sk = atol + rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      const double r = err[i] / sk;
      s += r * r;
    }
    return std::sqrt(s / static_cast<double>(n));
  }

  void dense(const Vec& y, double t0, double h, DenseStep& out) const {
    out.t0 = t0;
    out.h = h;
    out.coeffs.resize(5 * n);
    double* r = out.coeffs.data();
    for (std::size_t i = 0; i < n; ++i) {
      const double dy = ynew[i] - y[i];
      const double bspl = h * k1[i] - dy;
      r[i] = y[i];
      r[n + i] = dy;
      r[2 * n + i] = bspl;
      r[3 * n + i] = dy - h * k7[i] - bspl;
      r[4 * n + i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] +
                          d7 * k7[i]);
    }
  }
};

double initial_step(Stepper& s, const Vec& y, double rtol, double atol, double hmax) {
  double dnf = 0.0, dny = 0.0;
  for (std::size_t i = 0; i < s.n; ++i) {
    const double sk = atol + rtol * std::abs(y[i]);
    dnf += (s.k1[i] / sk) * (s.k1[i] / sk);
    dny += (y[i] / sk) * (y[i] / sk);
  }
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * std::sqrt(dny / dnf);
  h = std::min(h, hmax);
  Vec y1(s.n), f1(s.n);
  for (std::size_t i = 0; i < s.n; ++i) y1[i] = y[i] + h * s.k1[i];
  s.f(y1, f1);
  double der2 = 0.0;
  for (std::size_t i = 0; i < s.n; ++i) {
    const double sk = atol + rtol * std::abs(y[i]);
    const double d = (f1[i] - s.k1[i]) / sk;
    der2 += d * d;
  }
  der2 = std::sqrt(der2) / h;
  const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
  const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
  if (!std::isfinite(h1)) return std::min(h, hmax);
  return std::min({100.0 * h, h1, hmax});
}

IntegrationResult run(const Rhs& rhs, Vec y, double t0, double t1, const IntegratorOptions& opts,
                      const std::function<bool(const DenseStep&, double)>& on_step) {
  if (!(t1 > t0)) invalid_argument("integration interval must have t1 > t0");
  if (y.empty()) invalid_argument("empty initial state");
  const std::size_t n = y.size();
  Stepper s(rhs, n);
  IntegrationResult res;
  res.t = t0;

  s.f(y, s.k1);
  if (!all_finite(y) || !all_finite(s.k1)) {
    res.status = IntegrationStatus::NonFinite;
    res.x = y;
    res.message = "non-finite initial state or field";
    return res;
  }

  const double span_len = t1 - t0;
  const double hmax = opts.max_step > 0.0 ? opts.max_step : span_len;
  const bool fixed = opts.fixed_step > 0.0;
  double h = fixed ? opts.fixed_step
                   : (opts.initial_step > 0.0 ? std::min(opts.initial_step, hmax)
                                              : initial_step(s, y, opts.tol_rel, opts.tol_abs, hmax));
  const double expo1 = 0.2 - kBeta * 0.75;
  const double facc1 = 1.0 / kFacl, facc2 = 1.0 / kFacr;
  double facold = 1e-4;
  bool last_rejected = false;
  double t = t0;
  DenseStep step;

  for (;;) {
    if (res.accepted + res.rejected >= opts.max_steps) {
      res.status = IntegrationStatus::MaxSteps;
      res.message = "step budget exhausted at t = " + std::to_string(t);
      break;
    }
    bool last = false;
    if (t + 1.01 * h - t1 >= 0.0) {
      h = t1 - t;
      last = true;
    }
    if (h < 10.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
      res.status = IntegrationStatus::StepUnderflow;
      res.message = "step size underflow at t = " + std::to_string(t);
      break;
    }

    s.trial(y, h);
    const double e = s.error_norm(y, opts.tol_rel, opts.tol_abs);
    if (!std::isfinite(e) || !all_finite(s.ynew)) {
      if (fixed) {
        res.status = IntegrationStatus::NonFinite;
        res.message = "non-finite state at t = " + std::to_string(t);
        break;
      }
      h *= 0.1;
      ++res.rejected;
      last_rejected = true;
      continue;
    }

    if (fixed || e <= 1.0) {
      s.dense(y, t, h, step);
      ++res.accepted;
      t = last ? t1 : t + h;
      y = s.ynew;
      s.k1 = s.k7;
      const bool keep_going = !on_step || on_step(step, e);
      if (!keep_going) {
        res.status = IntegrationStatus::Stopped;
        break;
      }
      if (last) break;
      if (!fixed) {
        const double fac11 = std::pow(e, expo1);
        double fac = fac11 / std::pow(facold, kBeta);
        fac = std::max(facc2, std::min(facc1, fac / kSafe));
        double hnew = h / fac;
        facold = std::max(e, 1e-4);
        hnew = std::min(hnew, hmax);
        if (last_rejected) hnew = std::min(hnew, h);
        last_rejected = false;
        h = hnew;
      }
    } else {
      const double fac11 = std::pow(e, expo1);
      h /= std::min(facc1, fac11 / kSafe);
      ++res.rejected;
      last_rejected = true;
    }
  }
  res.t = t;
  res.x = std::move(y);
  return res;
}

}  // namespace

void DenseStep::eval_into(double t, std::span<double> out) const {
  const std::size_t n = dim();
  const double th = h != 0.0 ? (t - t0) / h : 0.0;
  const double th1 = 1.0 - th;
  const double* r = coeffs.data();
  for (std::size_t i = 0; i < n; ++i)
    out[i] = r[i] + th * (r[n + i] + th1 * (r[2 * n + i] + th * (r[3 * n + i] + th1 * r[4 * n + i])));
}

Vec DenseStep::eval(double t) const {
  Vec out(dim());
  eval_into(t, out);
  return out;
}

IntegrationResult integrate_rhs(const Rhs& rhs, Vec x0, double t0, double t1,
                                const IntegratorOptions& opts, const StepObserver& observer) {
  if (observer)
    return run(rhs, std::move(x0), t0, t1, opts,
               [&](const DenseStep& s, double) { return observer(s); });
  return run(rhs, std::move(x0), t0, t1, opts, {});
}

Rhs field_rhs(const OdeSystem& sys) {
  return [&sys](std::span<const double> x, std::span<double> dx) {
    const Vec f = sys.field(Vec(x.begin(), x.end()));
    std::copy(f.begin(), f.end(), dx.begin());
  };
}

Trajectory integrate_dense(const Rhs& rhs, const Vec& x0, double t0, double t1,
                           const IntegratorOptions& opts) {
  Trajectory tr;
  tr.x0_ = x0;
  tr.t_begin_ = t0;
  tr.result = run(rhs, x0, t0, t1, opts, [&](const DenseStep& s, double e) {
    tr.steps_.push_back(s);
    tr.errors_.push_back(e);
    return true;
  });
  return tr;
}

Trajectory integrate(const OdeSystem& sys, const Vec& x0, double t0, double t1, double tol_rel,
                     double tol_abs) {
  auto in_range = [](double v) { return v >= 1e-12 && v <= 1e-3; };
  if (!in_range(tol_rel) || !in_range(tol_abs))
    invalid_argument("integration tolerances must lie in [1e-12, 1e-3]");
  if (x0.size() != sys.dim()) invalid_argument("initial state has wrong dimension");
  IntegratorOptions opts;
  opts.tol_rel = tol_rel;
  opts.tol_abs = tol_abs;
  return integrate_dense(field_rhs(sys), x0, t0, t1, opts);
}

Vec Trajectory::eval(double t) const {
  if (steps_.empty()) return x0_;
  if (t <= steps_.front().t0) return steps_.front().eval(steps_.front().t0);
  if (t >= steps_.back().t1()) return steps_.back().eval(steps_.back().t1());
  auto it = std::upper_bound(steps_.begin(), steps_.end(), t,
                             [](double v, const DenseStep& s) { return v < s.t1(); });
  if (it == steps_.end()) --it;
  return it->eval(t);
}

Vec Trajectory::final_state() const { return result.x.empty() ? x0_ : result.x; }

double Section::signed_distance(std::span<const double> x) const {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += normal[i] * (x[i] - point[i]);
  return s;
}

ReturnResult first_return(const OdeSystem& sys, const Vec& x0, const Section& section,
                          double t_max, const IntegratorOptions& opts,
                          const BoxDomain* stay_inside) {
  ReturnResult out;
  const std::size_t n = sys.dim();
  bool armed = section.signed_distance(x0) < 0.0;
  Vec buf(n);
  // Interior probe points of every step so a short excursion below the
  // section within one step is still seen.
  constexpr double probes[] = {0.25, 0.5, 0.75, 1.0};

  out.integration = integrate_rhs(field_rhs(sys), x0, 0.0, t_max, opts, [&](const DenseStep& st) {
    double ta = st.t0;
    double sa = section.signed_distance(st.eval(st.t0));
    for (double frac : probes) {
      const double tb = st.t0 + frac * st.h;
      st.eval_into(tb, buf);
      if (stay_inside && !stay_inside->contains_closed(buf, 1e-9)) {
        out.left_domain = true;
        return false;
      }
      const double sb = section.signed_distance(buf);
      if (armed && sa < 0.0 && sb >= 0.0) {
        // Illinois regula falsi on the continuous extension.
        double lo = ta, hi = tb, flo = sa, fhi = sb;
        int side = 0;
        for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(hi)); ++it) {
          double tm = (lo * fhi - hi * flo) / (fhi - flo);
          if (!(tm > lo && tm < hi)) tm = 0.5 * (lo + hi);
          const double fm = section.signed_distance(st.eval(tm));
          if (fm < 0.0) {
            lo = tm;
            flo = fm;
            if (side == -1) fhi *= 0.5;
            side = -1;
          } else {
            hi = tm;
            fhi = fm;
            if (side == 1) flo *= 0.5;
            side = 1;
            if (fm == 0.0) break;
          }
        }
        out.crossing = Crossing{hi, st.eval(hi)};
        return false;
      }
      if (sb < 0.0) armed = true;
      ta = tb;
      sa = sb;
    }
    return true;
  });

  if (!out.crossing && !out.left_domain && out.integration.status == IntegrationStatus::Completed)
    out.timed_out = true;
  return out;
}

}  // namespace gapcert
