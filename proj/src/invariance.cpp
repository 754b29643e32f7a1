#include "gapcert/invariance.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gapcert/error.hpp"
#include "gapcert/flow.hpp"

namespace gapcert {

std::string to_string(InvarianceVerdict v) {
  switch (v) {
    case InvarianceVerdict::Strict: return "strict";
    case InvarianceVerdict::WeakResolved: return "weak-with-edge-resolution";
    case InvarianceVerdict::Fail: return "fail";
  }
  return "unknown";
}

namespace {

std::string point_text(const Vec& x) {
  std::ostringstream os;
  os.precision(10);
  os << "(";
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  return os.str();
}

}  // namespace

InvarianceReport check_inward(const OdeSystem& sys, const BoxDomain& dom, int samples_per_face) {
  if (samples_per_face < 100) invalid_argument("check_inward needs >= 100 samples per face");
  const std::size_t n = sys.dim();
  if (dom.dim() != n) invalid_argument("domain dimension does not match the system");

  InvarianceReport rep;
  if (n == 1) {
    // Faces are the two end points.
    samples_per_face = 1;
  }
  int per_axis = 2;
  if (n > 1)
    while (std::pow(static_cast<double>(per_axis), static_cast<double>(n - 1)) < samples_per_face)
      ++per_axis;

  bool any_weak = false;
  auto fail = [&](const Vec& x, std::string why) {
    if (rep.witness) return;
    rep.witness = x;
    rep.reason = std::move(why) + " at " + point_text(x);
  };

  for (std::size_t axis = 0; axis < n; ++axis) {
    for (int side = 0; side < 2; ++side) {
      FaceReport face;
      face.axis = axis;
      face.upper = side == 1;
      face.max_outward = -std::numeric_limits<double>::infinity();

      std::vector<int> idx(n > 1 ? n - 1 : 0, 0);
      Vec x(n);
      for (;;) {
        for (std::size_t i = 0, k = 0; i < n; ++i) {
          if (i == axis) {
            x[i] = face.upper ? dom.upper()[i] : dom.lower()[i];
            continue;
          }
          const int j = idx[k++];
          x[i] = j == per_axis - 1 ? dom.upper()[i]
                                   : dom.lower()[i] + dom.width(i) * j / (per_axis - 1);
        }
        const Vec f = sys.field(x);
        ++face.samples;
        double finf = 0.0;
        for (double v : f) finf = std::max(finf, std::abs(v));
        if (!std::isfinite(finf)) {
          fail(x, "non-finite field on the boundary");
        } else if (norm(f) < 1e-8) {
          fail(x, "equilibrium on the boundary");
        } else {
          // Rounding level of each component: f_i = -(Ax)_i + F_i, plus a floor for
          // cancellation inside F. Far below any genuine small inflow.
          const Vec ax = sys.A() * x;
          const Vec nl = sys.nonlinearity(x);
          auto tol_of = [&](std::size_t i) {
            return 1e-12 * (std::abs(ax[i]) + std::abs(nl[i])) + 1e-13 * (1.0 + finf);
          };
          const double tol = tol_of(axis);
          const double comp = face.upper ? f[axis] : -f[axis];
          face.max_outward = std::max(face.max_outward, comp);
          if (comp > tol) {
            fail(x, "field points outward through face x" + std::to_string(axis + 1) +
                        (face.upper ? " = upper" : " = lower"));
          } else if (comp >= -tol) {
            ++face.tangent;
            // Another face active at this point must push strictly inward.
            bool resolved = false;
            for (std::size_t o = 0; o < n && !resolved; ++o) {
              if (o == axis) continue;
              const bool at_lo = x[o] == dom.lower()[o];
              const bool at_hi = x[o] == dom.upper()[o];
              if (at_lo && f[o] > tol_of(o)) resolved = true;
              if (at_hi && f[o] < -tol_of(o)) resolved = true;
            }
            if (resolved) ++face.resolved;
            else fail(x, "tangent field not resolved by an adjacent face");
          }
        }
        std::size_t d = 0;
        while (d < idx.size() && ++idx[d] >= per_axis) idx[d++] = 0;
        if (d == idx.size()) break;
      }
      face.weak = face.tangent > 0;
      any_weak = any_weak || face.weak;
      rep.samples += face.samples;
      rep.faces.push_back(face);
    }
  }

  if (rep.witness) rep.verdict = InvarianceVerdict::Fail;
  else rep.verdict = any_weak ? InvarianceVerdict::WeakResolved : InvarianceVerdict::Strict;
  return rep;
}

TrappingReport empirical_trapping(const OdeSystem& sys, const BoxDomain& dom, int n_starts,
                                  double horizon) {
  if (n_starts < 10) invalid_argument("empirical_trapping needs >= 10 starts");
  if (!(horizon > 0.0)) invalid_argument("trapping horizon must be positive");
  const std::size_t n = sys.dim();
  int per_axis = 1;
  while (std::pow(static_cast<double>(per_axis), static_cast<double>(n)) < n_starts) ++per_axis;

  TrappingReport rep;
  std::vector<int> idx(n, 0);
  Vec u(n), buf(n);
  for (int s = 0; s < n_starts; ++s) {
    for (std::size_t i = 0; i < n; ++i) u[i] = (idx[i] + 1.0) / (per_axis + 1.0);
    const Vec x0 = dom.at_fraction(u);
    for (std::size_t d = 0; d < n && ++idx[d] >= per_axis; ++d) idx[d] = 0;

    bool escaped = false;
    IntegratorOptions opts;
    const IntegrationResult r =
        integrate_rhs(field_rhs(sys), x0, 0.0, horizon, opts, [&](const DenseStep& st) {
          for (double frac : {0.5, 1.0}) {
            st.eval_into(st.t0 + frac * st.h, buf);
            if (!dom.contains_closed(buf, 1e-9)) {
              escaped = true;
              return false;
            }
          }
          return true;
        });
    if (!escaped && !r.ok()) numerical_failure("trapping integration failed: " + r.message);
    ++rep.starts;
    if (escaped) {
      if (!rep.escape_start) rep.escape_start = x0;
    } else {
      ++rep.trapped;
    }
  }
  rep.fraction = static_cast<double>(rep.trapped) / rep.starts;
  return rep;
}

}  // namespace gapcert
