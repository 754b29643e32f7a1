#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>

#include "gapcert/equilibria.hpp"
#include "gapcert/error.hpp"
#include "gapcert/flow.hpp"
#include "gapcert/gaplip.hpp"

using namespace gapcert;

namespace {

constexpr double kPi = std::numbers::pi;

// r' = r - r^3, theta' = w, z' = -lz z.
Vec hopf_exact(const Vec& x0, double w, double lz, double t) {
  const double r0 = std::hypot(x0[0], x0[1]);
  const double th0 = std::atan2(x0[1], x0[0]);
  const double r = 1.0 / std::sqrt(1.0 + (1.0 / (r0 * r0) - 1.0) * std::exp(-2.0 * t));
  const double th = th0 + w * t;
  return {r * std::cos(th), r * std::sin(th), x0[2] * std::exp(-lz * t)};
}

double endpoint_error(const IntegrationResult& r, const Vec& exact) {
  return norm(subtract(r.x, exact));
}

const BoxDomain hopf_box({-2, -2, -1}, {2, 2, 1});

struct Located {
  OdeSystem sys;
  BoxDomain dom;
  CycleInfo cycle;
};

Located locate(OdeSystem sys, BoxDomain dom) {
  const auto eq = find_equilibria(sys, dom);
  EXPECT_EQ(eq.size(), 1u);
  const CycleSearch s = locate_cycle(sys, dom, eq.at(0).x, CycleSettings{});
  EXPECT_TRUE(s.cycle) << s.message;
  return {std::move(sys), std::move(dom), s.cycle.value_or(CycleInfo{})};
}

const Located& hopf_cycle() {
  static const Located l = locate(hopf_oracle(1.0, 1.0), hopf_box);
  return l;
}

const Located& satellite_cycle() {
  static const Located l = [] {
    const auto g = default_satellite_control(0.05, 0.05, 2.1);
    return locate(satellite_system(0.05, 0.05, 2.1, g), satellite_domain(0.05, 0.05, 2.1, g.bound));
  }();
  return l;
}

const Located& cell_cycle(double k, double q) {
  static std::map<std::pair<double, double>, Located> cache;
  auto it = cache.find({k, q});
  if (it == cache.end()) {
    CellParams p;
    p.k = k;
    p.q = q;
    it = cache.emplace(std::pair{k, q}, locate(cell_system(p), cell_domain(p))).first;
  }
  return it->second;
}

std::vector<const Located*> all_cycles() {
  return {&hopf_cycle(), &satellite_cycle(), &cell_cycle(3.0, 0.1), &cell_cycle(2.5, 0.1),
          &cell_cycle(5.0, 0.05)};
}

void expect_cycle_invariants(const Located& l) {
  const CycleInfo& c = l.cycle;
  SCOPED_TRACE(l.sys.label());
  EXPECT_GE(c.orbit.size(), 256u);
  const Trajectory tr = integrate(l.sys, c.anchor, 0.0, c.period, 1e-11, 1e-12);
  ASSERT_TRUE(tr.result.ok());
  EXPECT_LE(norm(subtract(tr.final_state(), c.anchor)), 1e-7 * (1 + norm(c.anchor)));
  EXPECT_LE(std::abs(std::abs(c.multipliers.at(c.trivial_index)) - 1.0), 1e-3);
  EXPECT_LE(std::abs(c.multipliers.at(c.trivial_index) - Complex(1.0)), 1e-3);
  EXPECT_GE(c.period, c.period_lower_bound);
  bool all_inside = true;
  for (std::size_t i = 0; i < c.multipliers.size(); ++i)
    if (i != c.trivial_index) all_inside = all_inside && std::abs(c.multipliers[i]) < 1.0;
  EXPECT_EQ(c.stable, all_inside);
}

}  // namespace

// ------------------------------------------------------------- integrator

TEST(Integrator, LinearDecay) {
  const std::size_t n = 4;
  const OdeSystem sys("decay", Matrix::identity(n), [n](const Vec&) { return Vec(n, 0.0); },
                      [n](const Vec&) { return Matrix(n, n); }, true, true);
  const Trajectory t = integrate(sys, Vec(n, 1.0), 0.0, 1.0, 1e-10, 1e-12);
  ASSERT_TRUE(t.result.ok());
  for (double v : t.final_state()) EXPECT_NEAR(v, std::exp(-1.0), 1e-9);
}

TEST(Integrator, HopfAgainstClosedForm) {
  const OdeSystem h = hopf_oracle(1.0, 1.0);
  const Vec x0{2, 0, 1};
  const Trajectory t = integrate(h, x0, 0.0, 20.0, 1e-10, 1e-12);
  ASSERT_TRUE(t.result.ok());
  const Vec exact = hopf_exact(x0, 1.0, 1.0, 20.0);
  EXPECT_LE(norm(subtract(t.final_state(), exact)), 1e-6);
  EXPECT_NEAR(exact[0], std::cos(20.0), 1e-8);
  for (double s : {0.3, 1.7, 5.55, 13.0}) EXPECT_LE(norm(subtract(t.eval(s), hopf_exact(x0, 1, 1, s))), 1e-7);
}

TEST(Integrator, TrajectoryInvariants) {
  const OdeSystem h = hopf_oracle(1.0, 1.0);
  const double tol = 1e-8;
  const Trajectory t = integrate(h, Vec{0.3, 0.1, 0.5}, 0.0, 15.0, tol, 1e-12);
  ASSERT_TRUE(t.result.ok());
  const auto& st = t.steps();
  ASSERT_GT(st.size(), 10u);
  EXPECT_EQ(st.size(), t.error_estimates().size());
  for (std::size_t i = 1; i < st.size(); ++i) {
    ASSERT_GT(st[i].h, 0.0);
    EXPECT_DOUBLE_EQ(st[i].t0, st[i - 1].t1());
    const Vec a = st[i - 1].eval(st[i - 1].t1()), b = st[i].eval(st[i].t0);
    EXPECT_LE(norm(subtract(a, b)), 10 * tol * (1 + norm(b)));
  }
}

TEST(Integrator, ToleranceRange) {
  const OdeSystem h = hopf_oracle(1.0, 1.0);
  EXPECT_THROW(integrate(h, Vec{1, 0, 0}, 0, 1, 1e-13, 1e-12), Error);
  EXPECT_THROW(integrate(h, Vec{1, 0, 0}, 0, 1, 1e-2, 1e-12), Error);
  EXPECT_THROW(integrate(h, Vec{1, 0, 0}, 0, 1, 1e-9, 1e-2), Error);
}

TEST(Integrator, NonFiniteAndBlowUpFail) {
  const OdeSystem nan_field(
      "nan", Matrix(1, 1), [](const Vec& x) { return Vec{x[0] > 0.5 ? std::nan("") : 1.0}; },
      [](const Vec&) { return Matrix(1, 1); }, true, true);
  const Trajectory a = integrate(nan_field, Vec{0.0}, 0.0, 2.0, 1e-9, 1e-12);
  EXPECT_FALSE(a.result.ok());
  EXPECT_FALSE(a.result.message.empty());
  EXPECT_LT(a.result.t, 0.6);

  const OdeSystem blowup = parse_system({"x1^2"}, Matrix{{0.0}});
  const Trajectory b = integrate(blowup, Vec{1.0}, 0.0, 2.0, 1e-9, 1e-12);
  EXPECT_FALSE(b.result.ok());
  EXPECT_NEAR(b.result.t, 1.0, 1e-3);
  EXPECT_NE(b.result.message.find("t = "), std::string::npos) << b.result.message;
}

// 5th-order scaling: halving a fixed step reduces the global error ~32x.
TEST(Integrator, FixedStepOrder) {
  const OdeSystem h = hopf_oracle(1.0, 1.0);
  const Vec x0{0.5, 0.2, 1.0};
  const Vec exact = hopf_exact(x0, 1.0, 1.0, 4.0);
  double prev = -1.0;
  for (double step : {0.2, 0.1, 0.05}) {
    IntegratorOptions o;
    o.fixed_step = step;
    const double err = endpoint_error(integrate_rhs(field_rhs(h), x0, 0.0, 4.0, o), exact);
    if (prev > 0) EXPECT_GE(prev / err, 8.0) << "h = " << step;
    prev = err;
  }
}

// The adaptive controller keeps the global error proportional to tol_rel.
TEST(Integrator, ErrorTracksTolerance) {
  const OdeSystem h = hopf_oracle(1.0, 1.0);
  const Vec x0{0.5, 0.2, 1.0};
  const Vec exact = hopf_exact(x0, 1.0, 1.0, 10.0);
  IntegratorOptions o;
  o.tol_abs = 1e-14;
  o.tol_rel = 1e-6;
  const double coarse = endpoint_error(integrate_rhs(field_rhs(h), x0, 0.0, 10.0, o), exact);
  o.tol_rel = 1e-9;
  const double fine = endpoint_error(integrate_rhs(field_rhs(h), x0, 0.0, 10.0, o), exact);
  EXPECT_GT(coarse / fine, 100.0);
  EXPECT_LT(fine, 1e-7);
}

TEST(Integrator, ObserverStops) {
  const OdeSystem h = hopf_oracle(1.0, 1.0);
  int calls = 0;
  const IntegrationResult r = integrate_rhs(field_rhs(h), Vec{1, 0, 0}, 0.0, 100.0, IntegratorOptions{},
                                            [&](const DenseStep&) { return ++calls < 3; });
  EXPECT_EQ(r.status, IntegrationStatus::Stopped);
  EXPECT_EQ(calls, 3);
}

// ---------------------------------------------------------------- sections

TEST(FirstReturn, HopfQuarterTurn) {
  const OdeSystem h = hopf_oracle(1.0, 1.0);
  // Section x1 = 0 with normal -e1: crossed when x1 turns negative.
  const Section s{Vec{0, 0, 0}, Vec{-1, 0, 0}};
  const ReturnResult r = first_return(h, Vec{1, 0, 0}, s, 20.0, IntegratorOptions{});
  ASSERT_TRUE(r.crossing);
  EXPECT_NEAR(r.crossing->t, kPi / 2, 1e-8);
  EXPECT_NEAR(r.crossing->x[1], 1.0, 1e-8);
  const ReturnResult none = first_return(h, Vec{1, 0, 0}, s, 1.0, IntegratorOptions{});
  EXPECT_FALSE(none.crossing);
  EXPECT_TRUE(none.timed_out);
  const BoxDomain small({0.5, -2, -1}, {2, 2, 1});
  const ReturnResult out = first_return(h, Vec{1, 0, 0}, s, 20.0, IntegratorOptions{}, &small);
  EXPECT_TRUE(out.left_domain);
}

// ------------------------------------------------------------------ cycles

TEST(Cycle, HopfMatchesAnalyticSolution) {
  const CycleInfo& c = hopf_cycle().cycle;
  EXPECT_NEAR(c.period, 2 * kPi, 1e-6);
  EXPECT_NEAR(std::hypot(c.anchor[0], c.anchor[1]), 1.0, 1e-6);
  EXPECT_NEAR(c.anchor[2], 0.0, 1e-6);
  std::vector<double> mods;
  for (const Complex& m : c.multipliers) mods.push_back(std::abs(m));
  std::sort(mods.begin(), mods.end());
  EXPECT_NEAR(mods[0], std::exp(-4 * kPi), 1e-4);
  EXPECT_NEAR(mods[1], std::exp(-2 * kPi), 1e-4);
  EXPECT_NEAR(mods[2], 1.0, 1e-4);
  EXPECT_TRUE(c.stable);
  EXPECT_EQ(c.stability, StabilityVerdict::Stable);
}

TEST(Cycle, InvariantsOnEveryLocatedCycle) {
  for (const Located* l : all_cycles()) expect_cycle_invariants(*l);
}

TEST(Cycle, BuiltinCyclesStableAndInside) {
  for (const Located* l : {&satellite_cycle(), &cell_cycle(3.0, 0.1), &cell_cycle(2.5, 0.1),
                           &cell_cycle(5.0, 0.05)}) {
    SCOPED_TRACE(l->sys.label());
    EXPECT_TRUE(l->cycle.stable);
    EXPECT_TRUE(l->cycle.inside_domain);
    for (const Vec& x : l->cycle.orbit) ASSERT_TRUE(l->dom.contains_open(x));
  }
}

TEST(Cycle, LiouvilleDeterminant) {
  for (const Located* l : all_cycles()) {
    SCOPED_TRACE(l->sys.label());
    const Monodromy m = monodromy(l->sys, l->cycle);
    EXPECT_LE(m.liouville_error, 1e-4);
    EXPECT_LE(std::abs(m.log_det_segments - m.log_liouville), 1e-4);
    // Direct determinant is compared where it is representable.
    if (std::abs(m.log_liouville) < 300)
      EXPECT_NEAR(m.det, m.liouville_det, 1e-4 * std::abs(m.liouville_det));
  }
}

TEST(Cycle, RobustToSectionPhase) {
  for (const Located* l : all_cycles()) {
    SCOPED_TRACE(l->sys.label());
    const CycleInfo& c = l->cycle;
    const Vec quarter = c.orbit.at(c.orbit.size() / 4);
    const auto again = refine_cycle(l->sys, l->dom, quarter, c.period, CycleSettings{});
    ASSERT_TRUE(again);
    EXPECT_NEAR(again->period, c.period, 1e-6 * c.period);
  }
}

TEST(Cycle, Deterministic) {
  const OdeSystem h = hopf_oracle(1.0, 1.0);
  const auto a = locate_cycle(h, hopf_box, Vec{0, 0, 0}, CycleSettings{});
  const auto b = locate_cycle(h, hopf_box, Vec{0, 0, 0}, CycleSettings{});
  ASSERT_TRUE(a.cycle && b.cycle);
  EXPECT_EQ(*a.cycle, *b.cycle);
}

TEST(Cycle, StableEquilibriumIsRejected) {
  // No unstable direction to depart along: a precondition violation.
  const OdeSystem s = parse_system({"-x1 + x2", "-x1 - x2"}, Matrix(2, 2));
  EXPECT_THROW(locate_cycle(s, BoxDomain({-1, -1}, {1, 1}), Vec{0, 0}, CycleSettings{}), Error);
}

TEST(Multipliers, Classification) {
  using C = std::vector<Complex>;
  EXPECT_EQ(classify_multipliers(C{1.0, 0.5, 0.99}, 0), StabilityVerdict::Stable);
  EXPECT_EQ(classify_multipliers(C{1.0, 0.5, 1.0 - 5e-5}, 0), StabilityVerdict::Marginal);
  EXPECT_EQ(classify_multipliers(C{0.3, 1.0, 1.2}, 1), StabilityVerdict::Unstable);
  EXPECT_EQ(classify_multipliers(C{1.0, Complex(0, 0.9999)}, 0), StabilityVerdict::Marginal);
}

// --------------------------------------------------------- graph property

TEST(Graph, PlanarCycleInLeadingPlaneHasRatioZero) {
  const GraphCheck g = graph_property_check(hopf_cycle().cycle.orbit, sym_eigen(hopf_oracle(1, 1).A()));
  EXPECT_TRUE(g.ok);
  EXPECT_NEAR(g.worst_ratio, 0.0, 1e-6);
}

TEST(Graph, TiltedCircleIsRejected) {
  std::vector<Vec> orbit;
  for (int i = 0; i < 256; ++i) {
    const double t = 2 * kPi * i / 256;
    orbit.push_back({std::cos(t), 0.2 * std::sin(t), 2.0 * std::sin(t)});
  }
  const GraphCheck g = graph_property_check(orbit, sym_eigen(Matrix::diagonal(Vec{1, 2, 3})));
  EXPECT_FALSE(g.ok);
  EXPECT_NEAR(g.worst_ratio, 10.0, 1e-9);
}

TEST(Graph, BuiltinCycles) {
  // Satellite: eigenvector order of A = diag(mu) with the tie kept.
  const auto& s = satellite_cycle();
  const GraphCheck gs = graph_property_check(s.cycle.orbit, sym_eigen(s.sys.A()));
  EXPECT_TRUE(gs.ok);
  EXPECT_LE(gs.worst_ratio, 1.0);
  for (auto [k, q] : {std::pair{3.0, 0.1}, std::pair{2.5, 0.1}, std::pair{5.0, 0.05}}) {
    const auto& c = cell_cycle(k, q);
    std::vector<Vec> orbit = c.cycle.orbit;
    for (Vec& x : orbit) x = cell_change().c_inv() * x;
    const GraphCheck gc = graph_property_check(orbit, sym_eigen(c.sys.A()));
    EXPECT_TRUE(gc.ok) << k;
    EXPECT_LE(gc.worst_ratio, 1.0);
  }
}

// ---------------------------------------------------------------- tracking

TEST(Tracking, HopfDecayRate) {
  const auto& l = hopf_cycle();
  const TrackingReport r =
      exponential_tracking_probe(l.sys, l.dom, l.cycle, std::vector<Vec>{{0.5, 0.0, 0.0}}, 20.0);
  ASSERT_EQ(r.probes.size(), 1u);
  ASSERT_TRUE(r.probes[0].rate_fitted);
  EXPECT_NEAR(r.probes[0].rate, -2.0, 0.4);
  EXPECT_TRUE(r.probes[0].converged);
  EXPECT_FALSE(r.probes[0].other_attractor);
}

TEST(Tracking, StartOnOrbitStaysAtInterpolationLevel) {
  const auto& l = hopf_cycle();
  const TrackingReport r =
      exponential_tracking_probe(l.sys, l.dom, l.cycle, std::vector<Vec>{l.cycle.anchor}, 10.0);
  EXPECT_LE(r.probes[0].final_distance, r.distance_floor * 1.01 + 1e-12);
  EXPECT_TRUE(r.probes[0].converged);
}

TEST(Tracking, CellProbesConverge) {
  const auto& l = cell_cycle(3.0, 0.1);
  const TrackingReport r = exponential_tracking_probe(l.sys, l.dom, l.cycle, 8, 3000.0, 0);
  EXPECT_EQ(r.probes.size(), 8u);
  EXPECT_EQ(r.converged, 8);
  EXPECT_EQ(r.other_attractors, 0);
}

TEST(Tracking, SecondAttractorReportedSeparately) {
  // r' = -r (r - 1)(r - 2), theta' = 1: stable origin, unstable r = 1, stable r = 2.
  const std::string r2 = "(x1^2 + x2^2)";
  const std::string fr = "(-(sqrt" + r2 + " - 1)*(sqrt" + r2 + " - 2))";
  const OdeSystem s = parse_system({"x1*" + fr + " - x2", "x2*" + fr + " + x1"}, Matrix(2, 2));
  const BoxDomain dom({-3, -3}, {3, 3});
  const auto c = refine_cycle(s, dom, Vec{2, 0}, 2 * kPi, CycleSettings{});
  ASSERT_TRUE(c);
  const TrackingReport r =
      exponential_tracking_probe(s, dom, *c, std::vector<Vec>{{2.5, 0.0}, {0.5, 0.0}}, 60.0);
  EXPECT_TRUE(r.probes[0].converged);
  EXPECT_FALSE(r.probes[1].converged);
  EXPECT_TRUE(r.probes[1].other_attractor);
  EXPECT_EQ(r.other_attractors, 1);
}

TEST(Orbit, SamplesCoverOnePeriod) {
  const CycleInfo& c = hopf_cycle().cycle;
  ASSERT_EQ(c.orbit.size(), c.orbit_times.size());
  EXPECT_DOUBLE_EQ(c.orbit_times.front(), 0.0);
  EXPECT_LT(c.orbit_times.back(), c.period);
  for (const Vec& x : c.orbit) EXPECT_NEAR(std::hypot(x[0], x[1]), 1.0, 1e-6);
}
