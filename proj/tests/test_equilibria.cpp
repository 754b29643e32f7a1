#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "gapcert/equilibria.hpp"
#include "gapcert/error.hpp"
#include "support.hpp"

using namespace gapcert;
using gctest::Gen;

namespace {

double cofactor_det3(const Matrix& j) {
  return j(0, 0) * (j(1, 1) * j(2, 2) - j(1, 2) * j(2, 1)) -
         j(0, 1) * (j(1, 0) * j(2, 2) - j(1, 2) * j(2, 0)) +
         j(0, 2) * (j(1, 0) * j(2, 1) - j(1, 1) * j(2, 0));
}

Equilibrium single_root(const OdeSystem& sys, const BoxDomain& dom, int starts = 27) {
  const auto eq = find_equilibria(sys, dom, starts);
  EXPECT_EQ(eq.size(), 1u);
  return eq.at(0);
}

}  // namespace

TEST(RouthHurwitz, MinusIdentity) {
  const RouthHurwitz rh = routh_hurwitz_3(-1.0 * Matrix::identity(3));
  EXPECT_DOUBLE_EQ(rh.a1, 3.0);
  EXPECT_DOUBLE_EQ(rh.a2, 3.0);
  EXPECT_DOUBLE_EQ(rh.a3, 1.0);
  EXPECT_TRUE(rh.stable);
  EXPECT_FALSE(rh.unstable);
}

TEST(RouthHurwitz, CoefficientsMatchCharacteristicPolynomialOracle) {
  Gen gen(31);
  for (int t = 0; t < 100; ++t) {
    const Matrix j = gen.dense(3, -2, 2);
    const RouthHurwitz rh = routh_hurwitz_3(j);
    // char(-J)(s) = prod (s + kappa_i) over eigenvalues kappa of J.
    Eigen::EigenSolver<Eigen::MatrixXd> es(gctest::to_eigen(j), false);
    const auto k = es.eigenvalues();
    const Complex a1 = -(k(0) + k(1) + k(2));
    const Complex a2 = k(0) * k(1) + k(0) * k(2) + k(1) * k(2);
    const Complex a3 = -(k(0) * k(1) * k(2));
    EXPECT_NEAR(rh.a1, a1.real(), 1e-10);
    EXPECT_NEAR(rh.a2, a2.real(), 1e-10);
    EXPECT_NEAR(rh.a3, a3.real(), 1e-10);
  }
}

TEST(RouthHurwitz, AgreesWithSpectrumOnRandomMatrices) {
  Gen gen(32);
  int compared = 0;
  for (int t = 0; compared < 200; ++t) {
    ASSERT_LT(t, 10000);
    const Matrix j = gen.dense(3, -2, 2);
    const RouthHurwitz rh = routh_hurwitz_3(j);
    if (rh.margin < 1e-8) continue;
    ++compared;
    const SpectrumCheck sc = instability_spectrum(j);
    EXPECT_EQ(rh.unstable, sc.unstable) << "case " << t;
    EXPECT_EQ(rh.stable, !sc.unstable) << "case " << t;
  }
}

TEST(Spectrum, SimpleCases) {
  const SpectrumCheck d = instability_spectrum(Matrix::diagonal(Vec{-1, -2, -3}));
  EXPECT_FALSE(d.unstable);
  EXPECT_EQ(d.positive_real, 0);
  EXPECT_NEAR(d.spectrum[0].real(), -1.0, 1e-14);
  const OdeSystem h = hopf_oracle(1.0, 1.0);
  const SpectrumCheck s = instability_spectrum(h.jacobian(Vec{0, 0, 0}));
  EXPECT_TRUE(s.unstable);
  EXPECT_EQ(s.positive_real, 2);
  EXPECT_TRUE(s.exactly_two_positive);
  EXPECT_NEAR(s.spectrum[0].real(), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(s.spectrum[0].imag()), 1.0, 1e-12);
  EXPECT_NEAR(s.spectrum[2].real(), -1.0, 1e-12);
}

TEST(SatelliteInstability, Examples) {
  const auto a = satellite_instability(0.05, 0.05, 2.1, -1.0);
  EXPECT_NEAR(a.lhs, 1.00525, 1e-12);
  EXPECT_NEAR(a.rhs, 0.4675, 1e-12);
  EXPECT_TRUE(a.unstable);
  const auto b = satellite_instability(0.1, 0.1, 2.2, -1.0);
  EXPECT_NEAR(b.lhs, 1.022, 1e-12);
  EXPECT_NEAR(b.rhs, 1.08, 1e-12);
  EXPECT_FALSE(b.unstable);
  const auto c = satellite_instability(1, 1, 1, -1.0);
  EXPECT_DOUBLE_EQ(c.lhs, 2.0);
  EXPECT_DOUBLE_EQ(c.rhs, 9.0);
  EXPECT_FALSE(c.unstable);
}

TEST(SatelliteInstability, AgreesWithJacobianRouthHurwitz) {
  for (auto [m1, m2, m3] : {std::tuple{0.05, 0.05, 2.1}, std::tuple{0.1, 0.1, 2.2}, std::tuple{1.0, 1.0, 1.0},
                            std::tuple{0.2, 0.05, 2.5}}) {
    const auto g = default_satellite_control(m1, m2, m3);
    const OdeSystem sys = satellite_system(m1, m2, m3, g);
    const Equilibrium e = single_root(sys, satellite_domain(m1, m2, m3, g.bound));
    EXPECT_EQ(satellite_instability(m1, m2, m3, -1.0).unstable, e.unstable) << m1 << " " << m2 << " " << m3;
    ASSERT_TRUE(e.rh);
    EXPECT_EQ(e.rh->unstable, e.unstable);
  }
}

TEST(Equilibria, SatelliteClosedForm) {
  const double m1 = 0.05, m2 = 0.05, m3 = 2.1;
  const auto g = default_satellite_control(m1, m2, m3);
  const Equilibrium e = single_root(satellite_system(m1, m2, m3, g), satellite_domain(m1, m2, m3, g.bound));
  const double h = std::numbers::pi / 2;
  EXPECT_NEAR(e.x[0], h / m1, 1e-8);
  EXPECT_NEAR(e.x[1], h / (m1 * m2), 1e-7);
  EXPECT_NEAR(e.x[2], h / (m1 * m2 * m3), 1e-7);
  EXPECT_TRUE(e.unique_in_domain);
  EXPECT_TRUE(e.unstable);
}

TEST(Equilibria, CellValues) {
  struct Case {
    double k, x, y, z, b_minus_kq;
  };
  for (const Case c : {Case{3.0, 0.117, 49.653, 1.167, 0.480}, Case{2.5, 0.123, 49.558, 1.230, 0.438}}) {
    CellParams p;
    p.k = c.k;
    const Equilibrium e = single_root(cell_system(p), cell_domain(p));
    EXPECT_NEAR(e.x[0], c.x, 0.005);
    EXPECT_NEAR(e.x[1], c.y, 0.01 + (c.k == 2.5 ? 0.005 : 0.0));
    EXPECT_NEAR(e.x[2], c.z, 0.005);
    EXPECT_LE(e.residual, 1e-10 * (1 + norm(e.x)));
    EXPECT_TRUE(e.unstable);
    EXPECT_EQ(e.positive_real, 2);
  }
}

TEST(Equilibria, CellRouthHurwitzA2Negative) {
  // Independent evaluation of the equilibrium Jacobian gives a2 = -0.00503 at
  // k = 3 and about -0.0101 at k = 2.5; both are negative.
  CellParams p;
  const Equilibrium e = single_root(cell_system(p), cell_domain(p));
  ASSERT_TRUE(e.rh);
  EXPECT_NEAR(e.rh->a2, -0.00503, 5e-5);
  EXPECT_TRUE(e.rh->unstable);
  p.k = 2.5;
  const Equilibrium e2 = single_root(cell_system(p), cell_domain(p));
  EXPECT_LT(e2.rh->a2, 0.0);
  EXPECT_NEAR(e2.rh->a2, -0.01, 0.01);
}

TEST(Equilibria, CellDeterminantOracles) {
  for (double k : {2.5, 3.0, 5.0}) {
    CellParams p;
    p.k = k;
    p.q = k == 5.0 ? 0.05 : 0.1;
    const Equilibrium e = single_root(cell_system(p), cell_domain(p));
    const CellQuantities cq = cell_quantities(p, e.x);
    EXPECT_NEAR(cq.b, -cell::R_z(e.x[2]), 1e-15);
    EXPECT_NEAR(cq.c, cell::G_y(p, e.x[1], e.x[2]), 1e-15);
    const double cof = cofactor_det3(e.jac);
    EXPECT_NEAR(e.det, cof, 1e-12 * std::abs(cof));
    // det f' = -c (b + kq) = -a3 for this Jacobian.
    EXPECT_NEAR(e.det, -cq.c * (cq.b + p.k * p.q), 1e-8 * std::abs(e.det));
    EXPECT_NEAR(e.det, -e.rh->a3, 1e-12 * std::abs(e.det));
  }
  CellParams p;
  const Equilibrium e = single_root(cell_system(p), cell_domain(p));
  EXPECT_NEAR(cell_quantities(p, e.x).b_minus_kq, 0.480, 0.005);
}

TEST(Equilibria, MoreStartsSameRootSet) {
  const auto g = default_satellite_control(0.05, 0.05, 2.1);
  const OdeSystem sat = satellite_system(0.05, 0.05, 2.1, g);
  const BoxDomain sd = satellite_domain(0.05, 0.05, 2.1, g.bound);
  const CellParams p;
  const OdeSystem cel = cell_system(p);
  const BoxDomain cd = cell_domain(p);
  for (auto [sys, dom] : {std::pair{&sat, &sd}, std::pair{&cel, &cd}}) {
    const auto a = find_equilibria(*sys, *dom, 27);
    const auto b = find_equilibria(*sys, *dom, 216);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
      EXPECT_LE(norm(subtract(a[i].x, b[i].x)), 1e-6 * dom->diameter());
    EXPECT_GT(b[0].starts, a[0].starts);
  }
}

TEST(Equilibria, SeveralRootsAndNone) {
  // x' = x - x^3 on [-2, 2]: roots -1, 0, 1.
  const OdeSystem cubic = parse_system({"x1 - x1^3"}, Matrix{{0.0}});
  const auto eq = find_equilibria(cubic, BoxDomain({-2.0}, {2.0}));
  ASSERT_EQ(eq.size(), 3u);
  for (const auto& e : eq) EXPECT_FALSE(e.unique_in_domain);
  const OdeSystem none = parse_system({"1 + x1^2"}, Matrix{{0.0}});
  EXPECT_TRUE(find_equilibria(none, BoxDomain({-1.0}, {1.0})).empty());
  EXPECT_THROW(find_equilibria(cubic, BoxDomain({-2.0}, {2.0}), 10), Error);
}
