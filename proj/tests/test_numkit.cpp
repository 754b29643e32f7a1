#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "gapcert/error.hpp"
#include "gapcert/numkit.hpp"
#include "support.hpp"

using namespace gapcert;
using gctest::Gen;
using gctest::to_eigen;

TEST(Norms, SpectralNormBoundedByGeometricMeanOfOneAndInf) {
  Gen gen(11);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t r = gen.integer(1, 6), c = gen.integer(1, 6);
    const Matrix b = gen.matrix(r, c);
    const double n2 = norm_2(b);
    const double bound = std::sqrt(norm_1(b) * norm_inf(b));
    ASSERT_LE(n2, bound * (1.0 + 1e-12) + 1e-300) << "case " << t;
  }
}

TEST(Norms, MatchEigenOracle) {
  Gen gen(12);
  for (int t = 0; t < 200; ++t) {
    const Matrix b = gen.dense(gen.integer(1, 5), -2.0, 2.0);
    const Eigen::MatrixXd e = to_eigen(b);
    const double s = Eigen::JacobiSVD<Eigen::MatrixXd>(e).singularValues()(0);
    EXPECT_NEAR(norm_2(b), s, 1e-10 * std::max(1.0, s)) << "case " << t;
    EXPECT_NEAR(norm_1(b), e.cwiseAbs().colwise().sum().maxCoeff(), 1e-14);
    EXPECT_NEAR(norm_inf(b), e.cwiseAbs().rowwise().sum().maxCoeff(), 1e-14);
  }
}

TEST(Norms, ExplicitValues) {
  const Matrix b{{1, -2}, {3, 4}};
  EXPECT_DOUBLE_EQ(norm_1(b), 6.0);
  EXPECT_DOUBLE_EQ(norm_inf(b), 7.0);
  EXPECT_DOUBLE_EQ(norm_2(Matrix(3, 3)), 0.0);
}

TEST(SymEigen, AgreesWithEigenAndReconstructs) {
  Gen gen(13);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = gen.integer(1, 7);
    const Matrix a = gen.symmetric(n);
    const SymSpectrum s = sym_eigen(a);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> oracle(to_eigen(a));
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(s.eigenvalues[i], oracle.eigenvalues()(i), 1e-11);
    ASSERT_TRUE(std::is_sorted(s.eigenvalues.begin(), s.eigenvalues.end()));
    // A V = V diag(lambda), V orthogonal.
    const Matrix av = a * s.eigenvectors;
    const Matrix vtv = s.eigenvectors.transpose() * s.eigenvectors;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        EXPECT_NEAR(av(i, j), s.eigenvectors(i, j) * s.eigenvalues[j], 1e-11);
        EXPECT_NEAR(vtv(i, j), i == j ? 1.0 : 0.0, 1e-12);
      }
  }
}

TEST(SymEigen, DiagonalTiesKeepCoordinateOrder) {
  const Vec d{2.0, 1.0, 2.0};
  const SymSpectrum s = sym_eigen(Matrix::diagonal(d));
  EXPECT_EQ(s.eigenvalues, (Vec{1.0, 2.0, 2.0}));
  EXPECT_DOUBLE_EQ(std::abs(s.eigenvectors(1, 0)), 1.0);
  EXPECT_DOUBLE_EQ(std::abs(s.eigenvectors(0, 1)), 1.0);
  EXPECT_DOUBLE_EQ(std::abs(s.eigenvectors(2, 2)), 1.0);
}

TEST(SymEigen, RejectsAsymmetric) {
  const Matrix a{{1, 2}, {2.1, 1}};
  EXPECT_THROW(sym_eigen(a), Error);
}

TEST(GeneralEigen, AgreesWithEigenOracle) {
  Gen gen(14);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = gen.integer(1, 6);
    const Matrix a = gen.dense(n, -3.0, 3.0);
    std::vector<Complex> ours = eigenvalues(a);
    Eigen::EigenSolver<Eigen::MatrixXd> es(to_eigen(a), false);
    std::vector<Complex> ref(es.eigenvalues().data(), es.eigenvalues().data() + n);
    ASSERT_EQ(ours.size(), n);
    // Greedy matching; each reference eigenvalue is used once.
    std::vector<bool> used(n, false);
    for (const Complex& z : ours) {
      std::size_t best = 0;
      double dist = INFINITY;
      for (std::size_t j = 0; j < n; ++j)
        if (!used[j] && std::abs(z - ref[j]) < dist) dist = std::abs(z - ref[j]), best = j;
      used[best] = true;
      EXPECT_LT(dist, 1e-7 * (1.0 + std::abs(z))) << "case " << t;
    }
    for (std::size_t i = 1; i < n; ++i) EXPECT_GE(ours[i - 1].real(), ours[i].real() - 1e-12);
  }
}

TEST(GeneralEigen, RotationHasConjugatePair) {
  const Matrix a{{0, -1}, {1, 0}};
  const auto ev = eigenvalues(a);
  ASSERT_EQ(ev.size(), 2u);
  EXPECT_NEAR(ev[0].real(), 0.0, 1e-14);
  EXPECT_NEAR(ev[0].imag(), 1.0, 1e-14);
  EXPECT_NEAR(ev[1].imag(), -1.0, 1e-14);
}

TEST(Eigenvector, SatisfiesDefinition) {
  Gen gen(15);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = gen.integer(2, 5);
    const Matrix a = gen.dense(n);
    const auto ev = eigenvalues(a);
    const auto v = eigenvector(a, ev[0]);
    double nv = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      Complex s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += a(i, j) * v[j];
      nv += std::norm(v[i]);
      EXPECT_LT(std::abs(s - ev[0] * v[i]), 1e-8) << "case " << t;
    }
    EXPECT_NEAR(nv, 1.0, 1e-12);
  }
}

TEST(Dense, DetInverseSolveAgreeWithEigen) {
  Gen gen(16);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = gen.integer(1, 6);
    const Matrix a = gen.dense(n);
    const Eigen::MatrixXd e = to_eigen(a);
    const double ref = e.determinant();
    EXPECT_NEAR(det(a), ref, 1e-11 * std::max(1.0, std::abs(ref)));
    if (std::abs(ref) < 1e-3) continue;
    const Matrix inv = inverse(a);
    const Eigen::MatrixXd einv = e.inverse();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        EXPECT_NEAR(inv(i, j), einv(i, j), 1e-8 * std::max(1.0, std::abs(einv(i, j))));
    const Vec b = gen.vec(n);
    const Vec x = solve(a, b);
    const Vec r = subtract(a * x, b);
    EXPECT_LT(norm(r), 1e-10);
  }
}

TEST(Dense, SingularSolveIsNumericalFailure) {
  const Matrix a{{1, 2}, {2, 4}};
  try {
    solve(a, Vec{1, 1});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Numerical);
  }
}

TEST(Projector, IdempotentSymmetricRankM) {
  Gen gen(17);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = gen.integer(2, 6);
    const std::size_t m = gen.integer(1, static_cast<int>(n) - 1);
    const SymSpectrum s = sym_eigen(gen.symmetric(n));
    const Matrix p = leading_projector(s.eigenvectors, m);
    const Matrix pp = p * p;
    double tr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      tr += p(i, i);
      for (std::size_t j = 0; j < n; ++j) {
        EXPECT_NEAR(pp(i, j), p(i, j), 1e-12);
        EXPECT_NEAR(p(i, j), p(j, i), 1e-14);
      }
    }
    EXPECT_NEAR(tr, static_cast<double>(m), 1e-12);
  }
}

TEST(Matrix, ShapeErrors) {
  EXPECT_THROW(Matrix(2, 3) * Matrix(2, 3), Error);
  EXPECT_THROW(det(Matrix(2, 3)), Error);
}
