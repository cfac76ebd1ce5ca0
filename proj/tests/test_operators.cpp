#include "shapectl/operators.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "shapectl/errors.hpp"

namespace shapectl {
namespace {

const GridSpec kGrid(1.0, 1.0, 4, 4);

// Row-by-row five-point stencil written out independently of the library.
Matrix reference_laplacian(const GridSpec& g) {
  const double s = 1.0 / (g.h() * g.h());
  Matrix A = Matrix::Zero(g.interior_size(), g.interior_size());
  for (int i = 1; i < g.M(); ++i) {
    for (int j = 1; j < g.N(); ++j) {
      const int r = g.interior_index(i, j);
      A(r, r) = 4.0 * s;
      if (i > 1) A(r, g.interior_index(i - 1, j)) = -s;
      if (i < g.M() - 1) A(r, g.interior_index(i + 1, j)) = -s;
      if (j > 1) A(r, g.interior_index(i, j - 1)) = -s;
      if (j < g.N() - 1) A(r, g.interior_index(i, j + 1)) = -s;
    }
  }
  return A;
}

TEST(Stencil, ClassicalRowsOnFiveByFive) {
  EXPECT_EQ(assemble_matrix(kGrid), reference_laplacian(kGrid));
  EXPECT_EQ(assemble_matrix(kGrid, Vector::Zero(3)), reference_laplacian(kGrid));
}

TEST(Stencil, PerturbedCoefficientsAtQuarter) {
  Vector lam = Vector::Zero(3);
  lam(1) = 0.25;
  const Stencil s = stencil_at(kGrid, lam, 1, 2);
  // 2 (1 + 1/1.25) / h^2 and -(2/2.25) / h^2 with h = 1/4.
  EXPECT_DOUBLE_EQ(s.center, 57.6);
  EXPECT_DOUBLE_EQ(s.east, -(2.0 / 2.25) * 16.0);
  EXPECT_EQ(s.west, 0.0);
  EXPECT_EQ(s.north, -16.0);
  EXPECT_EQ(s.south, -16.0);
  // Neighbouring layer rows keep the classical weights.
  EXPECT_EQ(stencil_at(kGrid, lam, 1, 1).center, 64.0);
  EXPECT_EQ(stencil_at(kGrid, lam, 2, 2).west, -16.0);

  const Matrix A = assemble_matrix(kGrid, lam);
  const int r = kGrid.interior_index(1, 2);
  EXPECT_DOUBLE_EQ(A(r, r), 57.6);
  EXPECT_DOUBLE_EQ(A(r, kGrid.interior_index(2, 2)), -(2.0 / 2.25) * 16.0);
}

TEST(Stencil, AnalyticDerivative) {
  for (double lam : {-0.3, 0.0, 0.2}) {
    const Stencil d = stencil_derivative_at(kGrid, lam, 2);
    EXPECT_DOUBLE_EQ(d.center, -2.0 / ((1 + lam) * (1 + lam)) * 16.0);
    EXPECT_DOUBLE_EQ(d.east, 2.0 / ((2 + lam) * (2 + lam)) * 16.0);
    EXPECT_EQ(d.north, 0.0);
  }
}

TEST(Stencil, RejectsInadmissibleLambda) {
  EXPECT_THROW(check_lambdas(kGrid, Vector::Constant(3, 0.5)), AdmissibilityError);
  EXPECT_THROW(check_lambdas(kGrid, Vector::Constant(3, -0.6)), AdmissibilityError);
  EXPECT_THROW(check_lambdas(kGrid, Vector::Constant(2, 0.0)), DomainError);
  EXPECT_NO_THROW(check_lambdas(kGrid, Vector::Constant(3, 0.49)));
}

TEST(Derivative, OperatorDerivativeAtZero) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector u(9);
  for (int k = 0; k < 9; ++k) u(k) = dist(rng);
  const GridField f = vector_to_interior(u, kGrid);
  const GridField d = operator_derivative(2, 0.3, f);
  const double expected = 0.3 * 16.0 * (0.5 * f(2, 2) - 2.0 * f(1, 2));
  EXPECT_NEAR(d(1, 2), expected, 1e-14);
  for (int i = 0; i <= 4; ++i) {
    for (int j = 0; j <= 4; ++j) {
      if (i != 1 || j != 2) EXPECT_EQ(d(i, j), 0.0);
    }
  }
}

TEST(Derivative, DifferenceQuotientIsFirstOrder) {
  const Matrix A0 = assemble_matrix(kGrid);
  for (int j = 1; j <= 3; ++j) {
    Vector dir = Vector::Zero(3);
    dir(j - 1) = 1.0;
    const Matrix D = assemble_derivative(kGrid, Vector::Zero(3), dir);
    std::vector<double> err;
    for (double eps : {1e-2, 1e-3, 1e-4}) {
      const Matrix Q = (assemble_matrix(kGrid, eps * dir) - A0) / eps;
      err.push_back((Q - D).cwiseAbs().maxCoeff());
    }
    const double slope1 = std::log10(err[0] / err[1]);
    const double slope2 = std::log10(err[1] / err[2]);
    EXPECT_NEAR(slope1, 1.0, 0.1);
    EXPECT_NEAR(slope2, 1.0, 0.1);
  }
}

TEST(Derivative, ApplyMatchesAssembledAtNonzeroBase) {
  Vector base(3);
  base << 0.1, -0.2, 0.3;
  Vector dir(3);
  dir << 0.5, 1.0, -0.7;
  Vector u(9);
  for (int k = 0; k < 9; ++k) u(k) = std::sin(k + 1.0);
  const Vector a = apply_derivative(kGrid, base, dir, u);
  const Vector b = assemble_derivative(kGrid, base, dir) * u;
  EXPECT_LT((a - b).lpNorm<Eigen::Infinity>(), 1e-12);
  // Centered differences of the assembled operator along dir.
  const double eps = 1e-6;
  const Vector fd = (assemble_matrix(kGrid, base + eps * dir) * u -
                     assemble_matrix(kGrid, base - eps * dir) * u) / (2 * eps);
  EXPECT_LT((fd - a).lpNorm<Eigen::Infinity>(), 1e-6);
}

TEST(Apply, MatrixFreeMatchesAssembled) {
  Vector lam(3);
  lam << 0.45, -0.45, 0.1;
  Vector u(9);
  for (int k = 0; k < 9; ++k) u(k) = std::cos(3.0 * k);
  EXPECT_LT((apply_perturbed(kGrid, lam, u) - assemble_matrix(kGrid, lam) * u)
                .lpNorm<Eigen::Infinity>(), 1e-12);
  EXPECT_LT((apply_laplacian(kGrid, u) - reference_laplacian(kGrid) * u)
                .lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(Apply, SmallestEigenvalueOfLaplacian) {
  // 128 sin^2(pi/8) from the closed form, compared with a dense solve.
  const double lambda1 = 18.745166004060959;
  EXPECT_NEAR(8.0 / (kGrid.h() * kGrid.h()) * std::pow(std::sin(std::numbers::pi / 8), 2),
              lambda1, 1e-12);
  Eigen::SelfAdjointEigenSolver<Matrix> es(assemble_matrix(kGrid));
  EXPECT_NEAR(es.eigenvalues()(0), lambda1, 1e-10);
}

TEST(Path, HeatBasisIsPiecewiseConstant) {
  const DeformationPath p = DeformationPath::basis_direction(kGrid, EquationKind::Heat, 1.0, 4, 2, 1);
  EXPECT_EQ(p.lambda(2, 0.24), 0.0);
  EXPECT_EQ(p.lambda(2, 0.25), 1.0);
  EXPECT_EQ(p.lambda(2, 0.49), 1.0);
  EXPECT_EQ(p.lambda(2, 0.5), 0.0);
  EXPECT_EQ(p.lambda(1, 0.3), 0.0);
  const DeformationPath last = DeformationPath::basis_direction(kGrid, EquationKind::Heat, 1.0, 4, 1, 3);
  EXPECT_EQ(last.lambda(1, 1.0), 1.0);
  EXPECT_THROW(p.basis_value(0, 1.5), DomainError);
}

TEST(Path, WaveBasisIsHatThroughMidpoints) {
  const DeformationPath p = DeformationPath::basis_direction(kGrid, EquationKind::Wave, 1.0, 4, 1, 1);
  EXPECT_DOUBLE_EQ(p.lambda(1, 0.375), 1.0);
  EXPECT_DOUBLE_EQ(p.lambda(1, 0.25), 0.5);
  EXPECT_DOUBLE_EQ(p.lambda(1, 0.625), 0.0);
  const DeformationPath first = DeformationPath::basis_direction(kGrid, EquationKind::Wave, 1.0, 4, 1, 0);
  EXPECT_DOUBLE_EQ(first.lambda(1, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(first.lambda(1, 0.125), 1.0);
  // Partition of unity.
  const DeformationPath ones(kGrid, EquationKind::Wave, 1.0, Matrix::Constant(3, 4, 0.2));
  for (double t : {0.0, 0.1, 0.33, 0.8, 1.0}) EXPECT_NEAR(ones.lambda(2, t), 0.2, 1e-15);
}

TEST(Path, AdmissibilityChecks) {
  Matrix c = Matrix::Zero(3, 4);
  c(0, 1) = 0.5;
  EXPECT_THROW(DeformationPath(kGrid, EquationKind::Heat, 1.0, c), AdmissibilityError);
  c(0, 1) = 0.3;
  EXPECT_NO_THROW(DeformationPath(kGrid, EquationKind::Heat, 1.0, c));
  // Slope 0.3 / 0.25 = 1.2 exceeds the wave bound.
  EXPECT_THROW(DeformationPath(kGrid, EquationKind::Wave, 1.0, c), AdmissibilityError);
  EXPECT_NO_THROW(DeformationPath(kGrid, EquationKind::Wave, 2.0, c));
  EXPECT_THROW(DeformationPath(kGrid, EquationKind::Heat, 1.0, Matrix::Zero(2, 4)), DomainError);
}

TEST(NormBound, NeverExceeded) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(-0.499, 0.499);
  Matrix c(3, 5);
  for (Eigen::Index k = 0; k < c.size(); ++k) c.data()[k] = dist(rng);
  const DeformationPath p(kGrid, EquationKind::Heat, 1.0, c);
  const NormBoundReport r = operator_norm_bound_check(p, 1000, 3);
  EXPECT_EQ(r.trials, 1000);
  EXPECT_DOUBLE_EQ(r.bound, 28.0 / (3.0 * 0.0625));
  EXPECT_TRUE(r.within_bound());
  EXPECT_GT(r.max_ratio, 0.5 * r.bound);
}

TEST(NormBound, NearlyAttainedAtExtremeLambda) {
  // Sign-alternating field on the moved row with lambda close to -1/2.
  const Vector lam = Vector::Constant(3, -0.4999);
  GridField f(kGrid);
  for (int i = 1; i < 4; ++i) {
    for (int j = 1; j < 4; ++j) f(i, j) = ((i + j) % 2 == 0) ? 1.0 : -1.0;
  }
  const double ratio = amplification(kGrid, lam, interior_to_vector(f));
  EXPECT_LE(ratio, 28.0 / (3.0 * 0.0625));
  EXPECT_GT(ratio, 0.999 * 28.0 / (3.0 * 0.0625));
}

}  // namespace
}  // namespace shapectl
