#include "shapectl/adjoint.hpp"

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "shapectl/errors.hpp"
#include "shapectl/sensitivity.hpp"

namespace shapectl {
namespace {

const GridSpec kGrid(1.0, 1.0, 4, 4);

StateTrajectory reference(EquationKind kind, double T, int steps, double source = 1.0) {
  const SourceTerm F = source == 0.0 ? SourceTerm::zero() : SourceTerm::constant(source);
  return reference_state(kind, F, Vector::Zero(9), Vector::Zero(9), T, steps, kGrid);
}

Vector random_unit(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> nd;
  Vector c(n);
  for (int k = 0; k < n; ++k) c(k) = nd(rng);
  return c.normalized();
}

TEST(Adjoint, TerminalData) {
  std::mt19937_64 rng(4);
  const Vector c = random_unit(rng, 9);
  const auto X = solve_adjoint_heat(c, 0.1, 50, kGrid);
  EXPECT_EQ(X.states.back(), c);
  EXPECT_EQ(X.times.size(), 51u);
  // Backward heat flow decays toward t = 0.
  EXPECT_LT(X.states.front().norm(), c.norm());
  const Vector cw = random_unit(rng, 18);
  const auto W = solve_adjoint_wave(cw, 1.0, 200, kGrid);
  EXPECT_EQ(W.states.back(), cw);
  EXPECT_EQ(W.paired(200), cw.tail(9));
  EXPECT_THROW(solve_adjoint_heat(cw, 1.0, 10, kGrid), DomainError);
}

TEST(Adjoint, DualityIdentity) {
  struct Case {
    EquationKind kind;
    double T;
    int steps;
    double tol;
  };
  for (const Case& cs : {Case{EquationKind::Heat, 0.1, 4800, 1e-6},
                         Case{EquationKind::Wave, 2.0, 9600, 1e-5}}) {
    const StateTrajectory ref = reference(cs.kind, cs.T, cs.steps);
    const auto zero = DeformationPath::zero(kGrid, cs.kind, cs.T, 4);
    const int dim = cs.kind == EquationKind::Heat ? 9 : 18;
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
      const Vector c = random_unit(rng, dim);
      Matrix coeffs(3, 4);
      for (Eigen::Index k = 0; k < coeffs.size(); ++k) coeffs.data()[k] = dist(rng);
      const auto psi = DeformationPath::direction(kGrid, cs.kind, cs.T, coeffs);
      const double lhs = gateaux(zero, psi, ref).trajectory.final_state().dot(c);
      const auto X = solve_adjoint(cs.kind, c, cs.T, cs.steps, kGrid);
      const double rhs = duality_pairing(X, ref, psi);
      EXPECT_LE(std::abs(lhs - rhs), cs.tol * std::abs(lhs)) << "trial " << trial;
    }
  }
}

TEST(Ndd, MatchesClosedFormReference) {
  // u(t) = A^{-1} (I - exp(-A t)) 1 for F = 1, u(0) = 0.
  const double T = 0.1;
  const StateTrajectory ref = reference(EquationKind::Heat, T, 2000);
  const NDDReport r = check_ndd(ref);
  Eigen::SelfAdjointEigenSolver<Matrix> es(assemble_matrix(kGrid));
  const Matrix& V = es.eigenvectors();
  const Vector& lam = es.eigenvalues();
  const Vector w = V.transpose() * Vector::Ones(9);
  double oracle = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < ref.times.size(); ++s) {
    const double t = ref.times[s];
    if (t < 0.05 * T) continue;
    Vector coef(9);
    for (int k = 0; k < 9; ++k) coef(k) = (1.0 - std::exp(-lam(k) * t)) / lam(k) * w(k);
    const Vector u = V * coef;
    oracle = std::min(oracle, ndd_bracket(kGrid, u).cwiseAbs().minCoeff());
  }
  EXPECT_TRUE(r.satisfied);
  EXPECT_NEAR(r.min_abs, oracle, 1e-5 * oracle);
  EXPECT_GT(r.min_abs, r.threshold);
  EXPECT_DOUBLE_EQ(r.t_lo, 0.05 * T);
  EXPECT_NEAR(r.threshold, 1e-8 * r.scale, 1e-20);
}

TEST(Ndd, FailsForZeroReference) {
  const NDDReport r = check_ndd(reference(EquationKind::Heat, 0.1, 200, 0.0));
  EXPECT_FALSE(r.satisfied);
  EXPECT_EQ(r.min_abs, 0.0);
  EXPECT_THROW(check_ndd(reference(EquationKind::Heat, 0.1, 200), std::nullopt, 0.2, 0.3),
               DomainError);
}

TEST(Layer1, RecoveryInvertsPairing) {
  const StateTrajectory ref = reference(EquationKind::Heat, 0.1, 400);
  std::mt19937_64 rng(8);
  const auto X = solve_adjoint_heat(random_unit(rng, 9), 0.1, 400, kGrid);
  const NDDReport ndd = check_ndd(ref);
  const Layer1Recovery rec = recover_layer1(layer1_pairing(X, ref), ref, ndd);
  for (std::size_t s = 0; s < rec.times.size(); ++s) {
    const std::size_t full = ref.times.size() - rec.times.size() + s;
    ASSERT_EQ(ref.times[full], rec.times[s]);
    for (int j = 1; j < 4; ++j) {
      EXPECT_NEAR(rec.layer(s, j - 1), X.states[full](kGrid.interior_index(1, j)), 1e-13);
    }
  }
  const StateTrajectory zero_ref = reference(EquationKind::Heat, 0.1, 400, 0.0);
  EXPECT_THROW(recover_layer1(layer1_pairing(X, zero_ref), zero_ref, check_ndd(zero_ref)),
               ContractError);
}

// Columns 0 and 1 of a stacked interior trajectory.
std::pair<Matrix, Matrix> boundary_columns(const std::vector<Vector>& states, int offset) {
  const Eigen::Index S = static_cast<Eigen::Index>(states.size());
  Matrix col0 = Matrix::Zero(S, 5);
  Matrix col1 = Matrix::Zero(S, 5);
  for (Eigen::Index s = 0; s < S; ++s) {
    for (int j = 1; j < 4; ++j) col1(s, j) = states[s](offset + kGrid.interior_index(1, j));
  }
  return {col0, col1};
}

TEST(ZeroPropagation, RebuildsWaveAdjointAwayFromEnds) {
  std::mt19937_64 rng(12);
  const auto X = solve_adjoint_wave(random_unit(rng, 18), 2.0, 400, kGrid);
  const auto [c0, c1] = boundary_columns(X.states, 9);
  const ZeroPropagation z = propagate_zeros(kGrid, X.times, c0, c1, Evolution::Wave);
  ASSERT_EQ(z.columns.size(), 5u);
  for (std::size_t s = 4; s + 4 < X.times.size(); ++s) {
    EXPECT_LT((z.interior_at(kGrid, s) - X.states[s].tail(9)).norm(), 1e-8);
    // The boundary column carries three nested second differences, so it is
    // only zero up to amplified roundoff.
    EXPECT_LT(z.columns[4].row(static_cast<Eigen::Index>(s)).norm(), 1e-4);
  }
}

TEST(ZeroPropagation, ForwardAndBackwardSigns) {
  // X(t) = exp(-+A t) c sampled finely; both selectors rebuild the interior.
  const Matrix A = assemble_matrix(kGrid);
  Eigen::SelfAdjointEigenSolver<Matrix> es(A);
  std::mt19937_64 rng(21);
  const Vector c = es.eigenvectors().col(0) + 0.1 * es.eigenvectors().col(1);
  for (Evolution ev : {Evolution::Forward, Evolution::Backward}) {
    const double sign = ev == Evolution::Forward ? -1.0 : 1.0;
    std::vector<double> times;
    std::vector<Vector> states;
    const int S = 2001;
    for (int s = 0; s < S; ++s) {
      const double t = 0.05 * s / (S - 1);
      times.push_back(t);
      Vector coef = es.eigenvectors().transpose() * c;
      for (int k = 0; k < 9; ++k) coef(k) *= std::exp(sign * es.eigenvalues()(k) * t);
      states.push_back(es.eigenvectors() * coef);
    }
    const auto [c0, c1] = boundary_columns(states, 0);
    const ZeroPropagation z = propagate_zeros(kGrid, times, c0, c1, ev);
    const std::size_t mid = S / 2;
    EXPECT_LT((z.interior_at(kGrid, mid) - states[mid]).norm(), 1e-5 * states[mid].norm());
    // The other sign does not reproduce the field.
    const Evolution wrong = ev == Evolution::Forward ? Evolution::Backward : Evolution::Forward;
    const ZeroPropagation bad = propagate_zeros(kGrid, times, c0, c1, wrong);
    EXPECT_GT((bad.interior_at(kGrid, mid) - states[mid]).norm(), 1e-2 * states[mid].norm());
  }
}

TEST(ZeroPropagation, SpikeStaysInsideCone) {
  const GridSpec g(1.0, 1.0, 8, 8);
  const Eigen::Index S = 41;
  std::vector<double> times;
  for (Eigen::Index s = 0; s < S; ++s) times.push_back(0.01 * s);
  Matrix c0 = Matrix::Zero(S, 9);
  Matrix c1 = Matrix::Zero(S, 9);
  c1(20, 4) = 1.0;
  const ZeroPropagation z = propagate_zeros(g, times, c0, c1, Evolution::Backward, false);
  for (int k = 2; k <= 8; ++k) {
    const Matrix& col = z.columns[k];
    for (Eigen::Index s = 0; s < S; ++s) {
      for (int j = 0; j <= 8; ++j) {
        const bool inside = std::abs(j - 4) <= k - 1 && std::abs(s - 20) <= k - 1;
        if (!inside) EXPECT_EQ(col(s, j), 0.0) << "k=" << k << " s=" << s << " j=" << j;
      }
    }
    EXPECT_NE(col(20, 4), 0.0);
  }
}

TEST(ZeroPropagation, ResolutionAndContracts) {
  // An under-resolved oscillation trips the halving check.
  std::vector<double> times;
  const Eigen::Index S = 40;
  Matrix c0 = Matrix::Zero(S, 5);
  Matrix c1 = Matrix::Zero(S, 5);
  for (Eigen::Index s = 0; s < S; ++s) {
    times.push_back(0.1 * s);
    c1(s, 2) = std::sin(2.0 * s);
  }
  EXPECT_THROW(propagate_zeros(kGrid, times, c0, c1, Evolution::Backward), ResolutionError);
  Matrix dirty = c1;
  dirty(3, 0) = 1.0;
  EXPECT_THROW(propagate_zeros(kGrid, times, c0, dirty, Evolution::Backward, false), ContractError);
  EXPECT_THROW(propagate_zeros(kGrid, times, c0, Matrix::Zero(S, 4), Evolution::Backward), DomainError);
}

TEST(ZeroPropagation, DerivativeStencils) {
  Matrix f(6, 1);
  for (int s = 0; s < 6; ++s) f(s, 0) = 0.5 * s * s;  // t^2/2 at dt = 1
  const Matrix d1 = time_derivative(f, 1.0);
  const Matrix d2 = second_time_derivative(f, 1.0);
  for (int s = 0; s < 6; ++s) {
    EXPECT_NEAR(d1(s, 0), s, 1e-12);
    EXPECT_NEAR(d2(s, 0), 1.0, 1e-12);
  }
}

TEST(UniqueContinuation, HeatWithConstantSourceCertifies) {
  const StateTrajectory ref = reference(EquationKind::Heat, 0.1, 1200);
  const NDDReport ndd = check_ndd(ref);
  const UniqueContinuationReport r = unique_continuation_check(ref, ndd, 20, 7);
  EXPECT_TRUE(r.certified);
  EXPECT_FALSE(r.annihilating_found);
  EXPECT_LE(r.max_residual_c, 1e-8);
  EXPECT_LE(r.max_chain_residual, 1e-8);
  EXPECT_LT(r.max_reconstruction_error, 1e-2);
}

TEST(UniqueContinuation, WaveWithConstantSourceCertifies) {
  const StateTrajectory ref = reference(EquationKind::Wave, 2.0 * std::sqrt(2.0), 480);
  const UniqueContinuationReport r = unique_continuation_check(ref, check_ndd(ref), 20, 7);
  EXPECT_TRUE(r.certified);
  EXPECT_LE(r.max_chain_residual, 1e-8);
  EXPECT_LT(r.max_reconstruction_error, 1e-4);
}

TEST(UniqueContinuation, ZeroReferenceHasAnnihilatingData) {
  const StateTrajectory ref = reference(EquationKind::Heat, 0.1, 200, 0.0);
  const UniqueContinuationReport r = unique_continuation_check(ref, check_ndd(ref), 5, 1);
  EXPECT_TRUE(r.annihilating_found);
  EXPECT_FALSE(r.certified);
  EXPECT_NEAR(r.annihilating_c.norm(), 1.0, 1e-12);
}

}  // namespace
}  // namespace shapectl
