#include "shapectl/sensitivity.hpp"

#include <random>

#include <gtest/gtest.h>

#include "shapectl/errors.hpp"

namespace shapectl {
namespace {

const GridSpec kGrid(1.0, 1.0, 4, 4);

ForwardSetup heat_setup() {
  return {EquationKind::Heat, kGrid, SourceTerm::constant(1.0), Vector::Zero(9), Vector::Zero(9), 0.1, 300};
}

ForwardSetup wave_setup() {
  return {EquationKind::Wave, kGrid, SourceTerm::constant(1.0), Vector::Zero(9), Vector::Zero(9), 2.0, 480};
}

DeformationPath random_direction(const ForwardSetup& s, int K, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Matrix c(3, K);
  for (Eigen::Index k = 0; k < c.size(); ++k) c.data()[k] = dist(rng);
  return DeformationPath::direction(kGrid, s.kind, s.T, c);
}

TEST(Gateaux, SharesReferenceTimeGrid) {
  const ForwardSetup s = heat_setup();
  const auto zero = DeformationPath::zero(kGrid, s.kind, s.T, 3);
  const StateTrajectory ref = simulate(s, zero);
  const LinearizedState v = gateaux(zero, random_direction(s, 3, 1), ref);
  EXPECT_EQ(v.trajectory.times, ref.times);
  EXPECT_TRUE(v.trajectory.states.front().isZero(0.0));
}

TEST(Gateaux, Superposition) {
  for (const ForwardSetup& s : {heat_setup(), wave_setup()}) {
    const auto zero = DeformationPath::zero(kGrid, s.kind, s.T, 4);
    const StateTrajectory ref = simulate(s, zero);
    const auto d1 = random_direction(s, 4, 2);
    const auto d2 = random_direction(s, 4, 3);
    const Vector a = gateaux(zero, d1, ref).trajectory.final_state();
    const Vector b = gateaux(zero, d2, ref).trajectory.final_state();
    const Vector ab = gateaux(zero, d1.plus(d2, 1.0), ref).trajectory.final_state();
    EXPECT_LT((ab - a - b).norm(), 1e-10 * (a.norm() + b.norm()));
  }
}

TEST(Gateaux, MatchesCentredDifferenceAtNonzeroBase) {
  for (const ForwardSetup& s : {heat_setup(), wave_setup()}) {
    Matrix c = Matrix::Constant(3, 4, 0.1);
    c(1, 2) = -0.15;
    const DeformationPath base(kGrid, s.kind, s.T, c);
    const DeformationPath dir = random_direction(s, 4, 9);
    const StateTrajectory ref = simulate(s, base);
    const Vector v = gateaux(base, dir, ref).trajectory.final_state();
    const double eps = 1e-5;
    const Vector fd = (simulate(s, base.plus(dir, eps)).final_state() -
                       simulate(s, base.plus(dir, -eps)).final_state()) / (2 * eps);
    EXPECT_LT((fd - v).norm(), 1e-7 * v.norm());
  }
}

TEST(Gateaux, RejectsMismatchedReference) {
  const ForwardSetup s = heat_setup();
  const auto zero = DeformationPath::zero(kGrid, s.kind, s.T, 3);
  ForwardSetup other = s;
  other.T = 0.2;
  const StateTrajectory ref = simulate(other, DeformationPath::zero(kGrid, s.kind, 0.2, 3));
  EXPECT_THROW(gateaux(zero, random_direction(s, 3, 1), ref), ContractError);
  ForwardSetup odd = s;
  odd.steps = 301;
  const StateTrajectory ref_odd = simulate(odd, DeformationPath::zero(kGrid, s.kind, s.T, 1));
  EXPECT_THROW(gateaux(zero, random_direction(s, 3, 1), ref_odd), ContractError);
}

TEST(Frechet, QuadraticRemainderBothEquations) {
  for (const ForwardSetup& s : {heat_setup(), wave_setup()}) {
    std::vector<DeformationPath> dirs;
    for (std::uint64_t seed = 10; seed < 13; ++seed) dirs.push_back(random_direction(s, 4, seed));
    const FrechetReport r = frechet_residual(s, dirs, {1e-2, 1e-3, 1e-4});
    ASSERT_EQ(r.directions.size(), 3u);
    EXPECT_GE(r.min_slope, 1.9);
    for (const auto& d : r.directions) EXPECT_LT(d.slope, 2.2);
  }
}

TEST(Frechet, LoglogSlope) {
  EXPECT_NEAR(loglog_slope({1.0, 10.0, 100.0}, {2.0, 200.0, 20000.0}), 2.0, 1e-12);
}

TEST(WaveForcing, VelocityBlockOnly) {
  Vector state = Vector::Zero(18);
  for (int k = 0; k < 9; ++k) state(k) = k + 1.0;
  const Vector f = wave_forcing(kGrid, Vector::Zero(3), Vector::Ones(3), state);
  EXPECT_TRUE(f.head(9).isZero(0.0));
  // -(1/h^2)(u(2,j)/2 - 2 u(1,j)) at (1,1): u(1,1) = 1, u(2,1) = 4.
  EXPECT_DOUBLE_EQ(f(9 + kGrid.interior_index(1, 1)), -16.0 * (2.0 - 2.0));
  EXPECT_DOUBLE_EQ(f(9 + kGrid.interior_index(1, 2)), -16.0 * (2.5 - 4.0));
  EXPECT_EQ(f(9 + kGrid.interior_index(2, 2)), 0.0);
}

}  // namespace
}  // namespace shapectl
