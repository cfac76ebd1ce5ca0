#include "shapectl/adjoint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include <Eigen/LU>

#include "shapectl/errors.hpp"
#include "stepping.hpp"

namespace shapectl {

AdjointTrajectory solve_adjoint_heat(const Vector& c, double T, int steps,
                                     const GridSpec& grid) {
  if (c.size() != grid.interior_size()) {
    throw DomainError("solve_adjoint_heat: terminal data has length " +
                      std::to_string(c.size()) + ", expected " +
                      std::to_string(grid.interior_size()));
  }
  if (steps < 1) throw DomainError("solve_adjoint_heat: steps must be >= 1");
  AdjointTrajectory X{grid, EquationKind::Heat, uniform_times(T, steps),
                      std::vector<Vector>(static_cast<std::size_t>(steps) + 1), c};
  const double dt = T / steps;
  detail::CrankNicolsonStepper stepper(grid, dt, /*transpose=*/true);
  const Vector zero = Vector::Zero(grid.layer_size());
  X.states[steps] = c;
  for (int n = steps - 1; n >= 0; --n) X.states[n] = stepper.step(zero, X.states[n + 1]);
  return X;
}

AdjointTrajectory solve_adjoint_wave(const Vector& c, double T, int steps,
                                     const GridSpec& grid) {
  const int n = grid.interior_size();
  if (c.size() != 2 * n) {
    throw DomainError("solve_adjoint_wave: terminal data has length " +
                      std::to_string(c.size()) + ", expected " +
                      std::to_string(2 * n));
  }
  if (steps < 1) throw DomainError("solve_adjoint_wave: steps must be >= 1");
  AdjointTrajectory X{grid, EquationKind::Wave, uniform_times(T, steps),
                      std::vector<Vector>(static_cast<std::size_t>(steps) + 1), c};
  const Matrix At = assemble_matrix(grid).transpose();
  const double ds = T / steps;
  Vector p = c.head(n);
  Vector q = c.tail(n);
  X.states[steps] = c;
  for (int s = steps - 1; s >= 0; --s) {
    // Reversed time s = T - t: dq/ds = p, dp/ds = -A^T q.
    const Vector q_half = q + 0.5 * ds * p;
    p -= ds * (At * q_half);
    q = q_half + 0.5 * ds * p;
    X.states[s].resize(2 * n);
    X.states[s] << p, q;
  }
  return X;
}

AdjointTrajectory solve_adjoint(EquationKind kind, const Vector& c, double T,
                                int steps, const GridSpec& grid) {
  return kind == EquationKind::Heat ? solve_adjoint_heat(c, T, steps, grid)
                                    : solve_adjoint_wave(c, T, steps, grid);
}

namespace {

void check_aligned(const AdjointTrajectory& X, const StateTrajectory& ref) {
  if (!(X.grid == ref.grid) || X.kind != ref.kind) {
    throw ContractError("adjoint: grid or kind mismatch with the reference");
  }
  if (X.times != ref.times) {
    throw ContractError("adjoint: time grid differs from the reference");
  }
}

}  // namespace

double duality_pairing(const AdjointTrajectory& X, const StateTrajectory& ref,
                       const DeformationPath& dir) {
  check_aligned(X, ref);
  const GridSpec& g = ref.grid;
  const Vector zero = Vector::Zero(g.layer_size());
  double total = 0.0;
  for (std::size_t s = 0; s + 1 < ref.times.size(); ++s) {
    const double t0 = ref.times[s];
    const double t1 = ref.times[s + 1];
    const Vector psi = dir.lambdas(0.5 * (t0 + t1));
    if (psi.isZero(0.0)) continue;
    const double g0 = -apply_derivative(g, zero, psi, ref.position(s)).dot(X.paired(s));
    const double g1 =
        -apply_derivative(g, zero, psi, ref.position(s + 1)).dot(X.paired(s + 1));
    total += 0.5 * (t1 - t0) * (g0 + g1);
  }
  return total;
}

Vector ndd_bracket(const GridSpec& grid, const Vector& u) {
  Vector out(grid.layer_size());
  for (int j = 1; j < grid.N(); ++j) {
    out(j - 1) = 0.5 * u(grid.interior_index(2, j)) - 2.0 * u(grid.interior_index(1, j));
  }
  return out;
}

NDDReport check_ndd(const StateTrajectory& ref, std::optional<double> threshold,
                    double t_lo, double t_hi) {
  NDDReport report;
  report.t_lo = t_lo;
  report.t_hi = t_hi;
  report.min_abs = std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t s = 0; s < ref.times.size(); ++s) {
    const double t = ref.times[s];
    if (t < t_lo || t > t_hi) continue;
    any = true;
    const Vector u = ref.position(s);
    report.scale = std::max(report.scale, u.cwiseAbs().maxCoeff());
    const Vector bracket = ndd_bracket(ref.grid, u).cwiseAbs();
    Eigen::Index j = 0;
    const double m = bracket.minCoeff(&j);
    if (m < report.min_abs) {
      report.min_abs = m;
      report.argmin_t = t;
      report.argmin_j = static_cast<int>(j) + 1;
    }
  }
  if (!any) {
    throw DomainError("check_ndd: no samples in the window [" +
                      std::to_string(t_lo) + ", " + std::to_string(t_hi) + "]");
  }
  report.threshold = threshold ? *threshold : kNddRelativeThreshold * report.scale;
  report.satisfied = report.min_abs > report.threshold;
  return report;
}

NDDReport check_ndd(const StateTrajectory& ref) {
  const double T = ref.times.back();
  return check_ndd(ref, std::nullopt, kNddWindowFraction * T, T);
}

Layer1Pairing layer1_pairing(const AdjointTrajectory& X, const StateTrajectory& ref) {
  check_aligned(X, ref);
  const GridSpec& g = ref.grid;
  const double inv_h2 = 1.0 / (g.h() * g.h());
  Layer1Pairing out{ref.times, Matrix(ref.times.size(), g.layer_size())};
  for (std::size_t s = 0; s < ref.times.size(); ++s) {
    const Vector bracket = ndd_bracket(g, ref.position(s));
    const Vector x = X.paired(s);
    for (int j = 1; j < g.N(); ++j) {
      out.g(s, j - 1) = inv_h2 * bracket(j - 1) * x(g.interior_index(1, j));
    }
  }
  return out;
}

Layer1Recovery recover_layer1(const Layer1Pairing& pairing,
                              const StateTrajectory& ref, const NDDReport& ndd) {
  if (!ndd.satisfied) {
    throw ContractError("recover_layer1: non-degeneracy condition does not hold");
  }
  if (pairing.times != ref.times) {
    throw ContractError("recover_layer1: time grid mismatch");
  }
  const GridSpec& g = ref.grid;
  const double h2 = g.h() * g.h();
  Layer1Recovery out;
  std::vector<Vector> rows;
  for (std::size_t s = 0; s < ref.times.size(); ++s) {
    const double t = ref.times[s];
    if (t < ndd.t_lo || t > ndd.t_hi) continue;
    const Vector bracket = ndd_bracket(g, ref.position(s));
    Vector row(g.layer_size());
    for (int j = 0; j < g.layer_size(); ++j) row(j) = h2 * pairing.g(s, j) / bracket(j);
    out.times.push_back(t);
    rows.push_back(row);
  }
  out.layer.resize(static_cast<Eigen::Index>(rows.size()), g.layer_size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.layer.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
  }
  out.sup_abs = out.layer.size() ? out.layer.cwiseAbs().maxCoeff() : 0.0;
  return out;
}

Matrix time_derivative(const Matrix& series, double dt) {
  const Eigen::Index S = series.rows();
  if (S < 3) throw ResolutionError("time_derivative: need >= 3 samples", 1.0);
  Matrix d(S, series.cols());
  d.row(0) = (-3.0 * series.row(0) + 4.0 * series.row(1) - series.row(2)) / (2.0 * dt);
  for (Eigen::Index s = 1; s + 1 < S; ++s) {
    d.row(s) = (series.row(s + 1) - series.row(s - 1)) / (2.0 * dt);
  }
  d.row(S - 1) = (3.0 * series.row(S - 1) - 4.0 * series.row(S - 2) +
                  series.row(S - 3)) / (2.0 * dt);
  return d;
}

Matrix second_time_derivative(const Matrix& series, double dt) {
  const Eigen::Index S = series.rows();
  if (S < 4) throw ResolutionError("second_time_derivative: need >= 4 samples", 1.0);
  const double inv = 1.0 / (dt * dt);
  Matrix d(S, series.cols());
  d.row(0) = (2.0 * series.row(0) - 5.0 * series.row(1) + 4.0 * series.row(2) -
              series.row(3)) * inv;
  for (Eigen::Index s = 1; s + 1 < S; ++s) {
    d.row(s) = (series.row(s + 1) - 2.0 * series.row(s) + series.row(s - 1)) * inv;
  }
  d.row(S - 1) = (2.0 * series.row(S - 1) - 5.0 * series.row(S - 2) +
                  4.0 * series.row(S - 3) - series.row(S - 4)) * inv;
  return d;
}

namespace {

Matrix derivative_for(Evolution evolution, const Matrix& series, double dt) {
  return evolution == Evolution::Wave ? second_time_derivative(series, dt)
                                      : time_derivative(series, dt);
}

// Relative change of the derivative at the common samples when every other
// sample is dropped.
double halving_change(Evolution evolution, const Matrix& series, double dt) {
  const Matrix full = derivative_for(evolution, series, dt);
  const double scale = full.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  const Eigen::Index half_rows = (series.rows() + 1) / 2;
  Matrix coarse(half_rows, series.cols());
  for (Eigen::Index r = 0; r < half_rows; ++r) coarse.row(r) = series.row(2 * r);
  const Matrix dcoarse = derivative_for(evolution, coarse, 2.0 * dt);
  double worst = 0.0;
  for (Eigen::Index r = 0; r < half_rows; ++r) {
    worst = std::max(worst, (dcoarse.row(r) - full.row(2 * r)).cwiseAbs().maxCoeff());
  }
  return worst / scale;
}

}  // namespace

Vector ZeroPropagation::interior_at(const GridSpec& grid, std::size_t s) const {
  Vector v(grid.interior_size());
  for (int i = 1; i < grid.M(); ++i) {
    for (int j = 1; j < grid.N(); ++j) {
      v(grid.interior_index(i, j)) = columns[i](static_cast<Eigen::Index>(s), j);
    }
  }
  return v;
}

ZeroPropagation propagate_zeros(const GridSpec& grid,
                                const std::vector<double>& times,
                                const Matrix& col0, const Matrix& col1,
                                Evolution evolution, bool check_resolution) {
  const Eigen::Index S = static_cast<Eigen::Index>(times.size());
  const int N = grid.N();
  if (col0.rows() != S || col1.rows() != S || col0.cols() != N + 1 ||
      col1.cols() != N + 1) {
    throw DomainError("propagate_zeros: columns must be (samples x (N+1))");
  }
  if (S < 4) throw ResolutionError("propagate_zeros: need >= 4 time samples", 1.0);
  const double dt = times[1] - times[0];
  for (Eigen::Index s = 1; s < S; ++s) {
    if (std::abs((times[s] - times[s - 1]) - dt) > 1e-9 * dt) {
      throw ContractError("propagate_zeros: time samples are not uniform");
    }
  }
  for (const Matrix* col : {&col0, &col1}) {
    if (!col->col(0).isZero(0.0) || !col->col(N).isZero(0.0)) {
      throw ContractError("propagate_zeros: rows j = 0 and j = N must be zero");
    }
  }
  if (check_resolution) {
    for (const Matrix* col : {&col0, &col1}) {
      if (S < 8) {
        throw ResolutionError("propagate_zeros: too few samples to check resolution", 1.0);
      }
      const double change = halving_change(evolution, *col, dt);
      if (change > 0.1) {
        throw ResolutionError("propagate_zeros: time derivative changes by " +
                                  std::to_string(change) + " under grid halving",
                              change);
      }
    }
  }

  const double h2 = grid.h() * grid.h();
  const double sign = evolution == Evolution::Backward ? -1.0 : 1.0;
  ZeroPropagation out{times, {col0, col1}};
  out.columns.reserve(static_cast<std::size_t>(grid.M()) + 1);
  for (int k = 1; k < grid.M(); ++k) {
    const Matrix& cur = out.columns[k];
    const Matrix& prev = out.columns[k - 1];
    const Matrix d = derivative_for(evolution, cur, dt);
    Matrix next = Matrix::Zero(S, N + 1);
    for (int j = 1; j < N; ++j) {
      next.col(j) = 4.0 * cur.col(j) - prev.col(j) - cur.col(j + 1) -
                    cur.col(j - 1) + sign * h2 * d.col(j);
    }
    out.columns.push_back(std::move(next));
  }
  return out;
}

namespace {

// Columns 0 and 1 (with zero rows j = 0, N) from the recovered layer values.
std::pair<Matrix, Matrix> input_columns(const GridSpec& grid, const Matrix& layer) {
  Matrix col0 = Matrix::Zero(layer.rows(), grid.N() + 1);
  Matrix col1 = Matrix::Zero(layer.rows(), grid.N() + 1);
  col1.middleCols(1, grid.layer_size()) = layer;
  return {col0, col1};
}

// Terminal data of the adjoint from the rebuilt field. Every nested time
// derivative in propagate_zeros spreads the one-sided closure error one
// sample inward, so the field is read M samples before the end of the window
// and carried to T with the exact discrete adjoint step.
Vector carry_to_terminal(const GridSpec& g, EquationKind kind,
                         const ZeroPropagation& rebuilt, double dt) {
  const std::size_t last = rebuilt.times.size() - 1;
  const std::size_t offset = static_cast<std::size_t>(g.M());
  if (last < 2 * offset + 1) {
    throw ResolutionError("unique_continuation_check: NDD window too short", 1.0);
  }
  const std::size_t m = last - offset;
  const Matrix At = assemble_matrix(g).transpose();
  const Matrix I = Matrix::Identity(At.rows(), At.cols());
  if (kind == EquationKind::Heat) {
    // Inverse of the backward Crank-Nicolson step.
    const Eigen::PartialPivLU<Matrix> lu(I - 0.5 * dt * At);
    const Matrix rhs = I + 0.5 * dt * At;
    Vector x = rebuilt.interior_at(g, m);
    for (std::size_t s = m; s < last; ++s) x = lu.solve(rhs * x);
    return x;
  }
  // Integer samples of the reversed-time Verlet scheme obey
  // q_{s+1} = 2 q_s - q_{s-1} - dt^2 A^T q_s exactly.
  Vector q_prev = rebuilt.interior_at(g, m);
  Vector q = rebuilt.interior_at(g, m + 1);
  for (std::size_t s = m + 1; s < last; ++s) {
    Vector next = 2.0 * q - q_prev - dt * dt * (At * q);
    q_prev = std::move(q);
    q = std::move(next);
  }
  // One reversed-time step from (p, q) at T lands on q_prev; solve for p.
  const Eigen::PartialPivLU<Matrix> lu(I - 0.25 * dt * dt * At);
  const Vector p = lu.solve(q_prev - q + 0.5 * dt * dt * (At * q)) / dt;
  Vector c(2 * q.size());
  c << p, q;
  return c;
}

}  // namespace

UniqueContinuationReport unique_continuation_check(const StateTrajectory& ref,
                                                   const NDDReport& ndd,
                                                   int trials,
                                                   std::uint64_t seed) {
  const GridSpec& g = ref.grid;
  const int n = g.interior_size();
  const int dim = ref.kind == EquationKind::Heat ? n : 2 * n;
  const int steps = static_cast<int>(ref.times.size()) - 1;
  const double T = ref.times.back();
  const Evolution evolution =
      ref.kind == EquationKind::Heat ? Evolution::Backward : Evolution::Wave;

  UniqueContinuationReport report;
  report.trials = trials;
  report.min_pairing_ratio = std::numeric_limits<double>::infinity();
  bool all_certified = ndd.satisfied;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < trials; ++trial) {
    Vector c(dim);
    for (int k = 0; k < dim; ++k) c(k) = normal(rng);
    c.normalize();

    const AdjointTrajectory X = solve_adjoint(ref.kind, c, T, steps, g);
    const Layer1Pairing pairing = layer1_pairing(X, ref);
    const double sup = pairing.sup_abs();
    report.min_pairing_ratio = std::min(report.min_pairing_ratio, sup);
    if (sup <= 1e-12) {
      // Every pairing vanishes although c != 0.
      if (!report.annihilating_found) report.annihilating_c = c;
      report.annihilating_found = true;
      all_certified = false;
      continue;
    }
    if (!ndd.satisfied) continue;

    // Rescale so the pairings sit at the vanishing level; by linearity the
    // adjoint and the chain scale with it.
    const double scale = report.zero_pairing_level / sup;
    const Vector c_small = scale * c;
    Layer1Pairing small = pairing;
    small.g *= scale;
    const Layer1Recovery layer = recover_layer1(small, ref, ndd);
    const auto [col0, col1] = input_columns(g, layer.layer);
    const ZeroPropagation rebuilt =
        propagate_zeros(g, layer.times, col0, col1, evolution, true);

    const Vector c_rec =
        carry_to_terminal(g, ref.kind, rebuilt, layer.times[1] - layer.times[0]);

    const double residual_c = c_small.norm();
    const double chain = c_rec.norm();
    report.max_residual_c = std::max(report.max_residual_c, residual_c);
    report.max_chain_residual = std::max(report.max_chain_residual, chain);
    report.max_reconstruction_error =
        std::max(report.max_reconstruction_error, (c_rec - c_small).norm() / residual_c);
    if (residual_c > report.tolerance || chain > report.tolerance) all_certified = false;
  }
  report.certified = all_certified && !report.annihilating_found;
  return report;
}

}  // namespace shapectl
