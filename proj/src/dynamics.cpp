#include "shapectl/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "shapectl/errors.hpp"
#include "stepping.hpp"

namespace shapectl {

SourceTerm SourceTerm::constant(double c) {
  if (!std::isfinite(c)) throw DomainError("source: non-finite constant");
  SourceTerm s;
  if (c == 0.0) return s;
  s.kind_ = Kind::Constant;
  s.value_ = c;
  s.description_ = "constant";
  return s;
}

SourceTerm SourceTerm::separable(TimeFactor g, SpaceFactor sp,
                                 std::string description) {
  if (!g || !sp) throw DomainError("source: empty separable factor");
  SourceTerm s;
  s.kind_ = Kind::Separable;
  s.time_factor_ = std::move(g);
  s.space_factor_ = std::move(sp);
  s.description_ = std::move(description);
  return s;
}

SourceTerm SourceTerm::tabulated(std::vector<double> times,
                                 std::vector<Vector> samples) {
  if (times.empty() || times.size() != samples.size()) {
    throw DomainError("source: tabulated times and samples must match");
  }
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) {
      throw DomainError("source: tabulated times must increase strictly");
    }
  }
  for (const auto& v : samples) {
    if (!v.allFinite()) throw DomainError("source: non-finite tabulated sample");
  }
  SourceTerm s;
  s.kind_ = Kind::Tabulated;
  s.times_ = std::move(times);
  s.samples_ = std::move(samples);
  s.description_ = "tabulated";
  return s;
}

Vector SourceTerm::evaluate(double t, const GridSpec& grid) const {
  const int n = grid.interior_size();
  switch (kind_) {
    case Kind::Zero:
      return Vector::Zero(n);
    case Kind::Constant:
      return Vector::Constant(n, value_);
    case Kind::Separable: {
      const double g = time_factor_(t);
      Vector out(n);
      for (int i = 1; i < grid.M(); ++i) {
        for (int j = 1; j < grid.N(); ++j) {
          out(grid.interior_index(i, j)) =
              g * space_factor_(i * grid.h(), j * grid.h());
        }
      }
      if (!out.allFinite()) {
        throw DomainError("source: non-finite value at t = " + std::to_string(t));
      }
      return out;
    }
    case Kind::Tabulated: {
      if (samples_.front().size() != n) {
        throw DomainError("source: tabulated sample length mismatch");
      }
      if (t <= times_.front()) return samples_.front();
      if (t >= times_.back()) return samples_.back();
      const auto it = std::upper_bound(times_.begin(), times_.end(), t);
      const std::size_t hi = static_cast<std::size_t>(it - times_.begin());
      const std::size_t lo = hi - 1;
      const double w = (t - times_[lo]) / (times_[hi] - times_[lo]);
      return (1.0 - w) * samples_[lo] + w * samples_[hi];
    }
  }
  return Vector::Zero(n);
}

int aligned_steps(int steps, int K) {
  if (steps < 1) throw DomainError("time grid: steps must be >= 1");
  if (K < 1) throw DomainError("time grid: K must be >= 1");
  return K * ((steps + K - 1) / K);
}

std::vector<double> uniform_times(double T, int steps) {
  std::vector<double> t(static_cast<std::size_t>(steps) + 1);
  const double dt = T / steps;
  for (int n = 0; n <= steps; ++n) t[n] = n * dt;
  t.back() = T;
  return t;
}

namespace {

void check_common(const DeformationPath& path, EquationKind kind, double T,
                  int steps, const GridSpec& grid, const Vector& u0) {
  if (!(path.grid() == grid)) throw ContractError("solver: path grid mismatch");
  if (path.kind() != kind) throw ContractError("solver: path kind mismatch");
  if (path.T() != T) throw ContractError("solver: path horizon differs from T");
  if (steps < 1) throw DomainError("solver: steps must be >= 1");
  if (u0.size() != grid.interior_size()) {
    throw DomainError("solver: initial state has wrong length");
  }
  if (!path.admissible()) {
    throw AdmissibilityError("solver: deformation path is not admissible");
  }
}

void check_finite(const Vector& x, int step) {
  if (!x.allFinite()) {
    throw DivergenceError("solver diverged at step " + std::to_string(step),
                          step);
  }
}

}  // namespace

StateTrajectory solve_heat(const DeformationPath& path, const SourceTerm& F,
                           const Vector& u0, double T, int steps,
                           const GridSpec& grid) {
  check_common(path, EquationKind::Heat, T, steps, grid, u0);
  const int S = aligned_steps(steps, path.K());
  StateTrajectory traj{grid, EquationKind::Heat, uniform_times(T, S), {}};
  traj.states.reserve(traj.times.size());
  traj.states.push_back(u0);

  const double dt = T / S;
  detail::CrankNicolsonStepper stepper(grid, dt);
  Vector f_prev = F.evaluate(0.0, grid);
  for (int n = 0; n < S; ++n) {
    const double t0 = traj.times[n];
    const double t1 = traj.times[n + 1];
    const Vector f_next = F.evaluate(t1, grid);
    Vector next = stepper.step(path.lambdas(0.5 * (t0 + t1)), traj.states[n],
                               0.5 * (f_prev + f_next));
    check_finite(next, n + 1);
    traj.states.push_back(std::move(next));
    f_prev = f_next;
  }
  return traj;
}

double estimate_lambda_max(const GridSpec& grid, const Vector& lambdas) {
  const int n = grid.interior_size();
  Vector x(n);
  // Checkerboard start: strong overlap with the highest-frequency mode.
  for (int i = 1; i < grid.M(); ++i) {
    for (int j = 1; j < grid.N(); ++j) {
      x(grid.interior_index(i, j)) = ((i + j) % 2 == 0 ? 1.0 : -1.0) +
                                     0.01 * std::sin(1.0 + i + 3.0 * j);
    }
  }
  x.normalize();
  double estimate = 0.0;
  for (int it = 0; it < 500; ++it) {
    Vector y = apply_perturbed(grid, lambdas, x);
    const double norm = y.norm();
    if (norm == 0.0) return 0.0;
    const double previous = estimate;
    estimate = norm;
    x = y / norm;
    if (it > 10 && std::abs(estimate - previous) <= 1e-12 * estimate) break;
  }
  return estimate;
}

StateTrajectory solve_wave(const DeformationPath& path, const SourceTerm& F,
                           const Vector& u0, const Vector& u1, double T,
                           int steps, const GridSpec& grid) {
  check_common(path, EquationKind::Wave, T, steps, grid, u0);
  if (u1.size() != grid.interior_size()) {
    throw DomainError("solve_wave: initial velocity has wrong length");
  }
  const int S = aligned_steps(steps, path.K());
  const double dt = T / S;

  double lambda_max = estimate_lambda_max(grid, Vector::Zero(grid.layer_size()));
  for (int k = 0; k < path.K(); ++k) {
    lambda_max = std::max(lambda_max,
                          estimate_lambda_max(grid, path.coeffs().col(k)));
  }
  const double dt_max = 2.0 / std::sqrt(lambda_max);
  if (dt > dt_max) {
    throw ConfigError("solve_wave: dt = " + std::to_string(dt) +
                      " exceeds the stability limit 2/sqrt(lambda_max) = " +
                      std::to_string(dt_max));
  }

  const int n = grid.interior_size();
  StateTrajectory traj{grid, EquationKind::Wave, uniform_times(T, S), {}};
  traj.states.reserve(traj.times.size());
  Vector state(2 * n);
  state << u0, u1;
  traj.states.push_back(state);

  Vector u = u0;
  Vector v = u1;
  for (int s = 0; s < S; ++s) {
    const double tm = 0.5 * (traj.times[s] + traj.times[s + 1]);
    const Vector u_half = u + 0.5 * dt * v;
    v += dt * (F.evaluate(tm, grid) - apply_perturbed(grid, path.lambdas(tm), u_half));
    u = u_half + 0.5 * dt * v;
    state << u, v;
    check_finite(state, s + 1);
    traj.states.push_back(state);
  }
  return traj;
}

StateTrajectory reference_state(EquationKind kind, const SourceTerm& F,
                                const Vector& u0, const Vector& u1, double T,
                                int steps, const GridSpec& grid) {
  const DeformationPath zero = DeformationPath::zero(grid, kind, T, 1);
  if (kind == EquationKind::Heat) return solve_heat(zero, F, u0, T, steps, grid);
  return solve_wave(zero, F, u0, u1, T, steps, grid);
}

StateTrajectory simulate(const ForwardSetup& setup, const DeformationPath& path) {
  if (setup.kind == EquationKind::Heat) {
    return solve_heat(path, setup.source, setup.u0, setup.T, setup.steps,
                      setup.grid);
  }
  return solve_wave(path, setup.source, setup.u0, setup.u1, setup.T,
                    setup.steps, setup.grid);
}

double wave_energy(const GridSpec& grid, const Vector& state) {
  const int n = grid.interior_size();
  const Vector u = state.head(n);
  const Vector v = state.tail(n);
  return 0.5 * v.squaredNorm() + 0.5 * u.dot(apply_laplacian(grid, u));
}

Vector eigenmode(const GridSpec& grid, int p, int q) {
  Vector v(grid.interior_size());
  const double pi = std::numbers::pi;
  for (int i = 1; i < grid.M(); ++i) {
    for (int j = 1; j < grid.N(); ++j) {
      v(grid.interior_index(i, j)) =
          std::sin(p * pi * i / grid.M()) * std::sin(q * pi * j / grid.N());
    }
  }
  return v;
}

double trapezoid(const std::vector<double>& times,
                 const std::vector<double>& values) {
  double sum = 0.0;
  for (std::size_t k = 1; k < times.size(); ++k) {
    sum += 0.5 * (times[k] - times[k - 1]) * (values[k] + values[k - 1]);
  }
  return sum;
}

}  // namespace shapectl
