#include "shapectl/sensitivity.hpp"

#include <cmath>
#include <string>

#include "shapectl/errors.hpp"
#include "stepping.hpp"

namespace shapectl {

namespace {

void check_alignment(const DeformationPath& base, const DeformationPath& dir,
                     const StateTrajectory& ref, EquationKind kind) {
  if (ref.kind != kind || base.kind() != kind || dir.kind() != kind) {
    throw ContractError("gateaux: equation kind mismatch");
  }
  if (!(base.grid() == ref.grid) || !(dir.grid() == ref.grid)) {
    throw ContractError("gateaux: grid mismatch");
  }
  if (ref.times.size() < 2) throw ContractError("gateaux: empty reference");
  const int S = static_cast<int>(ref.times.size()) - 1;
  if (base.T() != ref.times.back() || dir.T() != ref.times.back()) {
    throw ContractError("gateaux: horizon differs from the reference trajectory");
  }
  if (S % base.K() != 0 || S % dir.K() != 0) {
    throw ContractError("gateaux: reference time grid is not aligned with the "
                        "deformation segments");
  }
  if (ref.times != uniform_times(ref.times.back(), S)) {
    throw ContractError("gateaux: reference time grid is not uniform");
  }
}

}  // namespace

LinearizedState gateaux_heat(const DeformationPath& base,
                             const DeformationPath& dir,
                             const StateTrajectory& ref) {
  check_alignment(base, dir, ref, EquationKind::Heat);
  const GridSpec& g = ref.grid;
  const int S = static_cast<int>(ref.times.size()) - 1;
  const double dt = ref.times.back() / S;

  StateTrajectory v{g, EquationKind::Heat, ref.times, {}};
  v.states.reserve(ref.times.size());
  v.states.push_back(Vector::Zero(g.interior_size()));
  detail::CrankNicolsonStepper stepper(g, dt);
  for (int n = 0; n < S; ++n) {
    const double tm = 0.5 * (ref.times[n] + ref.times[n + 1]);
    const Vector lam = base.lambdas(tm);
    const Vector psi = dir.lambdas(tm);
    Vector rhs = Vector::Zero(g.interior_size());
    if (!psi.isZero(0.0)) {
      rhs = -0.5 * apply_derivative(g, lam, psi, ref.states[n] + ref.states[n + 1]);
    }
    v.states.push_back(stepper.step(lam, v.states[n], rhs));
  }
  return {std::move(v), base, dir};
}

Vector wave_forcing(const GridSpec& grid, const Vector& base_lambdas,
                    const Vector& dir_lambdas, const Vector& state) {
  const int n = grid.interior_size();
  Vector out = Vector::Zero(2 * n);
  out.tail(n) = -apply_derivative(grid, base_lambdas, dir_lambdas, state.head(n));
  return out;
}

LinearizedState gateaux_wave(const DeformationPath& base,
                             const DeformationPath& dir,
                             const StateTrajectory& ref) {
  check_alignment(base, dir, ref, EquationKind::Wave);
  const GridSpec& g = ref.grid;
  const int n = g.interior_size();
  const int S = static_cast<int>(ref.times.size()) - 1;
  const double dt = ref.times.back() / S;

  StateTrajectory y{g, EquationKind::Wave, ref.times, {}};
  y.states.reserve(ref.times.size());
  Vector du = Vector::Zero(n);
  Vector dv = Vector::Zero(n);
  Vector state(2 * n);
  state << du, dv;
  y.states.push_back(state);
  for (int s = 0; s < S; ++s) {
    const double tm = 0.5 * (ref.times[s] + ref.times[s + 1]);
    const Vector lam = base.lambdas(tm);
    const Vector psi = dir.lambdas(tm);
    Vector ref_half(2 * n);
    ref_half << ref.states[s].head(n) + 0.5 * dt * ref.states[s].tail(n),
        Vector::Zero(n);
    const Vector du_half = du + 0.5 * dt * dv;
    dv += dt * (wave_forcing(g, lam, psi, ref_half).tail(n) -
                apply_perturbed(g, lam, du_half));
    du = du_half + 0.5 * dt * dv;
    state << du, dv;
    y.states.push_back(state);
  }
  return {std::move(y), base, dir};
}

LinearizedState gateaux(const DeformationPath& base, const DeformationPath& dir,
                        const StateTrajectory& ref) {
  return ref.kind == EquationKind::Heat ? gateaux_heat(base, dir, ref)
                                        : gateaux_wave(base, dir, ref);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw DomainError("loglog_slope: need at least two matching points");
  }
  double mx = 0.0, my = 0.0;
  const double m = static_cast<double>(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += std::log(x[k]) / m;
    my += std::log(y[k]) / m;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double dx = std::log(x[k]) - mx;
    sxy += dx * (std::log(y[k]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

FrechetReport frechet_residual(const ForwardSetup& setup,
                               const std::vector<DeformationPath>& dirs,
                               const std::vector<double>& eps_list) {
  if (dirs.empty() || eps_list.size() < 2) {
    throw DomainError("frechet_residual: need directions and >= 2 scalings");
  }
  FrechetReport report{setup.kind, eps_list, {}, 0.0};
  bool first = true;
  for (const DeformationPath& psi : dirs) {
    if (psi.is_zero()) {
      throw DomainError("frechet_residual: zero direction");
    }
    const DeformationPath zero =
        DeformationPath::zero(setup.grid, setup.kind, setup.T, psi.K());
    const StateTrajectory ref = simulate(setup, zero);
    const Vector base_trace = ref.final_state();
    const Vector derivative = gateaux(zero, psi, ref).trajectory.final_state();

    FrechetDirection entry{psi, {}, 0.0};
    for (double eps : eps_list) {
      const DeformationPath scaled = psi.scaled(eps);
      if (!scaled.admissible()) {
        throw AdmissibilityError("frechet_residual: eps * psi not admissible");
      }
      const Vector trace = simulate(setup, scaled).final_state();
      entry.remainders.push_back((trace - base_trace - eps * derivative).norm());
    }
    entry.slope = loglog_slope(eps_list, entry.remainders);
    report.min_slope = first ? entry.slope : std::min(report.min_slope, entry.slope);
    first = false;
    report.directions.push_back(std::move(entry));
  }
  return report;
}

}  // namespace shapectl
