#pragma once

#include <vector>

#include "shapectl/dynamics.hpp"

namespace shapectl {

/// Directional derivative v = <d u_phi / d phi, psi> on the time grid of the
/// base trajectory; v(0) = 0.
struct LinearizedState {
  StateTrajectory trajectory;
  DeformationPath base;
  DeformationPath direction;
};

/// Solves dv/dt + A(phi) v = -<A'(phi), psi> u_phi with the same
/// Crank-Nicolson steps as the forward solve, so v is the exact derivative of
/// the discrete trajectory. Throws ContractError when ref does not sit on the
/// time grid the base path would produce.
LinearizedState gateaux_heat(const DeformationPath& base,
                             const DeformationPath& dir,
                             const StateTrajectory& ref);

/// Wave analogue on stacked (u, du/dt) states: the forcing enters the
/// velocity equation only, through A'(phi) u at the Verlet half step.
LinearizedState gateaux_wave(const DeformationPath& base,
                             const DeformationPath& dir,
                             const StateTrajectory& ref);

LinearizedState gateaux(const DeformationPath& base, const DeformationPath& dir,
                        const StateTrajectory& ref);

/// -<M'(phi), psi> U for a stacked wave state U = (u, du/dt): the position
/// block is zero, the velocity block is -<A'(phi), psi> u.
Vector wave_forcing(const GridSpec& grid, const Vector& base_lambdas,
                    const Vector& dir_lambdas, const Vector& state);

struct FrechetDirection {
  DeformationPath direction;
  std::vector<double> remainders;  // ||L(eps psi) - L(0) - eps dL(0) psi||
  double slope = 0.0;              // least-squares log-log slope
};

struct FrechetReport {
  EquationKind kind;
  std::vector<double> eps;
  std::vector<FrechetDirection> directions;
  double min_slope = 0.0;
};

/// Remainder of the first-order expansion of the trace map at phi = 0 for
/// each direction and scaling. Directions must be nonzero and every eps * psi
/// admissible.
FrechetReport frechet_residual(const ForwardSetup& setup,
                               const std::vector<DeformationPath>& dirs,
                               const std::vector<double>& eps_list);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace shapectl
