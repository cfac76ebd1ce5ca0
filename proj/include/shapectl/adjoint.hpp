#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "shapectl/dynamics.hpp"

namespace shapectl {

/// Backward solution of the transpose system with terminal data c.
///
/// Heat: dX/dt = A^T X on [0, T], X(T) = c. This is the terminal-value form
/// of the jump condition [X](T) = c, and it makes
///   <v(T), c> = int_0^T <-A'(0)[psi] u_0(t), X(t)> dt
/// for every linearized state v.
///
/// Wave: X = (p, q) with dX/dt = M(0)^T X, i.e. dp/dt = A^T q, dq/dt = -p,
/// X(T) = c. The velocity forcing of the linearized system pairs with q.
struct AdjointTrajectory {
  GridSpec grid;
  EquationKind kind;
  std::vector<double> times;
  std::vector<Vector> states;
  Vector terminal;

  /// Component paired with the linearized forcing at sample s: X for heat,
  /// q for wave.
  Vector paired(std::size_t s) const {
    const int n = grid.interior_size();
    return kind == EquationKind::Heat ? states[s] : Vector(states[s].tail(n));
  }
};

/// Crank-Nicolson in reversed time with the assembled transpose of A(0).
AdjointTrajectory solve_adjoint_heat(const Vector& c, double T, int steps,
                                     const GridSpec& grid);
/// Stormer-Verlet in reversed time; c has length 2n.
AdjointTrajectory solve_adjoint_wave(const Vector& c, double T, int steps,
                                     const GridSpec& grid);
AdjointTrajectory solve_adjoint(EquationKind kind, const Vector& c, double T,
                                int steps, const GridSpec& grid);

/// int_0^T <-A'(0)[psi(t)] u_0(t), X(t)> dt by the trapezoidal rule, with psi
/// frozen at each step midpoint. This is the right side of the duality
/// identity whose left side is <v(T), c>.
double duality_pairing(const AdjointTrajectory& X, const StateTrajectory& ref,
                       const DeformationPath& dir);

/// 1/2 u(2, j) - 2 u(1, j) for j = 1..N-1.
Vector ndd_bracket(const GridSpec& grid, const Vector& u);

struct NDDReport {
  double min_abs = 0.0;
  double argmin_t = 0.0;
  int argmin_j = 0;
  double threshold = 0.0;
  double scale = 0.0;  // max |u| over the window
  double t_lo = 0.0;
  double t_hi = 0.0;
  bool satisfied = false;
};

/// Relative factor for the default threshold, applied to max |u|.
inline constexpr double kNddRelativeThreshold = 1e-8;
/// Default window start as a fraction of T.
inline constexpr double kNddWindowFraction = 0.05;

/// Scans the stored samples with t in [t_lo, t_hi]. For wave trajectories the
/// position component is used. Without an explicit threshold, 1e-8 max|u| is
/// used. Throws DomainError for an empty window.
NDDReport check_ndd(const StateTrajectory& ref, std::optional<double> threshold,
                    double t_lo, double t_hi);
/// check_ndd on [0.05 T, T] with the default threshold.
NDDReport check_ndd(const StateTrajectory& ref);

/// g_j(t) = (1/h^2) (1/2 u(2,j) - 2 u(1,j)) X(1,j)(t), the per-node integrand
/// of <X, A'(0)[mu V_j] u_0> once mu is factored out.
struct Layer1Pairing {
  std::vector<double> times;
  Matrix g;  // rows: time samples, cols: j = 1..N-1
  double sup_abs() const { return g.size() ? g.cwiseAbs().maxCoeff() : 0.0; }
};

Layer1Pairing layer1_pairing(const AdjointTrajectory& X, const StateTrajectory& ref);

/// X(1, j)(t) recovered from the pairings by dividing out the NDD bracket, on
/// the samples of the NDD window. Throws ContractError when NDD fails.
struct Layer1Recovery {
  std::vector<double> times;
  Matrix layer;  // rows: window samples, cols: j = 1..N-1
  double sup_abs = 0.0;
};

Layer1Recovery recover_layer1(const Layer1Pairing& pairing,
                              const StateTrajectory& ref, const NDDReport& ndd);

/// Time evolution satisfied by the series fed to propagate_zeros.
enum class Evolution {
  Backward,  // dX/dt = A X      (the heat adjoint solved here)
  Forward,   // dX/dt = -A X
  Wave,      // d2X/dt2 = -A X   (q component of the wave adjoint)
};

/// Columns i = 0..M of a reconstructed field, each (samples x (N+1)).
struct ZeroPropagation {
  std::vector<double> times;
  std::vector<Matrix> columns;

  /// Interior vector at sample s built from columns 1..M-1.
  Vector interior_at(const GridSpec& grid, std::size_t s) const;
};

/// Rebuilds every column from columns 0 and 1 through the row (k, j) of the
/// five-point stencil:
///   X(k+1, j) = 4 X(k, j) - X(k-1, j) - X(k, j+1) - X(k, j-1) -+ h^2 D X(k, j)
/// where D is the time derivative of the chosen evolution (second-order
/// centered differences, one-sided at the ends). Rows j = 0 and j = N of the
/// input columns must be zero. With check_resolution, the derivative of each
/// input column must change by at most 10% when the sampling is halved,
/// otherwise ResolutionError.
ZeroPropagation propagate_zeros(const GridSpec& grid,
                                const std::vector<double>& times,
                                const Matrix& col0, const Matrix& col1,
                                Evolution evolution, bool check_resolution = true);

/// Centered second-order first and second time derivatives of each column
/// of `series` (rows are uniform samples).
Matrix time_derivative(const Matrix& series, double dt);
Matrix second_time_derivative(const Matrix& series, double dt);

struct UniqueContinuationReport {
  int trials = 0;
  /// Level below which a pairing is treated as vanishing.
  double zero_pairing_level = 1e-10;
  double tolerance = 1e-8;
  /// Largest |c| among terminal data whose pairings sit at the vanishing
  /// level: the quantitative form of "pairings vanish => c = 0".
  double max_residual_c = 0.0;
  /// Largest |c| produced by the layer-1 -> propagate_zeros chain from the
  /// same vanishing pairings.
  double max_chain_residual = 0.0;
  /// Relative error of the chain reconstruction against the true c.
  double max_reconstruction_error = 0.0;
  /// min over trials of sup_{t,j} |g_j| / |c|.
  double min_pairing_ratio = 0.0;
  bool annihilating_found = false;
  Vector annihilating_c;
  bool certified = false;
};

/// Random terminal data c (fixed seed): computes the adjoint, the layer-1
/// pairings and, when NDD holds, runs the recovery chain.
UniqueContinuationReport unique_continuation_check(const StateTrajectory& ref,
                                                   const NDDReport& ndd,
                                                   int trials,
                                                   std::uint64_t seed);

}  // namespace shapectl
