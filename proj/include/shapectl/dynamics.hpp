#pragma once

#include <functional>
#include <string>
#include <vector>

#include "shapectl/grid.hpp"
#include "shapectl/operators.hpp"

namespace shapectl {

/// Source F(t) on the interior nodes: zero, constant, separable
/// g(t) s(x, y), or tabulated samples linearly interpolated in time.
class SourceTerm {
 public:
  using TimeFactor = std::function<double(double)>;
  using SpaceFactor = std::function<double(double, double)>;

  SourceTerm() = default;

  static SourceTerm zero() { return {}; }
  static SourceTerm constant(double c);
  static SourceTerm separable(TimeFactor g, SpaceFactor s,
                              std::string description);
  /// times strictly increasing; one interior vector per time.
  static SourceTerm tabulated(std::vector<double> times,
                              std::vector<Vector> samples);

  /// Throws DomainError on non-finite values or size mismatch.
  Vector evaluate(double t, const GridSpec& grid) const;

  bool is_zero() const { return kind_ == Kind::Zero; }
  const std::string& description() const { return description_; }

 private:
  enum class Kind { Zero, Constant, Separable, Tabulated };

  Kind kind_ = Kind::Zero;
  double value_ = 0.0;
  TimeFactor time_factor_;
  SpaceFactor space_factor_;
  std::vector<double> times_;
  std::vector<Vector> samples_;
  std::string description_ = "zero";
};

/// Time series of interior states. Heat states have length n = (M-1)(N-1);
/// wave states are (u, du/dt) stacked, length 2n.
struct StateTrajectory {
  GridSpec grid;
  EquationKind kind;
  std::vector<double> times;
  std::vector<Vector> states;

  int interior_size() const { return grid.interior_size(); }
  std::size_t size() const { return times.size(); }
  double dt() const { return times[1] - times[0]; }
  const Vector& final_state() const { return states.back(); }
  /// u at sample s (the whole state for heat).
  Vector position(std::size_t s) const {
    return states[s].head(interior_size());
  }
  Vector velocity(std::size_t s) const {
    return states[s].tail(interior_size());
  }
};

/// Everything needed to run the forward problem except the deformation.
struct ForwardSetup {
  EquationKind kind;
  GridSpec grid;
  SourceTerm source;
  Vector u0;
  Vector u1;  // wave only
  double T;
  int steps;
};

/// Smallest multiple of K that is >= steps, so no step straddles a segment
/// boundary.
int aligned_steps(int steps, int K);

/// Uniform samples t_0 = 0, ..., t_steps = T (last one exactly T).
std::vector<double> uniform_times(double T, int steps);

/// Crank-Nicolson for du/dt + A(phi(t)) u = F with A frozen at each step
/// midpoint. Uses aligned_steps(steps, path.K()) steps.
StateTrajectory solve_heat(const DeformationPath& path, const SourceTerm& F,
                           const Vector& u0, double T, int steps,
                           const GridSpec& grid);

/// Stormer-Verlet (drift-kick-drift) for d2u/dt2 + A(phi(t)) u = F with A and
/// F at step midpoints. Throws ConfigError when dt > 2 / sqrt(lambda_max).
StateTrajectory solve_wave(const DeformationPath& path, const SourceTerm& F,
                           const Vector& u0, const Vector& u1, double T,
                           int steps, const GridSpec& grid);

/// Unperturbed state: the solver above with phi = 0 on a single segment.
StateTrajectory reference_state(EquationKind kind, const SourceTerm& F,
                                const Vector& u0, const Vector& u1, double T,
                                int steps, const GridSpec& grid);

/// Dispatches on setup.kind; the path must use the same kind and horizon.
StateTrajectory simulate(const ForwardSetup& setup, const DeformationPath& path);

/// Dominant eigenvalue magnitude of A(lambdas) by power iteration.
double estimate_lambda_max(const GridSpec& grid, const Vector& lambdas);

/// 1/2 |v|^2 + 1/2 <A u, u> with the unperturbed A, for a stacked wave state.
double wave_energy(const GridSpec& grid, const Vector& state);

/// Discrete eigenvector sin(p pi x / a) sin(q pi y / b) on the interior.
Vector eigenmode(const GridSpec& grid, int p, int q);

/// Trapezoidal rule over the time samples.
double trapezoid(const std::vector<double>& times,
                 const std::vector<double>& values);

}  // namespace shapectl
