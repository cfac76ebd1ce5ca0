#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "shapectl/adjoint.hpp"
#include "shapectl/dynamics.hpp"

namespace shapectl {

/// Forward setup plus the control basis (K time segments per boundary node)
/// and the target final trace (u(T) for heat, (u(T), du/dt(T)) for wave).
struct ControlProblem {
  ForwardSetup setup;
  int K = 1;
  Vector target;

  int state_dim() const {
    const int n = setup.grid.interior_size();
    return setup.kind == EquationKind::Heat ? n : 2 * n;
  }
  int control_dim() const { return setup.grid.layer_size() * K; }
  /// Setup with steps rounded up to a multiple of K.
  ForwardSetup aligned_setup() const;
  DeformationPath zero_path() const;
  DeformationPath basis(int j, int k) const;
};

/// Throws DomainError when sizes are inconsistent.
void validate(const ControlProblem& problem);

/// Final trace of the perturbed state. Throws ContractError when path.K()
/// differs from problem.K, AdmissibilityError for inadmissible paths.
Vector trace_map(const DeformationPath& path, const ControlProblem& problem);

/// Final-time responses to the unit controls; column (j-1) K + k answers
/// boundary node j, time basis function k.
struct ControlMapMatrix {
  Matrix G;
  Vector sigma;  // singular values, descending
  int K = 1;

  double sigma_max() const { return sigma.size() ? sigma(0) : 0.0; }
  double sigma_min() const { return sigma.size() ? sigma(sigma.size() - 1) : 0.0; }
};

ControlMapMatrix assemble_control_map(const ControlProblem& problem);
/// Jacobian of the trace map at `base`, whose trajectory is `base_traj`.
ControlMapMatrix assemble_control_map(const ControlProblem& problem,
                                      const DeformationPath& base,
                                      const StateTrajectory& base_traj);

/// G^T c at phi = 0 from one backward adjoint solve and the layer-1 pairings,
/// without forming G.
Vector adjoint_transpose_apply(const ControlProblem& problem, const Vector& c);

struct SurjectivityReport {
  EquationKind kind = EquationKind::Heat;
  int rows = 0;
  int cols = 0;
  std::vector<double> singular_values;
  double sigma_max = 0.0;
  double sigma_min = 0.0;
  double condition = 0.0;
  double rank_tolerance = 1e-6;
  NDDReport ndd;
  UniqueContinuationReport unique_continuation;
  bool svd_surjective = false;
  bool uc_surjective = false;
  bool agree = false;
  std::string verdict;  // "surjective" or "deficient"
};

struct SurjectivityOptions {
  double rank_tolerance = 1e-6;
  int uc_trials = 20;
  std::uint64_t seed = 0;
};

/// SVD certificate of G joined with the NDD / unique-continuation
/// certificate of the adjoint chain.
SurjectivityReport surjectivity_report(const ControlProblem& problem,
                                       const SurjectivityOptions& options = {});

class DeficiencyError : public std::runtime_error {
 public:
  DeficiencyError(const std::string& what, SurjectivityReport report)
      : std::runtime_error(what), report_(std::move(report)) {}
  const SurjectivityReport& report() const { return report_; }

 private:
  SurjectivityReport report_;
};

struct ControlOptions {
  int max_iter = 20;
  double tol = 1e-6;       // relative to |target|
  double damping = 0.5;    // backtracking factor
  int max_halvings = 20;
  double box = 0.499;      // clamp for |lambda|
  double pinv_cutoff = 1e-10;
};

struct ControlResult {
  DeformationPath path;
  std::vector<double> residual_history;  // |L(phi_k) - target| per iterate
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Gauss-Newton on the trace map from phi = 0: SVD pseudoinverse step,
/// backtracking by `damping` until the residual decreases, projection onto the
/// admissible set. Throws NonConvergenceError (with history) and
/// DeficiencyError when G loses rank at an iterate.
ControlResult solve_control(const ControlProblem& problem,
                            const ControlOptions& options = {});

/// Clamps to |lambda| <= box and, for wave paths, limits node differences so
/// the slope stays below the bound.
Matrix project_admissible(const Matrix& coeffs, EquationKind kind, double T,
                          double box);

/// Draws lambda* uniform in [-amplitude, amplitude] (rescaled for wave slope
/// admissibility) and returns it; the target is trace_map(lambda*).
DeformationPath manufactured_path(const ControlProblem& problem,
                                  double amplitude, std::uint64_t seed);

}  // namespace shapectl
