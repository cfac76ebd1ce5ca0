#include "shapectl/control.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/SVD>

#include "shapectl/errors.hpp"
#include "shapectl/sensitivity.hpp"

namespace shapectl {

ForwardSetup ControlProblem::aligned_setup() const {
  ForwardSetup s = setup;
  s.steps = aligned_steps(setup.steps, K);
  return s;
}

DeformationPath ControlProblem::zero_path() const {
  return DeformationPath::zero(setup.grid, setup.kind, setup.T, K);
}

DeformationPath ControlProblem::basis(int j, int k) const {
  return DeformationPath::basis_direction(setup.grid, setup.kind, setup.T, K, j, k);
}

void validate(const ControlProblem& problem) {
  const ForwardSetup& s = problem.setup;
  const int n = s.grid.interior_size();
  if (problem.K < 1) throw DomainError("control problem: K must be >= 1");
  if (s.steps < 1) throw DomainError("control problem: steps must be >= 1");
  if (!(s.T > 0.0)) throw DomainError("control problem: T must be positive");
  if (s.u0.size() != n) throw DomainError("control problem: u0 has wrong length");
  if (s.kind == EquationKind::Wave && s.u1.size() != n) {
    throw DomainError("control problem: u1 has wrong length");
  }
  if (problem.target.size() != problem.state_dim()) {
    throw DomainError("control problem: target has length " +
                      std::to_string(problem.target.size()) + ", expected " +
                      std::to_string(problem.state_dim()));
  }
}

Vector trace_map(const DeformationPath& path, const ControlProblem& problem) {
  if (path.K() != problem.K) {
    throw ContractError("trace_map: path has " + std::to_string(path.K()) +
                        " segments, problem expects " + std::to_string(problem.K));
  }
  if (!path.admissible()) {
    throw AdmissibilityError("trace_map: deformation path is not admissible");
  }
  return simulate(problem.aligned_setup(), path).final_state();
}

namespace {

Vector singular_values_of(const Matrix& G) {
  if (G.size() == 0) return Vector();
  return Eigen::BDCSVD<Matrix>(G).singularValues();
}

}  // namespace

ControlMapMatrix assemble_control_map(const ControlProblem& problem,
                                      const DeformationPath& base,
                                      const StateTrajectory& base_traj) {
  const GridSpec& g = problem.setup.grid;
  ControlMapMatrix out;
  out.K = problem.K;
  out.G.resize(problem.state_dim(), problem.control_dim());
  for (int j = 1; j <= g.layer_size(); ++j) {
    for (int k = 0; k < problem.K; ++k) {
      const LinearizedState v = gateaux(base, problem.basis(j, k), base_traj);
      out.G.col((j - 1) * problem.K + k) = v.trajectory.final_state();
    }
  }
  out.sigma = singular_values_of(out.G);
  return out;
}

ControlMapMatrix assemble_control_map(const ControlProblem& problem) {
  validate(problem);
  const DeformationPath zero = problem.zero_path();
  return assemble_control_map(problem, zero, simulate(problem.aligned_setup(), zero));
}

Vector adjoint_transpose_apply(const ControlProblem& problem, const Vector& c) {
  validate(problem);
  const ForwardSetup s = problem.aligned_setup();
  const DeformationPath zero = problem.zero_path();
  const StateTrajectory ref = simulate(s, zero);
  const AdjointTrajectory X = solve_adjoint(s.kind, c, s.T, s.steps, s.grid);
  // <-A'(0)[mu V_j] u_0, X> = -mu g_j.
  const Layer1Pairing pairing = layer1_pairing(X, ref);
  Vector out = Vector::Zero(problem.control_dim());
  for (std::size_t n = 0; n + 1 < ref.times.size(); ++n) {
    const double t0 = ref.times[n];
    const double t1 = ref.times[n + 1];
    const Vector b = zero.basis_values(0.5 * (t0 + t1));
    const Eigen::Index r = static_cast<Eigen::Index>(n);
    for (int j = 0; j < s.grid.layer_size(); ++j) {
      const double avg = 0.5 * (pairing.g(r, j) + pairing.g(r + 1, j));
      for (int k = 0; k < problem.K; ++k) {
        out(j * problem.K + k) -= (t1 - t0) * avg * b(k);
      }
    }
  }
  return out;
}

namespace {

void fill_svd(SurjectivityReport& report, const ControlMapMatrix& map) {
  report.rows = static_cast<int>(map.G.rows());
  report.cols = static_cast<int>(map.G.cols());
  report.singular_values.assign(map.sigma.data(), map.sigma.data() + map.sigma.size());
  report.sigma_max = map.sigma_max();
  report.sigma_min = map.sigma_min();
  report.condition = report.sigma_min > 0.0
                         ? report.sigma_max / report.sigma_min
                         : std::numeric_limits<double>::infinity();
  report.svd_surjective = report.cols >= report.rows && report.sigma_max > 0.0 &&
                          report.sigma_min > report.rank_tolerance * report.sigma_max;
  report.verdict = report.svd_surjective ? "surjective" : "deficient";
}

}  // namespace

SurjectivityReport surjectivity_report(const ControlProblem& problem,
                                       const SurjectivityOptions& options) {
  validate(problem);
  SurjectivityReport report;
  report.kind = problem.setup.kind;
  report.rank_tolerance = options.rank_tolerance;

  const DeformationPath zero = problem.zero_path();
  const StateTrajectory ref = simulate(problem.aligned_setup(), zero);
  fill_svd(report, assemble_control_map(problem, zero, ref));

  report.ndd = check_ndd(ref);
  report.unique_continuation =
      unique_continuation_check(ref, report.ndd, options.uc_trials, options.seed);
  report.uc_surjective = report.unique_continuation.certified;
  report.agree = report.uc_surjective == report.svd_surjective;
  return report;
}

Matrix project_admissible(const Matrix& coeffs, EquationKind kind, double T,
                          double box) {
  Matrix out = coeffs.cwiseMax(-box).cwiseMin(box);
  if (kind == EquationKind::Wave && out.cols() > 1) {
    const double max_step = 0.999 * kSlopeBound * T / static_cast<double>(out.cols());
    for (Eigen::Index j = 0; j < out.rows(); ++j) {
      for (Eigen::Index k = 1; k < out.cols(); ++k) {
        out(j, k) = std::clamp(out(j, k), out(j, k - 1) - max_step,
                               out(j, k - 1) + max_step);
        out(j, k) = std::clamp(out(j, k), -box, box);
      }
    }
  }
  return out;
}

namespace {

Vector pseudoinverse_step(const Matrix& G, const Vector& r, double cutoff) {
  const Eigen::BDCSVD<Matrix> svd(G, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sigma = svd.singularValues();
  Vector step = Vector::Zero(G.cols());
  if (sigma.size() == 0 || sigma(0) == 0.0) return step;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) <= cutoff * sigma(0)) break;
    step += svd.matrixV().col(i) * (svd.matrixU().col(i).dot(r) / sigma(i));
  }
  return step;
}

Matrix as_coeffs(const Vector& flat, int rows, int K) {
  Matrix c(rows, K);
  for (int j = 0; j < rows; ++j) {
    for (int k = 0; k < K; ++k) c(j, k) = flat(j * K + k);
  }
  return c;
}

}  // namespace

ControlResult solve_control(const ControlProblem& problem,
                            const ControlOptions& options) {
  validate(problem);
  const ForwardSetup setup = problem.aligned_setup();
  const GridSpec& g = setup.grid;
  const double target_norm = problem.target.norm();
  const double goal = options.tol * (target_norm > 0.0 ? target_norm : 1.0);

  DeformationPath path = problem.zero_path();
  StateTrajectory traj = simulate(setup, path);
  double residual = (traj.final_state() - problem.target).norm();
  ControlResult result{path, {residual}, 0, 0.0};

  for (int iter = 0; residual > goal; ++iter) {
    if (iter >= options.max_iter) {
      throw NonConvergenceError("solve_control: no convergence in " +
                                    std::to_string(options.max_iter) + " iterations",
                                result.residual_history);
    }
    const ControlMapMatrix map = assemble_control_map(problem, path, traj);
    const int full_rank = static_cast<int>(std::min(map.G.rows(), map.G.cols()));
    int rank = 0;
    for (Eigen::Index i = 0; i < map.sigma.size(); ++i) {
      if (map.sigma(i) > options.pinv_cutoff * map.sigma_max()) ++rank;
    }
    if (map.sigma_max() == 0.0 || rank < full_rank) {
      SurjectivityReport report;
      report.kind = setup.kind;
      fill_svd(report, map);
      report.ndd = check_ndd(traj);
      throw DeficiencyError("solve_control: control map has rank " +
                                std::to_string(rank) + " < " + std::to_string(full_rank) +
                                " at iteration " + std::to_string(iter),
                            std::move(report));
    }

    const Vector delta = pseudoinverse_step(map.G, problem.target - traj.final_state(),
                                            options.pinv_cutoff);
    const Matrix step = as_coeffs(delta, g.layer_size(), problem.K);
    double alpha = 1.0;
    bool accepted = false;
    for (int halving = 0; halving <= options.max_halvings; ++halving) {
      const Matrix trial_coeffs = project_admissible(
          path.coeffs() + alpha * step, setup.kind, setup.T, options.box);
      DeformationPath trial(g, setup.kind, setup.T, trial_coeffs);
      StateTrajectory trial_traj = simulate(setup, trial);
      const double trial_residual = (trial_traj.final_state() - problem.target).norm();
      if (trial_residual < residual) {
        path = std::move(trial);
        traj = std::move(trial_traj);
        residual = trial_residual;
        accepted = true;
        break;
      }
      alpha *= options.damping;
    }
    if (!accepted) {
      throw NonConvergenceError("solve_control: line search stalled at iteration " +
                                    std::to_string(iter),
                                result.residual_history);
    }
    result.residual_history.push_back(residual);
    result.iterations = iter + 1;
  }
  result.path = path;
  result.relative_residual = target_norm > 0.0 ? residual / target_norm : residual;
  return result;
}

DeformationPath manufactured_path(const ControlProblem& problem,
                                  double amplitude, std::uint64_t seed) {
  const GridSpec& g = problem.setup.grid;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-amplitude, amplitude);
  Matrix c(g.layer_size(), problem.K);
  for (int j = 0; j < g.layer_size(); ++j) {
    for (int k = 0; k < problem.K; ++k) c(j, k) = dist(rng);
  }
  DeformationPath candidate =
      DeformationPath::direction(g, problem.setup.kind, problem.setup.T, c);
  if (problem.setup.kind == EquationKind::Wave &&
      candidate.max_slope() >= 0.9 * kSlopeBound) {
    candidate = candidate.scaled(0.9 * kSlopeBound / candidate.max_slope());
  }
  return DeformationPath(g, problem.setup.kind, problem.setup.T, candidate.coeffs());
}

}  // namespace shapectl
