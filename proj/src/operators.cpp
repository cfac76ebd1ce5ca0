#include "shapectl/operators.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "shapectl/errors.hpp"

namespace shapectl {

namespace {

double time_tolerance(double T) { return 1e-12 * T; }

void check_path_shape(const GridSpec& grid, double T, const Matrix& coeffs) {
  if (!(std::isfinite(T) && T > 0.0)) {
    throw DomainError("deformation path: horizon T must be positive");
  }
  if (coeffs.rows() != grid.layer_size()) {
    throw DomainError("deformation path: expected " +
                      std::to_string(grid.layer_size()) +
                      " rows of coefficients, got " +
                      std::to_string(coeffs.rows()));
  }
  if (coeffs.cols() < 1) {
    throw DomainError("deformation path: need at least one time segment");
  }
  if (!coeffs.allFinite()) {
    throw AdmissibilityError("deformation path: non-finite coefficient");
  }
}

}  // namespace

DeformationPath::DeformationPath(Unchecked, const GridSpec& grid,
                                 EquationKind kind, double T, Matrix coeffs)
    : grid_(grid), kind_(kind), T_(T), coeffs_(std::move(coeffs)) {
  check_path_shape(grid_, T_, coeffs_);
}

DeformationPath::DeformationPath(const GridSpec& grid, EquationKind kind,
                                 double T, Matrix coeffs)
    : DeformationPath(Unchecked{}, grid, kind, T, std::move(coeffs)) {
  if (max_abs() >= kLambdaBound) {
    throw AdmissibilityError("deformation path: max |lambda| = " +
                             std::to_string(max_abs()) + " must be < 1/2");
  }
  if (kind_ == EquationKind::Wave && max_slope() >= kSlopeBound) {
    throw AdmissibilityError("deformation path: max |d lambda/dt| = " +
                             std::to_string(max_slope()) + " must be < 1");
  }
}

DeformationPath DeformationPath::zero(const GridSpec& grid, EquationKind kind,
                                      double T, int K) {
  if (K < 1) throw DomainError("deformation path: K must be >= 1");
  return DeformationPath(grid, kind, T, Matrix::Zero(grid.layer_size(), K));
}

DeformationPath DeformationPath::direction(const GridSpec& grid,
                                           EquationKind kind, double T,
                                           Matrix coeffs) {
  return DeformationPath(Unchecked{}, grid, kind, T, std::move(coeffs));
}

DeformationPath DeformationPath::basis_direction(const GridSpec& grid,
                                                 EquationKind kind, double T,
                                                 int K, int j, int k) {
  if (j < 1 || j > grid.layer_size() || k < 0 || k >= K) {
    throw DomainError("basis_direction: (j, k) out of range");
  }
  Matrix c = Matrix::Zero(grid.layer_size(), K);
  c(j - 1, k) = 1.0;
  return direction(grid, kind, T, std::move(c));
}

double DeformationPath::basis_value(int k, double t) const {
  const double tol = time_tolerance(T_);
  if (!(t >= -tol && t <= T_ + tol)) {
    throw DomainError("deformation path: time " + std::to_string(t) +
                      " outside [0, T]");
  }
  const int nseg = K();
  const double len = segment_length();
  if (kind_ == EquationKind::Heat) {
    int seg = static_cast<int>(std::floor(t / len));
    seg = std::clamp(seg, 0, nseg - 1);
    return seg == k ? 1.0 : 0.0;
  }
  if (nseg == 1) return 1.0;
  // Hat functions through the segment midpoints.
  const double s = t / len - 0.5;
  if (s <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (s >= nseg - 1) return k == nseg - 1 ? 1.0 : 0.0;
  const int left = static_cast<int>(std::floor(s));
  const double w = s - left;
  if (k == left) return 1.0 - w;
  if (k == left + 1) return w;
  return 0.0;
}

Vector DeformationPath::basis_values(double t) const {
  Vector b(K());
  for (int k = 0; k < K(); ++k) b(k) = basis_value(k, t);
  return b;
}

double DeformationPath::lambda(int j, double t) const {
  if (j < 1 || j > grid_.layer_size()) {
    throw DomainError("deformation path: boundary index out of range");
  }
  return coeffs_.row(j - 1).dot(basis_values(t));
}

Vector DeformationPath::lambdas(double t) const {
  return coeffs_ * basis_values(t);
}

double DeformationPath::max_abs() const { return coeffs_.cwiseAbs().maxCoeff(); }

double DeformationPath::max_slope() const {
  if (K() < 2) return 0.0;
  const Matrix diff =
      coeffs_.rightCols(K() - 1) - coeffs_.leftCols(K() - 1);
  return diff.cwiseAbs().maxCoeff() / segment_length();
}

bool DeformationPath::admissible() const {
  if (max_abs() >= kLambdaBound) return false;
  return kind_ != EquationKind::Wave || max_slope() < kSlopeBound;
}

DeformationPath DeformationPath::scaled(double factor) const {
  return DeformationPath(Unchecked{}, grid_, kind_, T_, factor * coeffs_);
}

DeformationPath DeformationPath::plus(const DeformationPath& other,
                                      double factor) const {
  if (other.coeffs_.rows() != coeffs_.rows() ||
      other.coeffs_.cols() != coeffs_.cols()) {
    throw DomainError("deformation path: basis mismatch");
  }
  return DeformationPath(Unchecked{}, grid_, kind_, T_,
                         coeffs_ + factor * other.coeffs_);
}

void check_lambdas(const GridSpec& grid, const Vector& lambdas) {
  if (lambdas.size() != grid.layer_size()) {
    throw DomainError("expected " + std::to_string(grid.layer_size()) +
                      " boundary coefficients");
  }
  for (int k = 0; k < lambdas.size(); ++k) {
    if (!std::isfinite(lambdas(k)) || std::abs(lambdas(k)) >= kLambdaBound) {
      throw AdmissibilityError("lambda_" + std::to_string(k + 1) + " = " +
                               std::to_string(lambdas(k)) +
                               " violates |lambda| < 1/2");
    }
  }
}

Stencil stencil_at(const GridSpec& grid, const Vector& lambdas, int i, int j) {
  const double inv_h2 = 1.0 / (grid.h() * grid.h());
  if (i == 1) {
    const double lam = lambdas(j - 1);
    return {2.0 * (1.0 + 1.0 / (1.0 + lam)) * inv_h2, 0.0,
            -(2.0 / (2.0 + lam)) * inv_h2, -inv_h2, -inv_h2};
  }
  return {4.0 * inv_h2, -inv_h2, -inv_h2, -inv_h2, -inv_h2};
}

Stencil stencil_derivative_at(const GridSpec& grid, double lambda, int /*j*/) {
  const double inv_h2 = 1.0 / (grid.h() * grid.h());
  const double p = 1.0 + lambda;
  const double q = 2.0 + lambda;
  return {-2.0 / (p * p) * inv_h2, 0.0, 2.0 / (q * q) * inv_h2, 0.0, 0.0};
}

namespace {

template <class StencilFn>
Vector apply_stencil(const GridSpec& grid, const Vector& u, StencilFn&& at) {
  if (u.size() != grid.interior_size()) {
    throw DomainError("operator: expected interior vector of length " +
                      std::to_string(grid.interior_size()));
  }
  const int M = grid.M();
  const int N = grid.N();
  Vector out(u.size());
  auto value = [&](int i, int j) {
    return grid.is_interior(i, j) ? u(grid.interior_index(i, j)) : 0.0;
  };
  for (int i = 1; i < M; ++i) {
    for (int j = 1; j < N; ++j) {
      const Stencil s = at(i, j);
      out(grid.interior_index(i, j)) =
          s.center * value(i, j) + s.west * value(i - 1, j) +
          s.east * value(i + 1, j) + s.south * value(i, j - 1) +
          s.north * value(i, j + 1);
    }
  }
  return out;
}

GridField interior_field(const Vector& v, const GridSpec& grid) {
  return vector_to_interior(v, grid);
}

Vector dirichlet_interior(const GridField& field, const char* who) {
  if (!field.is_dirichlet()) {
    throw ContractError(std::string(who) +
                        ": field must vanish on the boundary");
  }
  return interior_to_vector(field);
}

}  // namespace

Vector apply_laplacian(const GridSpec& grid, const Vector& u) {
  const Vector zero = Vector::Zero(grid.layer_size());
  return apply_stencil(grid, u,
                       [&](int i, int j) { return stencil_at(grid, zero, i, j); });
}

GridField apply_laplacian(const GridField& field) {
  const GridSpec& g = field.grid();
  return interior_field(apply_laplacian(g, dirichlet_interior(field, "apply_laplacian")), g);
}

Vector apply_perturbed(const GridSpec& grid, const Vector& lambdas,
                       const Vector& u) {
  check_lambdas(grid, lambdas);
  return apply_stencil(grid, u, [&](int i, int j) {
    return stencil_at(grid, lambdas, i, j);
  });
}

GridField apply_perturbed(const GridField& field, const DeformationPath& path,
                          double t) {
  const GridSpec& g = field.grid();
  if (!(path.grid() == g)) throw ContractError("apply_perturbed: grid mismatch");
  const Vector u = dirichlet_interior(field, "apply_perturbed");
  return interior_field(apply_perturbed(g, path.lambdas(t), u), g);
}

Vector apply_derivative(const GridSpec& grid, const Vector& base_lambdas,
                        const Vector& dir, const Vector& u) {
  if (dir.size() != grid.layer_size() ||
      base_lambdas.size() != grid.layer_size()) {
    throw DomainError("apply_derivative: coefficient length mismatch");
  }
  if (u.size() != grid.interior_size()) {
    throw DomainError("apply_derivative: interior length mismatch");
  }
  Vector out = Vector::Zero(u.size());
  for (int j = 1; j < grid.N(); ++j) {
    const double mu = dir(j - 1);
    if (mu == 0.0) continue;
    const Stencil d = stencil_derivative_at(grid, base_lambdas(j - 1), j);
    out(grid.interior_index(1, j)) =
        mu * (d.center * u(grid.interior_index(1, j)) +
              d.east * u(grid.interior_index(2, j)));
  }
  return out;
}

GridField operator_derivative(int j, double mu, const GridField& field) {
  const GridSpec& g = field.grid();
  if (j < 1 || j > g.layer_size()) {
    throw DomainError("operator_derivative: direction j = " +
                      std::to_string(j) + " out of range 1.." +
                      std::to_string(g.layer_size()));
  }
  const Vector u = dirichlet_interior(field, "operator_derivative");
  Vector dir = Vector::Zero(g.layer_size());
  dir(j - 1) = mu;
  return interior_field(
      apply_derivative(g, Vector::Zero(g.layer_size()), dir, u), g);
}

Matrix assemble_matrix(const GridSpec& grid) {
  return assemble_matrix(grid, Vector::Zero(grid.layer_size()));
}

Matrix assemble_matrix(const GridSpec& grid, const Vector& lambdas) {
  check_lambdas(grid, lambdas);
  const int n = grid.interior_size();
  Matrix A = Matrix::Zero(n, n);
  for (int i = 1; i < grid.M(); ++i) {
    for (int j = 1; j < grid.N(); ++j) {
      const int row = grid.interior_index(i, j);
      const Stencil s = stencil_at(grid, lambdas, i, j);
      A(row, row) = s.center;
      if (grid.is_interior(i - 1, j)) A(row, grid.interior_index(i - 1, j)) = s.west;
      if (grid.is_interior(i + 1, j)) A(row, grid.interior_index(i + 1, j)) = s.east;
      if (grid.is_interior(i, j - 1)) A(row, grid.interior_index(i, j - 1)) = s.south;
      if (grid.is_interior(i, j + 1)) A(row, grid.interior_index(i, j + 1)) = s.north;
    }
  }
  return A;
}

Matrix assemble_matrix(const DeformationPath& path, double t) {
  return assemble_matrix(path.grid(), path.lambdas(t));
}

Matrix assemble_derivative(const GridSpec& grid, const Vector& base_lambdas,
                           const Vector& dir) {
  const int n = grid.interior_size();
  Matrix D = Matrix::Zero(n, n);
  for (int j = 1; j < grid.N(); ++j) {
    const Stencil d = stencil_derivative_at(grid, base_lambdas(j - 1), j);
    const int row = grid.interior_index(1, j);
    D(row, row) = dir(j - 1) * d.center;
    D(row, grid.interior_index(2, j)) = dir(j - 1) * d.east;
  }
  return D;
}

double amplification(const GridSpec& grid, const Vector& lambdas,
                     const Vector& f) {
  const double norm = f.lpNorm<Eigen::Infinity>();
  if (norm == 0.0) return 0.0;
  return apply_perturbed(grid, lambdas, f).lpNorm<Eigen::Infinity>() / norm;
}

NormBoundReport operator_norm_bound_check(const DeformationPath& path,
                                          int trials, std::uint64_t seed) {
  const GridSpec& g = path.grid();
  const double h2 = g.h() * g.h();
  NormBoundReport report;
  report.bound = 28.0 / (3.0 * h2);
  report.trials = trials;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> when(0.0, path.T());
  std::bernoulli_distribution coin(0.5);

  for (int trial = 0; trial < trials; ++trial) {
    const Vector lambdas = path.lambdas(when(rng));
    Vector f(g.interior_size());
    for (int k = 0; k < f.size(); ++k) f(k) = unit(rng);
    if (trial % 2 == 1) {
      // Signs that make every term of one layer-1 row add up.
      const int j = 1 + static_cast<int>(trial / 2) % g.layer_size();
      const double s = coin(rng) ? 1.0 : -1.0;
      f(g.interior_index(1, j)) = s;
      f(g.interior_index(2, j)) = -s;
      if (j > 1) f(g.interior_index(1, j - 1)) = -s;
      if (j < g.N() - 1) f(g.interior_index(1, j + 1)) = -s;
    }
    const double scale = f.lpNorm<Eigen::Infinity>();
    if (scale > 0.0) f /= scale;
    report.max_ratio = std::max(report.max_ratio, amplification(g, lambdas, f));
  }
  return report;
}

}  // namespace shapectl
