#pragma once

#include <cstdint>

#include "shapectl/grid.hpp"

namespace shapectl {

enum class EquationKind { Heat, Wave };

/// Largest admissible |lambda_j(t)|, exclusive.
inline constexpr double kLambdaBound = 0.5;
/// Largest admissible |d lambda_j / dt| for the wave equation, exclusive.
inline constexpr double kSlopeBound = 1.0;

/// Time-dependent displacement coefficients lambda_j(t) of the nodes (0, j),
/// j = 1..N-1, over K uniform segments of [0, T].
///
/// Heat paths are piecewise constant on the segments. Wave paths are
/// continuous piecewise linear through node values at the segment midpoints
/// (k + 1/2) T / K and constant outside the first and last midpoints, so the
/// slope of the interpolant is exactly the node difference over T / K.
///
/// coeffs has one row per boundary node j (row j-1) and one column per
/// segment k.
class DeformationPath {
 public:
  /// Validates admissibility; throws AdmissibilityError otherwise.
  DeformationPath(const GridSpec& grid, EquationKind kind, double T,
                  Matrix coeffs);

  static DeformationPath zero(const GridSpec& grid, EquationKind kind,
                              double T, int K);
  /// A perturbation direction: same basis, no admissibility requirement.
  static DeformationPath direction(const GridSpec& grid, EquationKind kind,
                                   double T, Matrix coeffs);
  /// Unit coefficient on boundary node j (1-based) and time basis function k.
  static DeformationPath basis_direction(const GridSpec& grid,
                                         EquationKind kind, double T, int K,
                                         int j, int k);

  const GridSpec& grid() const { return grid_; }
  EquationKind kind() const { return kind_; }
  double T() const { return T_; }
  int K() const { return static_cast<int>(coeffs_.cols()); }
  double segment_length() const { return T_ / K(); }
  const Matrix& coeffs() const { return coeffs_; }

  /// Value of time basis function k at t; throws DomainError for t outside
  /// [0, T].
  double basis_value(int k, double t) const;
  /// All K basis values at t.
  Vector basis_values(double t) const;

  double lambda(int j, double t) const;
  /// lambda_j(t) for j = 1..N-1 (entry j-1).
  Vector lambdas(double t) const;

  double max_abs() const;
  /// Largest |coeffs[j][k+1] - coeffs[j][k]| / (T/K); 0 when K == 1.
  double max_slope() const;
  bool admissible() const;
  bool is_zero() const { return coeffs_.isZero(0.0); }

  DeformationPath scaled(double factor) const;
  /// this + factor * other, unchecked; the caller validates when needed.
  DeformationPath plus(const DeformationPath& other, double factor) const;

 private:
  struct Unchecked {};
  DeformationPath(Unchecked, const GridSpec& grid, EquationKind kind,
                  double T, Matrix coeffs);

  GridSpec grid_;
  EquationKind kind_;
  double T_;
  Matrix coeffs_;
};

/// Five-point weights at one interior node, already scaled by 1/h^2.
struct Stencil {
  double center;
  double west;
  double east;
  double south;
  double north;
};

/// Stencil of A(phi) at interior node (i, j). lambdas holds lambda_j for
/// j = 1..N-1. Off the first layer this is the classical Laplacian; on (1, j)
/// the west term is dropped (Dirichlet) and center/east follow the moved node.
Stencil stencil_at(const GridSpec& grid, const Vector& lambdas, int i, int j);

/// d/d lambda_j of the (1, j) stencil at the given base value.
Stencil stencil_derivative_at(const GridSpec& grid, double lambda, int j);

/// Throws AdmissibilityError if any |lambda_j| >= 1/2 or is not finite.
void check_lambdas(const GridSpec& grid, const Vector& lambdas);

Vector apply_laplacian(const GridSpec& grid, const Vector& u);
GridField apply_laplacian(const GridField& field);

Vector apply_perturbed(const GridSpec& grid, const Vector& lambdas,
                       const Vector& u);
GridField apply_perturbed(const GridField& field, const DeformationPath& path,
                          double t);

/// <A'(lambda), dir> u: nonzero only on the first layer.
Vector apply_derivative(const GridSpec& grid, const Vector& base_lambdas,
                        const Vector& dir, const Vector& u);

/// <A'(0), mu V_j> applied to the field.
GridField operator_derivative(int j, double mu, const GridField& field);

Matrix assemble_matrix(const GridSpec& grid);
Matrix assemble_matrix(const GridSpec& grid, const Vector& lambdas);
Matrix assemble_matrix(const DeformationPath& path, double t);
/// Matrix of <A'(lambda), dir>.
Matrix assemble_derivative(const GridSpec& grid, const Vector& base_lambdas,
                           const Vector& dir);

struct NormBoundReport {
  double max_ratio = 0.0;
  double bound = 0.0;
  int trials = 0;
  bool within_bound() const { return max_ratio <= bound; }
};

/// Largest ||A(phi(t)) f||_inf / ||f||_inf over random and sign-adversarial
/// fields f and random sample times, against the bound 28 / (3 h^2).
NormBoundReport operator_norm_bound_check(const DeformationPath& path,
                                          int trials, std::uint64_t seed);

/// ||A(lambdas) f||_inf / ||f||_inf, 0 for the zero field.
double amplification(const GridSpec& grid, const Vector& lambdas,
                     const Vector& f);

}  // namespace shapectl
