#pragma once

// Time-stepping kernels shared by the forward, linearized and adjoint solvers.

#include <Eigen/LU>

#include "shapectl/grid.hpp"
#include "shapectl/operators.hpp"

namespace shapectl::detail {

/// One Crank-Nicolson step with the operator frozen over the step:
///   (I + dt/2 B) x_new = (I - dt/2 B) x + dt * rhs,
/// where B = A(lambdas), or its transpose. Factorizations are cached for the
/// last coefficient vector, which covers piecewise-constant paths.
class CrankNicolsonStepper {
 public:
  CrankNicolsonStepper(const GridSpec& grid, double dt, bool transpose = false)
      : grid_(grid), dt_(dt), transpose_(transpose) {}

  Vector step(const Vector& lambdas, const Vector& x, const Vector& rhs) {
    prepare(lambdas);
    return lu_.solve(x - 0.5 * dt_ * (op_ * x) + dt_ * rhs);
  }

  Vector step(const Vector& lambdas, const Vector& x) {
    prepare(lambdas);
    return lu_.solve(x - 0.5 * dt_ * (op_ * x));
  }

 private:
  void prepare(const Vector& lambdas) {
    if (ready_ && lambdas == lambdas_) return;
    lambdas_ = lambdas;
    op_ = assemble_matrix(grid_, lambdas);
    if (transpose_) op_.transposeInPlace();
    const int n = grid_.interior_size();
    lu_.compute(Matrix::Identity(n, n) + 0.5 * dt_ * op_);
    ready_ = true;
  }

  GridSpec grid_;
  double dt_;
  bool transpose_;
  bool ready_ = false;
  Vector lambdas_;
  Matrix op_;
  Eigen::PartialPivLU<Matrix> lu_;
};

}  // namespace shapectl::detail
