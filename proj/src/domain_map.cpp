#include "shapectl/domain_map.hpp"

#include <cmath>
#include <string>

#include <Eigen/LU>

#include "shapectl/errors.hpp"

namespace shapectl {

Matrix transport_matrix(const Matrix& J) {
  if (J.rows() != J.cols() || J.rows() == 0) {
    throw DomainError("transport_matrix: Jacobian must be square");
  }
  if (!J.allFinite()) {
    throw DomainError("transport_matrix: non-finite Jacobian entry");
  }
  const Eigen::FullPivLU<Matrix> lu(J);
  const double abs_det = std::abs(lu.determinant());
  const double scale = std::pow(J.cwiseAbs().maxCoeff(), J.rows());
  if (!lu.isInvertible() || abs_det <= 1e-13 * scale) {
    throw SingularityError(
        "transport_matrix: singular Jacobian, |det J| = " + std::to_string(abs_det),
        abs_det);
  }
  const Matrix inv = lu.inverse();
  Matrix B = abs_det * (inv * inv.transpose());
  // Symmetric by construction; remove the rounding asymmetry of the product.
  B = 0.5 * (B + B.transpose()).eval();
  return B;
}

}  // namespace shapectl
