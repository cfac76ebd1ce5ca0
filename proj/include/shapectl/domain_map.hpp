#pragma once

#include "shapectl/grid.hpp"

namespace shapectl {

/// Transport matrix of the reference-domain reformulation,
///   B = |det J| J^{-1} J^{-T},  J = I + grad(phi),
/// which carries the Laplacian on the deformed domain back to the fixed one.
/// Throws SingularityError (carrying |det J|) when J is numerically singular
/// and DomainError when J is not square.
Matrix transport_matrix(const Matrix& J);

}  // namespace shapectl
