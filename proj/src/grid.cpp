#include "shapectl/grid.hpp"

#include <cmath>
#include <string>

#include "shapectl/errors.hpp"

namespace shapectl {

GridSpec::GridSpec(double a, double b, int M, int N)
    : a_(a), b_(b), M_(M), N_(N), h_(0.0) {
  if (!(std::isfinite(a) && a > 0.0) || !(std::isfinite(b) && b > 0.0)) {
    throw DomainError("grid: rectangle sides must be positive and finite");
  }
  if (M < 3 || N < 3) {
    throw DomainError("grid: M and N must be at least 3");
  }
  h_ = a / M;
  const double hy = b / N;
  if (std::abs(hy - h_) > 1e-12 * h_) {
    throw DomainError("grid: anisotropic mesh, a/M = " + std::to_string(h_) +
                      " but b/N = " + std::to_string(hy));
  }
}

NodeClass classify(const GridSpec& grid, int i, int j) {
  if (!grid.contains(i, j)) {
    throw DomainError("classify: node (" + std::to_string(i) + "," +
                      std::to_string(j) + ") outside the grid");
  }
  if (!grid.is_interior(i, j)) return NodeClass::Boundary;
  if (i == 1) return NodeClass::Layer1;
  return NodeClass::Interior;
}

GridField::GridField(const GridSpec& grid)
    : grid_(grid), values_(static_cast<std::size_t>(grid.node_count()), 0.0) {}

bool GridField::is_dirichlet() const {
  for (int i = 0; i <= grid_.M(); ++i) {
    for (int j = 0; j <= grid_.N(); ++j) {
      if (!grid_.is_interior(i, j) && (*this)(i, j) != 0.0) return false;
    }
  }
  return true;
}

Vector interior_to_vector(const GridField& field) {
  if (!field.is_dirichlet()) {
    throw ContractError("interior_to_vector: field is nonzero on the boundary");
  }
  const GridSpec& g = field.grid();
  Vector v(g.interior_size());
  for (int i = 1; i < g.M(); ++i) {
    for (int j = 1; j < g.N(); ++j) v(g.interior_index(i, j)) = field(i, j);
  }
  return v;
}

GridField vector_to_interior(const Vector& v, const GridSpec& grid) {
  if (v.size() != grid.interior_size()) {
    throw DomainError("vector_to_interior: expected length " +
                      std::to_string(grid.interior_size()) + ", got " +
                      std::to_string(v.size()));
  }
  GridField field(grid);
  for (int i = 1; i < grid.M(); ++i) {
    for (int j = 1; j < grid.N(); ++j) field(i, j) = v(grid.interior_index(i, j));
  }
  return field;
}

}  // namespace shapectl
