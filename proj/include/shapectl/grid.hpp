#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

namespace shapectl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Uniform discretization of the rectangle [0,a]x[0,b] with nodes (ih, jh),
/// 0 <= i <= M, 0 <= j <= N. The edge x = 0 is the deformable one.
///
/// Interior vectors are ordered column by column in i:
///   k = (i - 1)(N - 1) + (j - 1),  1 <= i <= M-1, 1 <= j <= N-1.
class GridSpec {
 public:
  /// Throws DomainError unless a, b > 0, M, N >= 3 and b/N == a/M.
  GridSpec(double a, double b, int M, int N);

  double a() const { return a_; }
  double b() const { return b_; }
  int M() const { return M_; }
  int N() const { return N_; }
  double h() const { return h_; }

  int node_count() const { return (M_ + 1) * (N_ + 1); }
  int interior_size() const { return (M_ - 1) * (N_ - 1); }
  /// Number of nodes in the first interior layer (1, j).
  int layer_size() const { return N_ - 1; }

  bool contains(int i, int j) const {
    return i >= 0 && i <= M_ && j >= 0 && j <= N_;
  }
  bool is_interior(int i, int j) const {
    return i >= 1 && i <= M_ - 1 && j >= 1 && j <= N_ - 1;
  }

  /// Row-major node storage, j fastest.
  int node_index(int i, int j) const { return i * (N_ + 1) + j; }
  /// Position in interior vectors; requires an interior node.
  int interior_index(int i, int j) const {
    return (i - 1) * (N_ - 1) + (j - 1);
  }

  bool operator==(const GridSpec& other) const = default;

 private:
  double a_;
  double b_;
  int M_;
  int N_;
  double h_;
};

enum class NodeClass { Interior, Boundary, Layer1 };

/// Layer1 nodes are interior nodes too; `is_interior_class` treats them so.
NodeClass classify(const GridSpec& grid, int i, int j);

inline bool is_interior_class(NodeClass c) { return c != NodeClass::Boundary; }

/// Scalar values on every node of the grid.
class GridField {
 public:
  explicit GridField(const GridSpec& grid);

  const GridSpec& grid() const { return grid_; }

  double operator()(int i, int j) const {
    return values_[grid_.node_index(i, j)];
  }
  double& operator()(int i, int j) { return values_[grid_.node_index(i, j)]; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  /// True when every boundary node holds exactly zero.
  bool is_dirichlet() const;

 private:
  GridSpec grid_;
  std::vector<double> values_;
};

/// Throws ContractError when the field is not Dirichlet.
Vector interior_to_vector(const GridField& field);

/// Boundary filled with zeros. Throws DomainError on length mismatch.
GridField vector_to_interior(const Vector& v, const GridSpec& grid);

}  // namespace shapectl
