#include "shapectl/grid.hpp"

#include <gtest/gtest.h>

#include "shapectl/errors.hpp"

namespace shapectl {
namespace {

TEST(GridSpec, MeshWidthAndCounts) {
  const GridSpec g(1.0, 1.0, 4, 4);
  EXPECT_EQ(g.h(), 0.25);
  EXPECT_EQ(g.interior_size(), 9);
  EXPECT_EQ(g.layer_size(), 3);
  EXPECT_EQ(g.node_count(), 25);

  const GridSpec rect(2.0, 1.0, 8, 4);
  EXPECT_EQ(rect.h(), 0.25);
  EXPECT_EQ(rect.interior_size(), 21);
}

TEST(GridSpec, RejectsBadInput) {
  EXPECT_THROW(GridSpec(1.0, 1.0, 4, 5), DomainError);  // anisotropic
  EXPECT_THROW(GridSpec(1.0, 1.0, 2, 2), DomainError);
  EXPECT_THROW(GridSpec(0.0, 1.0, 4, 4), DomainError);
  EXPECT_THROW(GridSpec(-1.0, -1.0, 4, 4), DomainError);
}

TEST(GridSpec, InteriorOrderingIsColumnMajorInI) {
  const GridSpec g(1.0, 1.0, 4, 4);
  EXPECT_EQ(g.interior_index(1, 1), 0);
  EXPECT_EQ(g.interior_index(1, 3), 2);
  EXPECT_EQ(g.interior_index(2, 1), 3);
  EXPECT_EQ(g.interior_index(3, 3), 8);
  EXPECT_EQ(g.node_index(0, 0), 0);
  EXPECT_EQ(g.node_index(1, 0), 5);
}

TEST(Classify, Categories) {
  const GridSpec g(1.0, 1.0, 4, 4);
  EXPECT_EQ(classify(g, 0, 2), NodeClass::Boundary);
  EXPECT_EQ(classify(g, 4, 4), NodeClass::Boundary);
  EXPECT_EQ(classify(g, 2, 0), NodeClass::Boundary);
  EXPECT_EQ(classify(g, 1, 2), NodeClass::Layer1);
  EXPECT_EQ(classify(g, 2, 2), NodeClass::Interior);
  EXPECT_TRUE(is_interior_class(NodeClass::Layer1));
  EXPECT_FALSE(is_interior_class(NodeClass::Boundary));
  EXPECT_THROW(classify(g, 5, 0), DomainError);
  EXPECT_THROW(classify(g, 0, -1), DomainError);
}

TEST(GridField, RoundTripThroughInteriorVector) {
  const GridSpec g(1.0, 1.0, 4, 4);
  Vector v(9);
  for (int k = 0; k < 9; ++k) v(k) = k + 1.0;
  const GridField f = vector_to_interior(v, g);
  EXPECT_TRUE(f.is_dirichlet());
  EXPECT_EQ(f(2, 1), 4.0);
  EXPECT_EQ(f(0, 1), 0.0);
  EXPECT_EQ(interior_to_vector(f), v);
}

TEST(GridField, ContractViolations) {
  const GridSpec g(1.0, 1.0, 4, 4);
  GridField f(g);
  f(0, 2) = 1.0;
  EXPECT_FALSE(f.is_dirichlet());
  EXPECT_THROW(interior_to_vector(f), ContractError);
  EXPECT_THROW(vector_to_interior(Vector::Zero(8), g), DomainError);
}

}  // namespace
}  // namespace shapectl
