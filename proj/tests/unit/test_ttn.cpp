#include <gtest/gtest.h>

#include "attn/error.hpp"
#include "attn/ttn.hpp"

using namespace attn;

TEST(TreeShape, LayoutOfSixteenSites) {
  const TreeShape t(16);
  EXPECT_EQ(t.num_layers(), 3);
  EXPECT_EQ(t.num_nodes(), 15);
  EXPECT_EQ(t.nodes_at(0), 8);
  EXPECT_EQ(t.top(), (NodeId{3, 0}));
  EXPECT_EQ(t.lowest_node_of_site(5), (NodeId{0, 2}));
  EXPECT_EQ(t.common_ancestor({0, 1}, {0, 2}), (NodeId{2, 0}));
  EXPECT_EQ(t.path({0, 1}, {0, 2}).size(), 5u);
  for (int f = 0; f < t.num_nodes(); ++f) EXPECT_EQ(t.flat(t.node(f)), f);
  EXPECT_THROW(TreeShape(12), StructureError);
}

TEST(TreeShape, SweepOrderIsPostOrder) {
  const TreeShape t(8);
  const std::vector<NodeId> expect{{0, 0}, {0, 1}, {1, 0}, {0, 2}, {0, 3}, {1, 1}, {2, 0}};
  EXPECT_EQ(t.sweep_order(), expect);
}

TEST(Ttn, BondsSaturateAtReachableDimension) {
  const auto s = init_random_ttn(16, 2, 256, 1);
  EXPECT_EQ(s.parent_bond({0, 0}), 4u);
  EXPECT_EQ(s.parent_bond({1, 0}), 16u);
  EXPECT_EQ(s.parent_bond({2, 0}), 256u);
  EXPECT_EQ(s.parent_bond({3, 0}), 1u);
  const auto c = init_random_ttn(16, 2, 8, 1);
  EXPECT_EQ(c.parent_bond({1, 1}), 8u);
  EXPECT_EQ(c.parent_bond({0, 1}), 4u);
}

TEST(Ttn, RandomStateIsNormalizedAndIsometric) {
  const auto s = init_random_ttn(8, 2, 4, 7);
  EXPECT_NEAR(state_norm(s), 1.0, 1e-13);
  EXPECT_LT(max_isometry_deviation(s), 1e-12);
  EXPECT_NEAR(to_state_vector(s).norm(), 1.0, 1e-12);
}

TEST(Ttn, MovingTheCenterLeavesTheStateUnchanged) {
  auto s = init_random_ttn(16, 2, 6, 3);
  const Vector before = to_state_vector(s);
  for (NodeId target : {NodeId{0, 5}, NodeId{1, 0}, NodeId{0, 7}, NodeId{3, 0}}) {
    s.isometrize_towards(target);
    EXPECT_EQ(*s.isometry_center(), target);
    EXPECT_LT(max_isometry_deviation(s), 1e-12);
    EXPECT_LT((to_state_vector(s) - before).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Ttn, ProductStateIsAllZeros) {
  const auto s = init_product_ttn(8, 2, 3);
  const Vector v = to_state_vector(s);
  EXPECT_NEAR(std::abs(v(0)), 1.0, 1e-15);
  EXPECT_NEAR(v.norm(), 1.0, 1e-15);
  EXPECT_LT(max_isometry_deviation(s), 1e-15);
}

TEST(Ttn, VersionsChangeOnUpdate) {
  auto s = init_random_ttn(4, 2, 4, 1);
  const auto v0 = s.version({0, 0});
  s.isometrize_towards({0, 0});
  EXPECT_NE(s.version({0, 0}), v0);
}
