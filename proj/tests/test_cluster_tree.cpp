#include <gtest/gtest.h>

#include <cmath>

#include "hssfun/cluster_tree.hpp"

using namespace hssfun;

namespace {

std::vector<Index> leaf_sizes(const ClusterTree& t) {
  std::vector<Index> s;
  for (const Range& r : t.leaf_ranges()) s.push_back(r.size());
  return s;
}

void expect_partition(const ClusterTree& t) {
  for (int l = 0; l <= t.depth(); ++l) {
    Index cursor = 0;
    const auto nodes = t.nodes_at_depth(l);
    EXPECT_EQ(static_cast<Index>(nodes.size()), Index{1} << l);
    for (Index i : nodes) {
      EXPECT_EQ(t.range(i).lo, cursor);
      cursor = t.range(i).hi;
    }
    EXPECT_EQ(cursor, t.size());
  }
}

}  // namespace

TEST(BuildTree, PowerOfTwoSplit) {
  const auto t = build_tree(8, 2);
  EXPECT_EQ(t.depth(), 2);
  const std::vector<Range> want{{0, 2}, {2, 4}, {4, 6}, {6, 8}};
  EXPECT_EQ(t.leaf_ranges(), want);
}

TEST(BuildTree, ThresholdOf256) {
  const auto t = build_tree(1024, 256);
  EXPECT_EQ(t.depth(), 2);
  EXPECT_EQ(leaf_sizes(t), (std::vector<Index>{256, 256, 256, 256}));
}

TEST(BuildTree, LeftHeavyUnevenSplit) {
  const auto t = build_tree(7, 2);
  EXPECT_EQ(t.depth(), 2);
  EXPECT_EQ(leaf_sizes(t), (std::vector<Index>{2, 2, 2, 1}));
}

TEST(BuildTree, SingleIndexHasDepthZero) {
  const auto t = build_tree(1, 5);
  EXPECT_EQ(t.depth(), 0);
  EXPECT_EQ(t.range(0), (Range{0, 1}));
}

TEST(BuildTree, DepthFormulaAndPartition) {
  for (Index n : {1, 2, 3, 5, 17, 100, 257, 1000, 1024, 4099})
    for (Index t : {1, 2, 3, 7, 64, 256}) {
      const auto tr = build_tree(n, t);
      const int want = std::max(0, static_cast<int>(std::ceil(std::log2(static_cast<double>(n) / t) - 1e-12)));
      EXPECT_EQ(tr.depth(), want) << n << " " << t;
      for (Index s : leaf_sizes(tr)) EXPECT_LE(s, t);
      expect_partition(tr);
    }
}

TEST(BuildTree, RejectsNonPositive) {
  EXPECT_THROW(build_tree(0, 2), std::invalid_argument);
  EXPECT_THROW(build_tree(4, 0), std::invalid_argument);
}

TEST(BalancedTree, DepthZero) {
  const auto t = build_balanced_tree(3, 0);
  EXPECT_EQ(t.node_count(), 1);
  EXPECT_EQ(t.range(0), (Range{0, 3}));
}

TEST(BalancedTree, TwoLevels) {
  const auto t = build_balanced_tree(2, 2);
  const std::vector<Range> want{{0, 2}, {2, 4}, {4, 6}, {6, 8}};
  EXPECT_EQ(t.leaf_ranges(), want);
}

TEST(BalancedTree, EightLeavesOfTen) {
  const auto t = build_balanced_tree(10, 3);
  EXPECT_EQ(t.leaf_count(), 8);
  EXPECT_EQ(leaf_sizes(t), std::vector<Index>(8, 10));
  EXPECT_EQ(t.node_count(), 15);
  expect_partition(t);
}

TEST(NodesAtDepth, RootAndLeaves) {
  const auto t = build_tree(16, 4);
  ASSERT_EQ(t.depth(), 2);
  EXPECT_EQ(t.nodes_at_depth(0), (std::vector<Index>{0}));
  const auto leaves = t.nodes_at_depth(2);
  ASSERT_EQ(leaves.size(), 4u);
  for (std::size_t k = 1; k < leaves.size(); ++k) EXPECT_LT(t.range(leaves[k - 1]).lo, t.range(leaves[k]).lo);
}

TEST(NodesAtDepth, InternalNodesOfDepthThree) {
  const auto t = build_tree(64, 8);
  ASSERT_EQ(t.depth(), 3);
  const auto nodes = t.nodes_at_depth(2);
  ASSERT_EQ(nodes.size(), 4u);
  for (Index i : nodes) EXPECT_FALSE(t.is_leaf(i));
}

TEST(NodesAtDepth, OutOfRange) {
  const auto t = build_tree(16, 4);
  EXPECT_THROW(t.nodes_at_depth(3), std::out_of_range);
  EXPECT_THROW(t.nodes_at_depth(-1), std::out_of_range);
}

TEST(NodeIds, RoundTrip) {
  for (Index i = 0; i < 63; ++i) EXPECT_EQ(ClusterTree::index_of(ClusterTree::id_of(i)), i);
  EXPECT_EQ(ClusterTree::id_of(4), (NodeId{2, 1}));
  EXPECT_EQ(ClusterTree::sibling(3), 4);
  EXPECT_EQ(ClusterTree::parent(4), 1);
}

TEST(FromLeaves, RebuildsTree) {
  const auto t = build_tree(37, 5);
  EXPECT_EQ(ClusterTree::from_leaves(t.leaf_ranges()), t);
  EXPECT_THROW(ClusterTree::from_leaves({{0, 2}, {2, 3}, {3, 5}}), std::invalid_argument);
}
