#pragma once

// Perfect binary cluster trees over contiguous index ranges.
//
// Nodes are stored in heap order: the root has index 0 and node i has
// children 2i+1 (left) and 2i+2 (right).  A node at depth d and position p
// (counted left to right) therefore has index 2^d - 1 + p.  Generators of HSS
// matrices and telescopic decompositions are keyed by this index.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace hssfun {

using Index = Eigen::Index;

/// Half-open index range [lo, hi).
struct Range {
  Index lo = 0;
  Index hi = 0;

  Index size() const { return hi - lo; }
  bool contains(Index i) const { return lo <= i && i < hi; }
  bool operator==(const Range&) const = default;
};

/// (depth, position) identity of a node; stable across every conversion.
struct NodeId {
  int depth = 0;
  Index position = 0;

  bool operator==(const NodeId&) const = default;
  std::string str() const {
    return "(" + std::to_string(depth) + "," + std::to_string(position) + ")";
  }
};

class ClusterTree {
 public:
  ClusterTree() : ClusterTree(1, 0, {Range{0, 1}}) {}

  /// Shallowest perfect tree whose leaves hold at most `threshold` indices.
  /// A node of size s is split into ceil(s/2) and floor(s/2).
  static ClusterTree build(Index n, Index threshold) {
    if (n < 1 || threshold < 1)
      throw std::invalid_argument("build_tree: n and threshold must be positive");
    int depth = 0;
    while (ceil_div(n, Index{1} << depth) > threshold) ++depth;
    return split_evenly(n, depth);
  }

  /// Balanced tree of the given depth over [0, 2^depth * m); all leaves have size m.
  static ClusterTree balanced(Index m, int depth) {
    if (m < 1 || depth < 0)
      throw std::invalid_argument("build_balanced_tree: m must be positive, depth nonnegative");
    const Index leaves = Index{1} << depth;
    std::vector<Range> leaf_ranges(static_cast<std::size_t>(leaves));
    for (Index i = 0; i < leaves; ++i) leaf_ranges[static_cast<std::size_t>(i)] = {i * m, (i + 1) * m};
    return from_leaves(leaf_ranges);
  }

  /// Rebuilds a tree from its 2^L consecutive leaf ranges.
  static ClusterTree from_leaves(const std::vector<Range>& leaves) {
    const auto count = static_cast<Index>(leaves.size());
    int depth = 0;
    while ((Index{1} << depth) < count) ++depth;
    if ((Index{1} << depth) != count)
      throw std::invalid_argument("cluster tree: leaf count must be a power of two");
    Index cursor = 0;
    for (const auto& r : leaves) {
      if (r.lo != cursor || r.hi < r.lo)
        throw std::invalid_argument("cluster tree: leaf ranges must be consecutive");
      cursor = r.hi;
    }
    if (cursor < 1) throw std::invalid_argument("cluster tree: empty index set");
    std::vector<Range> ranges(static_cast<std::size_t>(2 * count - 1));
    const Index first_leaf = count - 1;
    for (Index i = 0; i < count; ++i)
      ranges[static_cast<std::size_t>(first_leaf + i)] = leaves[static_cast<std::size_t>(i)];
    for (Index i = first_leaf - 1; i >= 0; --i) {
      ranges[static_cast<std::size_t>(i)] = {ranges[static_cast<std::size_t>(2 * i + 1)].lo,
                                             ranges[static_cast<std::size_t>(2 * i + 2)].hi};
    }
    return ClusterTree(cursor, depth, std::move(ranges));
  }

  Index size() const { return n_; }
  int depth() const { return depth_; }
  Index node_count() const { return static_cast<Index>(ranges_.size()); }
  Index leaf_count() const { return Index{1} << depth_; }

  const Range& range(Index node) const { return ranges_.at(static_cast<std::size_t>(node)); }
  const std::vector<Range>& ranges() const { return ranges_; }

  static Index root() { return 0; }
  static Index left(Index node) { return 2 * node + 1; }
  static Index right(Index node) { return 2 * node + 2; }
  static Index parent(Index node) { return (node - 1) / 2; }
  static Index sibling(Index node) { return node % 2 == 1 ? node + 1 : node - 1; }
  static bool is_left(Index node) { return node % 2 == 1; }

  static int depth_of(Index node) {
    int d = 0;
    for (Index k = node + 1; k > 1; k >>= 1) ++d;
    return d;
  }
  static Index index_of(NodeId id) { return (Index{1} << id.depth) - 1 + id.position; }
  static NodeId id_of(Index node) {
    const int d = depth_of(node);
    return {d, node - ((Index{1} << d) - 1)};
  }

  bool is_leaf(Index node) const { return depth_of(node) == depth_; }

  /// First heap index of the nodes at depth `level`.
  static Index level_begin(int level) { return (Index{1} << level) - 1; }
  static Index level_end(int level) { return (Index{1} << (level + 1)) - 1; }

  /// Nodes at depth `level`, ordered left to right.
  std::vector<Index> nodes_at_depth(int level) const {
    if (level < 0 || level > depth_)
      throw std::out_of_range("nodes_at_depth: level " + std::to_string(level) +
                              " outside [0, " + std::to_string(depth_) + "]");
    std::vector<Index> out;
    out.reserve(static_cast<std::size_t>(Index{1} << level));
    for (Index i = level_begin(level); i < level_end(level); ++i) out.push_back(i);
    return out;
  }

  std::vector<Index> leaves() const { return nodes_at_depth(depth_); }

  std::vector<Range> leaf_ranges() const {
    std::vector<Range> out;
    for (Index i : leaves()) out.push_back(range(i));
    return out;
  }

  bool operator==(const ClusterTree& other) const {
    return n_ == other.n_ && depth_ == other.depth_ && ranges_ == other.ranges_;
  }

 private:
  ClusterTree(Index n, int depth, std::vector<Range> ranges)
      : n_(n), depth_(depth), ranges_(std::move(ranges)) {}

  static Index ceil_div(Index a, Index b) { return (a + b - 1) / b; }

  static ClusterTree split_evenly(Index n, int depth) {
    std::vector<Range> ranges(static_cast<std::size_t>((Index{2} << depth) - 1));
    ranges[0] = {0, n};
    for (Index i = 0; i < level_begin(depth); ++i) {
      const Range r = ranges[static_cast<std::size_t>(i)];
      const Index mid = r.lo + ceil_div(r.size(), 2);
      ranges[static_cast<std::size_t>(left(i))] = {r.lo, mid};
      ranges[static_cast<std::size_t>(right(i))] = {mid, r.hi};
    }
    return ClusterTree(n, depth, std::move(ranges));
  }

  Index n_;
  int depth_;
  std::vector<Range> ranges_;
};

inline ClusterTree build_tree(Index n, Index threshold) { return ClusterTree::build(n, threshold); }
inline ClusterTree build_balanced_tree(Index m, int depth) { return ClusterTree::balanced(m, depth); }

}  // namespace hssfun
