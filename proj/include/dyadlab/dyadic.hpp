#pragma once

#include "dyadlab/numeric.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace dyadlab {

/// The half-open interval [p 2^-k, (p+1) 2^-k).
struct DyadicInterval {
  int scale = 0;
  std::int64_t position = 0;

  friend bool operator==(const DyadicInterval&, const DyadicInterval&) = default;
  /// Scale-then-position order.
  friend auto operator<=>(const DyadicInterval& a, const DyadicInterval& b) {
    if (auto c = a.scale <=> b.scale; c != 0) return c;
    return a.position <=> b.position;
  }

  Rational left() const;
  Rational right() const;
  Rational length() const;

  DyadicInterval parent() const;
  DyadicInterval left_child() const;
  DyadicInterval right_child() const;
  DyadicInterval sibling() const;
  bool is_right_child() const { return (position & 1) != 0; }
  /// True when this interval contains (or equals) other.
  bool contains(const DyadicInterval& other) const;
  /// The ancestor u generations up.
  DyadicInterval ancestor(int u) const;

  std::string str() const;
  static DyadicInterval parse(const std::string& text);
};

struct DyadicIntervalHash {
  size_t operator()(const DyadicInterval& I) const noexcept {
    auto h = static_cast<std::uint64_t>(I.position) * 0x9E3779B97F4A7C15ULL;
    return static_cast<size_t>(h ^ (static_cast<std::uint64_t>(I.scale) + 0x632BE59BD9B4E019ULL + (h << 6) + (h >> 2)));
  }
};

/// The m-th (1-based) descendant of I at depth u, left to right.
DyadicInterval sliced_subinterval(const DyadicInterval& I, int u, std::int64_t m);

/// A complete finite tree: every root at root_scale is split down to leaf_scale.
struct TreeSpec {
  int root_scale = 0;
  std::vector<std::int64_t> root_span{0};
  int leaf_scale = 0;
};

enum class Relation { parent, leftChild, rightChild, sibling };

using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;

/// A finite forest of full binary dyadic trees. Leaves may sit at different
/// scales; complete trees are the special case built from a TreeSpec.
/// Node ids follow scale-then-position order; the leaves under any node
/// form a contiguous run of the left-to-right leaf list.
class DyadicTree {
 public:
  using SplitRule = std::function<bool(const DyadicInterval&)>;

  static std::shared_ptr<const DyadicTree> complete(const TreeSpec& spec);
  /// Split from the roots while rule(I) holds and scale(I) < max_scale.
  static std::shared_ptr<const DyadicTree> refined(int root_scale, std::vector<std::int64_t> roots, int max_scale,
                                                   const SplitRule& rule);
  /// Rebuild the tree whose leaves are exactly the given intervals.
  static std::shared_ptr<const DyadicTree> from_leaves(int root_scale, std::vector<std::int64_t> roots,
                                                       const std::vector<DyadicInterval>& leaves);

  size_t size() const { return nodes_.size(); }
  size_t leaf_count() const { return leaves_.size(); }
  size_t root_count() const { return roots_.size(); }
  int root_scale() const { return root_scale_; }
  const std::vector<std::int64_t>& root_positions() const { return root_positions_; }
  int max_leaf_scale() const { return max_leaf_scale_; }
  int min_leaf_scale() const { return min_leaf_scale_; }
  /// Number of generations below the roots (max over leaves).
  int depth() const { return max_leaf_scale_ - root_scale_; }
  bool is_complete() const { return complete_; }

  const DyadicInterval& interval(NodeId id) const { return nodes_[id].interval; }
  NodeId parent(NodeId id) const { return nodes_[id].parent; }
  NodeId left(NodeId id) const { return nodes_[id].left; }
  NodeId right(NodeId id) const { return nodes_[id].right; }
  /// kNoNode for roots.
  NodeId sibling(NodeId id) const;
  bool is_leaf(NodeId id) const { return nodes_[id].left == kNoNode; }
  bool is_root(NodeId id) const { return nodes_[id].parent == kNoNode; }
  /// Index of the root above id within root_positions().
  int root_index(NodeId id) const { return nodes_[id].root; }
  int level(NodeId id) const { return nodes_[id].interval.scale - root_scale_; }

  /// Leaves under id are leaves()[leaf_begin(id) .. leaf_end(id)).
  std::int32_t leaf_begin(NodeId id) const { return nodes_[id].leaf_begin; }
  std::int32_t leaf_end(NodeId id) const { return nodes_[id].leaf_end; }
  /// Position of a leaf in the left-to-right order; -1 for internal nodes.
  std::int32_t leaf_index(NodeId id) const { return nodes_[id].leaf_index; }
  const std::vector<NodeId>& leaves() const { return leaves_; }
  const std::vector<NodeId>& roots() const { return roots_; }
  const std::vector<NodeId>& internal_nodes() const { return internal_; }

  std::optional<NodeId> find(const DyadicInterval& I) const;
  /// Like find, raising OutOfTree when I is not a node.
  NodeId at(const DyadicInterval& I) const;
  bool contains(const DyadicInterval& I) const { return find(I).has_value(); }

  DyadicInterval navigate(const DyadicInterval& I, Relation relation) const;
  std::vector<DyadicInterval> descendants_at(const DyadicInterval& I, int u) const;
  /// Node ids of the 2^u descendants of id at depth u; empty if any is missing.
  std::vector<NodeId> descendant_nodes(NodeId id, int u) const;
  /// Ancestor of id at the given scale (id itself when equal); kNoNode above the roots.
  NodeId ancestor_at_scale(NodeId id, int scale) const;

  /// Complete-tree description when applicable.
  std::optional<TreeSpec> spec() const;

  bool same_shape(const DyadicTree& other) const;

 private:
  struct Node {
    DyadicInterval interval;
    NodeId parent = kNoNode;
    NodeId left = kNoNode;
    NodeId right = kNoNode;
    std::int32_t root = 0;
    std::int32_t leaf_begin = 0;
    std::int32_t leaf_end = 0;
    std::int32_t leaf_index = -1;
  };

  DyadicTree() = default;
  void finalize();

  std::vector<Node> nodes_;
  std::vector<NodeId> leaves_;
  std::vector<NodeId> roots_;
  std::vector<NodeId> internal_;
  std::vector<std::int64_t> root_positions_;
  std::unordered_map<DyadicInterval, NodeId, DyadicIntervalHash> index_;
  int root_scale_ = 0;
  int max_leaf_scale_ = 0;
  int min_leaf_scale_ = 0;
  bool complete_ = false;
};

using TreePtr = std::shared_ptr<const DyadicTree>;

}  // namespace dyadlab
