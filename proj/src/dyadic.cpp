#include "dyadlab/dyadic.hpp"

#include "dyadlab/errors.hpp"

#include <algorithm>
#include <set>

namespace dyadlab {

namespace {

constexpr size_t kMaxNodes = size_t{1} << 25;

std::int64_t checked_double(std::int64_t p, int extra) {
  std::int64_t out = 0;
  if (__builtin_mul_overflow(p, std::int64_t{2}, &out) || __builtin_add_overflow(out, std::int64_t{extra}, &out))
    throw DyadError(ErrorKind::OutOfTree, "position overflow below scale");
  return out;
}

}  // namespace

Rational DyadicInterval::left() const { return Rational(position) * pow2(-scale); }
Rational DyadicInterval::right() const { return Rational(position + 1) * pow2(-scale); }
Rational DyadicInterval::length() const { return pow2(-scale); }

DyadicInterval DyadicInterval::parent() const { return {scale - 1, position >> 1}; }
DyadicInterval DyadicInterval::left_child() const { return {scale + 1, checked_double(position, 0)}; }
DyadicInterval DyadicInterval::right_child() const { return {scale + 1, checked_double(position, 1)}; }
DyadicInterval DyadicInterval::sibling() const { return {scale, position ^ 1}; }

bool DyadicInterval::contains(const DyadicInterval& other) const {
  if (other.scale < scale) return false;
  const int shift = other.scale - scale;
  if (shift >= 63) {
    // Positions are bounded by 2^63, so only the sign can survive this shift.
    return position == (other.position < 0 ? -1 : 0);
  }
  return (other.position >> shift) == position;
}

DyadicInterval DyadicInterval::ancestor(int u) const {
  if (u <= 0) return *this;
  return {scale - u, u >= 63 ? (position < 0 ? -1 : 0) : position >> u};
}

std::string DyadicInterval::str() const { return std::to_string(scale) + ":" + std::to_string(position); }

DyadicInterval DyadicInterval::parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw DyadError(ErrorKind::ParseError, "interval must be k:p, got '" + text + "'");
  try {
    size_t used = 0;
    const std::string ks = text.substr(0, colon);
    const std::string ps = text.substr(colon + 1);
    const int k = std::stoi(ks, &used);
    if (used != ks.size()) throw std::invalid_argument(ks);
    const long long p = std::stoll(ps, &used);
    if (used != ps.size()) throw std::invalid_argument(ps);
    return {k, static_cast<std::int64_t>(p)};
  } catch (const std::logic_error&) {
    throw DyadError(ErrorKind::ParseError, "interval must be k:p, got '" + text + "'");
  }
}

DyadicInterval sliced_subinterval(const DyadicInterval& I, int u, std::int64_t m) {
  if (u < 0 || u >= 62) throw DyadError(ErrorKind::InvalidIndex, "slice depth out of range");
  const std::int64_t count = std::int64_t{1} << u;
  if (m < 1 || m > count) throw DyadError(ErrorKind::InvalidIndex, "slice index " + std::to_string(m) + " not in [1, 2^" + std::to_string(u) + "]");
  std::int64_t base = 0;
  if (__builtin_mul_overflow(I.position, count, &base)) throw DyadError(ErrorKind::OutOfTree, "position overflow");
  return {I.scale + u, base + (m - 1)};
}

std::shared_ptr<const DyadicTree> DyadicTree::complete(const TreeSpec& spec) {
  if (spec.leaf_scale < spec.root_scale) throw DyadError(ErrorKind::UnsupportedTree, "leafScale below rootScale");
  auto tree = refined(spec.root_scale, spec.root_span, spec.leaf_scale, [](const DyadicInterval&) { return true; });
  return tree;
}

std::shared_ptr<const DyadicTree> DyadicTree::refined(int root_scale, std::vector<std::int64_t> roots, int max_scale,
                                                      const SplitRule& rule) {
  if (roots.empty()) throw DyadError(ErrorKind::UnsupportedTree, "tree needs at least one root");
  std::sort(roots.begin(), roots.end());
  if (std::adjacent_find(roots.begin(), roots.end()) != roots.end())
    throw DyadError(ErrorKind::UnsupportedTree, "duplicate root positions");
  if (max_scale - root_scale > 60) throw DyadError(ErrorKind::UnsupportedTree, "tree deeper than 60 generations");
  for (std::int64_t r : roots)
    if (std::abs(r) > (std::int64_t{1} << 60) >> (max_scale - root_scale))
      throw DyadError(ErrorKind::UnsupportedTree, "root position too large for the tree depth");
  std::shared_ptr<DyadicTree> tree(new DyadicTree());
  tree->root_scale_ = root_scale;
  tree->root_positions_ = roots;
  std::vector<NodeId> frontier;
  for (size_t r = 0; r < roots.size(); ++r) {
    Node node;
    node.interval = {root_scale, roots[r]};
    node.root = static_cast<std::int32_t>(r);
    tree->nodes_.push_back(node);
    frontier.push_back(static_cast<NodeId>(tree->nodes_.size() - 1));
  }
  while (!frontier.empty()) {
    std::vector<NodeId> next;
    for (NodeId id : frontier) {
      const DyadicInterval I = tree->nodes_[id].interval;
      if (I.scale >= max_scale || !rule(I)) continue;
      for (int side = 0; side < 2; ++side) {
        Node child;
        child.interval = side == 0 ? I.left_child() : I.right_child();
        child.parent = id;
        child.root = tree->nodes_[id].root;
        tree->nodes_.push_back(child);
        if (tree->nodes_.size() > kMaxNodes) throw DyadError(ErrorKind::UnsupportedTree, "tree exceeds the node budget");
        const auto cid = static_cast<NodeId>(tree->nodes_.size() - 1);
        (side == 0 ? tree->nodes_[id].left : tree->nodes_[id].right) = cid;
        next.push_back(cid);
      }
    }
    frontier = std::move(next);
  }
  tree->finalize();
  return tree;
}

std::shared_ptr<const DyadicTree> DyadicTree::from_leaves(int root_scale, std::vector<std::int64_t> roots,
                                                          const std::vector<DyadicInterval>& leaves) {
  std::set<DyadicInterval> internal;
  int max_scale = root_scale;
  for (const auto& leaf : leaves) {
    if (leaf.scale < root_scale) throw DyadError(ErrorKind::UnsupportedTree, "leaf above the root scale: " + leaf.str());
    max_scale = std::max(max_scale, leaf.scale);
    for (int u = 1; u <= leaf.scale - root_scale; ++u) internal.insert(leaf.ancestor(u));
  }
  auto tree = refined(root_scale, std::move(roots), max_scale,
                      [&](const DyadicInterval& I) { return internal.count(I) != 0; });
  std::vector<DyadicInterval> got;
  for (NodeId id : tree->leaves()) got.push_back(tree->interval(id));
  std::vector<DyadicInterval> want = leaves;
  std::sort(got.begin(), got.end());
  std::sort(want.begin(), want.end());
  if (got != want) throw DyadError(ErrorKind::UnsupportedTree, "leaf set does not partition the roots");
  return tree;
}

void DyadicTree::finalize() {
  // Ids are already in scale-then-position order within the BFS; stable sort guards multi-root gaps.
  const size_t n = nodes_.size();
  std::vector<NodeId> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = static_cast<NodeId>(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](NodeId a, NodeId b) { return nodes_[a].interval < nodes_[b].interval; });
  std::vector<NodeId> remap(n);
  for (size_t i = 0; i < n; ++i) remap[order[i]] = static_cast<NodeId>(i);
  std::vector<Node> sorted(n);
  for (size_t i = 0; i < n; ++i) {
    Node node = nodes_[order[i]];
    if (node.parent != kNoNode) node.parent = remap[node.parent];
    if (node.left != kNoNode) node.left = remap[node.left];
    if (node.right != kNoNode) node.right = remap[node.right];
    sorted[i] = node;
  }
  nodes_ = std::move(sorted);

  index_.clear();
  index_.reserve(n * 2);
  roots_.clear();
  internal_.clear();
  for (size_t i = 0; i < n; ++i) {
    index_.emplace(nodes_[i].interval, static_cast<NodeId>(i));
    if (nodes_[i].parent == kNoNode) roots_.push_back(static_cast<NodeId>(i));
    if (nodes_[i].left != kNoNode) internal_.push_back(static_cast<NodeId>(i));
  }

  // Left-to-right leaf order via an explicit DFS.
  leaves_.clear();
  struct Frame {
    NodeId id;
    bool expanded;
  };
  std::vector<Frame> stack;
  for (auto it = roots_.rbegin(); it != roots_.rend(); ++it) stack.push_back({*it, false});
  while (!stack.empty()) {
    Frame frame = stack.back();
    stack.pop_back();
    Node& node = nodes_[frame.id];
    if (node.left == kNoNode) {
      node.leaf_index = static_cast<std::int32_t>(leaves_.size());
      node.leaf_begin = node.leaf_index;
      node.leaf_end = node.leaf_index + 1;
      leaves_.push_back(frame.id);
      continue;
    }
    if (frame.expanded) {
      node.leaf_begin = nodes_[node.left].leaf_begin;
      node.leaf_end = nodes_[node.right].leaf_end;
      continue;
    }
    stack.push_back({frame.id, true});
    stack.push_back({node.right, false});
    stack.push_back({node.left, false});
  }

  max_leaf_scale_ = root_scale_;
  min_leaf_scale_ = nodes_[leaves_.front()].interval.scale;
  bool uniform = true;
  for (NodeId id : leaves_) {
    const int s = nodes_[id].interval.scale;
    max_leaf_scale_ = std::max(max_leaf_scale_, s);
    min_leaf_scale_ = std::min(min_leaf_scale_, s);
  }
  uniform = max_leaf_scale_ == min_leaf_scale_;
  complete_ = uniform;
}

NodeId DyadicTree::sibling(NodeId id) const {
  const NodeId p = nodes_[id].parent;
  if (p == kNoNode) return kNoNode;
  return nodes_[p].left == id ? nodes_[p].right : nodes_[p].left;
}

std::optional<NodeId> DyadicTree::find(const DyadicInterval& I) const {
  auto it = index_.find(I);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

NodeId DyadicTree::at(const DyadicInterval& I) const {
  auto id = find(I);
  if (!id) throw DyadError(ErrorKind::OutOfTree, "interval " + I.str() + " is not in the tree");
  return *id;
}

DyadicInterval DyadicTree::navigate(const DyadicInterval& I, Relation relation) const {
  const NodeId id = at(I);
  DyadicInterval target;
  switch (relation) {
    case Relation::parent:
      if (is_root(id)) throw DyadError(ErrorKind::OutOfTree, "parent of root " + I.str());
      target = I.parent();
      break;
    case Relation::sibling:
      if (is_root(id)) throw DyadError(ErrorKind::OutOfTree, "sibling of root " + I.str());
      target = I.sibling();
      break;
    case Relation::leftChild:
      if (is_leaf(id)) throw DyadError(ErrorKind::OutOfTree, "child of leaf " + I.str());
      target = I.left_child();
      break;
    case Relation::rightChild:
      if (is_leaf(id)) throw DyadError(ErrorKind::OutOfTree, "child of leaf " + I.str());
      target = I.right_child();
      break;
  }
  at(target);
  return target;
}

std::vector<DyadicInterval> DyadicTree::descendants_at(const DyadicInterval& I, int u) const {
  const NodeId id = at(I);
  if (u < 0) throw DyadError(ErrorKind::InvalidIndex, "negative depth");
  auto nodes = descendant_nodes(id, u);
  if (nodes.empty()) throw DyadError(ErrorKind::OutOfTree, "descendants of " + I.str() + " at depth " + std::to_string(u) + " leave the tree");
  std::vector<DyadicInterval> out;
  out.reserve(nodes.size());
  for (NodeId n : nodes) out.push_back(nodes_[n].interval);
  return out;
}

std::vector<NodeId> DyadicTree::descendant_nodes(NodeId id, int u) const {
  std::vector<NodeId> layer{id};
  for (int step = 0; step < u; ++step) {
    std::vector<NodeId> next;
    next.reserve(layer.size() * 2);
    for (NodeId n : layer) {
      if (nodes_[n].left == kNoNode) return {};
      next.push_back(nodes_[n].left);
      next.push_back(nodes_[n].right);
    }
    layer = std::move(next);
  }
  return layer;
}

NodeId DyadicTree::ancestor_at_scale(NodeId id, int scale) const {
  while (id != kNoNode && nodes_[id].interval.scale > scale) id = nodes_[id].parent;
  if (id == kNoNode || nodes_[id].interval.scale != scale) return kNoNode;
  return id;
}

std::optional<TreeSpec> DyadicTree::spec() const {
  if (!complete_) return std::nullopt;
  return TreeSpec{root_scale_, root_positions_, max_leaf_scale_};
}

bool DyadicTree::same_shape(const DyadicTree& other) const {
  if (this == &other) return true;
  if (nodes_.size() != other.nodes_.size() || root_scale_ != other.root_scale_) return false;
  for (size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].interval != other.nodes_[i].interval || nodes_[i].left != other.nodes_[i].left) return false;
  }
  return true;
}

}  // namespace dyadlab
