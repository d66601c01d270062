#include "dyadlab/generators.hpp"

#include "dyadlab/random.hpp"

namespace dyadlab::generators {

FunctionRep<Rational> b_k(const DyadicMeasure& mu_k, int k) {
  const DyadicTree& t = mu_k.tree();
  const Rational high = pow2(k);
  FunctionRep<Rational> b = FunctionRep<Rational>::constant(mu_k.tree_ptr(), high);
  for (size_t i = 0; i < t.leaf_count(); ++i) {
    const DyadicInterval& I = t.interval(t.leaves()[i]);
    const Rational left = I.left();
    if (denominator(left) != 1) continue;
    // The atom of mass 1 carries b = 1; the density 2^-k carries b = 2^k.
    const Rational len = I.length();
    const Rational density = pow2(-k) * len;
    b.values[i] = (1 + high * density) / (1 + density);
  }
  return b;
}

FunctionRep<Rational> random_bmo(const DyadicMeasure& mu, std::uint64_t seed, int resolution) {
  const DyadicTree& t = mu.tree();
  static const Rational choices[] = {Rational(-1), Rational(-1, 2), Rational(0), Rational(1, 2), Rational(1)};
  std::vector<Rational> lt(t.size(), Rational(0)), rt(t.size(), Rational(0));
  for (NodeId id : t.internal_nodes()) {
    if (t.level(id) >= resolution) continue;
    auto rng = interval_rng(seed, t.interval(id));
    const Rational& a = choices[uniform_int(rng, 0, 4)];
    if (a == 0) continue;
    const Rational& total = mu.mass(id);
    lt[id] = a * mu.mass(t.right(id)) / total;
    rt[id] = -(a * mu.mass(t.left(id)) / total);
  }
  return accumulate_down(t, mu.tree_ptr(), lt, rt);
}

FunctionRep<Rational> random_nonnegative(const TreePtr& tree, std::uint64_t seed, int resolution, int bumps) {
  const DyadicTree& t = *tree;
  auto rng = keyed_rng(seed, 0x6e6f6e6e);
  FunctionRep<Rational> f = FunctionRep<Rational>::constant(tree, Rational(coin(rng) ? 1 : 0));
  for (int j = 0; j < bumps; ++j) {
    NodeId id = t.roots()[static_cast<size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(t.root_count()) - 1))];
    const auto level = uniform_int(rng, 0, resolution);
    for (std::int64_t s = 0; s < level && !t.is_leaf(id); ++s) id = coin(rng) ? t.right(id) : t.left(id);
    const Rational height = pow2(static_cast<long>(uniform_int(rng, 0, 10)));
    for (auto i = t.leaf_begin(id); i < t.leaf_end(id); ++i) f.values[static_cast<size_t>(i)] += height;
  }
  return f;
}

FunctionRep<Rational> two_valued_weight(const TreePtr& tree, std::uint64_t seed, int resolution) {
  const DyadicTree& t = *tree;
  FunctionRep<Rational> w = FunctionRep<Rational>::constant(tree, Rational(1));
  for (size_t i = 0; i < t.leaf_count(); ++i) {
    const NodeId leaf = t.leaves()[i];
    const int scale = std::min(t.interval(leaf).scale, t.root_scale() + resolution);
    const NodeId anchor = t.ancestor_at_scale(leaf, scale);
    auto rng = interval_rng(seed, t.interval(anchor));
    w.values[i] = coin(rng) ? Rational(2) : Rational(1, 2);
  }
  return w;
}

namespace {

template <FloatScalar T>
T block_weight(const DyadicInterval& relative, int n) {
  const int k = measures::thm34_block_index(relative);
  if (k == 0 || k > n) return T(1);
  if (2 * k <= n) return T(1) / sqrt_value(T(k));
  return T(1) / sqrt_value(T(n - k + 1));
}

}  // namespace

template <FloatScalar T>
FunctionRep<T> thm34_weight(const TreePtr& tree, int n) {
  const DyadicTree& t = *tree;
  if (t.root_scale() != 0 || t.root_positions() != std::vector<std::int64_t>{0})
    throw DyadError(ErrorKind::UnsupportedTree, "the block weight lives on [0,1)");
  FunctionRep<T> w = FunctionRep<T>::constant(tree, T(1));
  for (size_t i = 0; i < t.leaf_count(); ++i) w.values[i] = block_weight<T>(t.interval(t.leaves()[i]), n);
  return w;
}

template <FloatScalar T>
FunctionRep<T> thm34_glued_weight(const TreePtr& tree) {
  const DyadicTree& t = *tree;
  FunctionRep<T> w = FunctionRep<T>::constant(tree, T(1));
  for (size_t i = 0; i < t.leaf_count(); ++i) {
    const auto loc = measures::thm34_glued_locate(t.interval(t.leaves()[i]));
    if (!loc) throw DyadError(ErrorKind::UnsupportedTree, "leaf outside the glued support");
    w.values[i] = block_weight<T>(loc->relative, loc->block == 0 ? 2 : 2 * (loc->block + 1));
  }
  return w;
}

template FunctionRep<Quad> thm34_weight(const TreePtr&, int);
template FunctionRep<double> thm34_weight(const TreePtr&, int);
template FunctionRep<Quad> thm34_glued_weight(const TreePtr&);
template FunctionRep<double> thm34_glued_weight(const TreePtr&);

}  // namespace dyadlab::generators
