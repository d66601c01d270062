#pragma once

#include "dyadlab/errors.hpp"
#include "dyadlab/measures.hpp"

#include <iosfwd>
#include <utility>
#include <vector>

namespace dyadlab {

/// Leaf-constant function on a tree; values follow the left-to-right leaf order.
template <Scalar T>
struct FunctionRep {
  TreePtr tree;
  std::vector<T> values;

  FunctionRep() = default;
  FunctionRep(TreePtr t, std::vector<T> v) : tree(std::move(t)), values(std::move(v)) {
    if (values.size() != tree->leaf_count()) throw DyadError(ErrorKind::InvalidArgument, "function size does not match tree");
  }
  static FunctionRep constant(TreePtr t, const T& c) {
    const size_t n = t->leaf_count();
    return FunctionRep(std::move(t), std::vector<T>(n, c));
  }
  static FunctionRep indicator(TreePtr t, NodeId id, const T& height = T(1)) {
    FunctionRep f = constant(t, T(0));
    for (auto i = t->leaf_begin(id); i < t->leaf_end(id); ++i) f.values[static_cast<size_t>(i)] = height;
    return f;
  }
  size_t size() const { return values.size(); }
  const T& operator[](size_t i) const { return values[i]; }
  T& operator[](size_t i) { return values[i]; }

  template <Scalar S>
  FunctionRep<S> as() const {
    std::vector<S> out;
    out.reserve(values.size());
    for (const T& v : values) out.push_back(convert<S>(v));
    return FunctionRep<S>(tree, std::move(out));
  }
};

template <Scalar T>
void require_same_tree(const DyadicTree& a, const DyadicTree& b) {
  if (!a.same_shape(b)) throw DyadError(ErrorKind::BackendMismatch, "function and measure live on different trees");
}

template <Scalar T>
void require_on(const FunctionRep<T>& f, const DyadicMeasure& mu) {
  if (!f.tree) throw DyadError(ErrorKind::BackendMismatch, "function without a tree");
  require_same_tree<T>(*f.tree, mu.tree());
}

template <Scalar T>
FunctionRep<T> operator+(FunctionRep<T> a, const FunctionRep<T>& b) {
  for (size_t i = 0; i < a.size(); ++i) a.values[i] += b.values[i];
  return a;
}
template <Scalar T>
FunctionRep<T> operator-(FunctionRep<T> a, const FunctionRep<T>& b) {
  for (size_t i = 0; i < a.size(); ++i) a.values[i] -= b.values[i];
  return a;
}
/// Pointwise product.
template <Scalar T>
FunctionRep<T> operator*(FunctionRep<T> a, const FunctionRep<T>& b) {
  for (size_t i = 0; i < a.size(); ++i) a.values[i] *= b.values[i];
  return a;
}
template <Scalar T>
FunctionRep<T> scaled(FunctionRep<T> a, const T& c) {
  for (auto& v : a.values) v *= c;
  return a;
}

/// Integral of f over every node, accumulated bottom-up.
template <Scalar T>
std::vector<T> node_integrals(const FunctionRep<T>& f, const DyadicMeasure& mu) {
  require_on(f, mu);
  const DyadicTree& t = mu.tree();
  const auto& mass = mu.masses<T>();
  std::vector<T> integral(t.size(), T(0));
  for (size_t i = 0; i < t.leaf_count(); ++i) {
    const NodeId leaf = t.leaves()[i];
    integral[leaf] = f.values[i] * mass[leaf];
  }
  for (size_t i = t.size(); i-- > 0;) {
    const auto id = static_cast<NodeId>(i);
    if (!t.is_leaf(id)) integral[id] = integral[t.left(id)] + integral[t.right(id)];
  }
  return integral;
}

/// <f>_I for every node.
template <Scalar T>
std::vector<T> node_averages(const FunctionRep<T>& f, const DyadicMeasure& mu) {
  std::vector<T> avg = node_integrals(f, mu);
  const auto& mass = mu.masses<T>();
  for (size_t i = 0; i < avg.size(); ++i) avg[i] /= mass[i];
  return avg;
}

template <Scalar T>
T integral(const FunctionRep<T>& f, const DyadicMeasure& mu) {
  require_on(f, mu);
  const auto& mass = mu.masses<T>();
  T total(0);
  for (size_t i = 0; i < f.size(); ++i) total += f.values[i] * mass[mu.tree().leaves()[i]];
  return total;
}

template <Scalar T>
T average(const FunctionRep<T>& f, const DyadicMeasure& mu, NodeId id) {
  require_on(f, mu);
  const DyadicTree& t = mu.tree();
  const auto& mass = mu.masses<T>();
  T sum(0);
  for (auto i = t.leaf_begin(id); i < t.leaf_end(id); ++i)
    sum += f.values[static_cast<size_t>(i)] * mass[t.leaves()[static_cast<size_t>(i)]];
  return sum / mass[id];
}

template <Scalar T>
T average(const FunctionRep<T>& f, const DyadicMeasure& mu, const DyadicInterval& I) {
  return average(f, mu, mu.tree().at(I));
}

/// Generation-k conditional expectation: constant on each scale-k interval.
/// Leaves coarser than scale k keep their values.
template <Scalar T>
FunctionRep<T> expectation(const FunctionRep<T>& f, const DyadicMeasure& mu, int k) {
  const DyadicTree& t = mu.tree();
  if (k < t.root_scale() || k > t.max_leaf_scale())
    throw DyadError(ErrorKind::OutOfTree, "expectation scale outside the tree");
  const std::vector<T> avg = node_averages(f, mu);
  FunctionRep<T> out = f;
  for (size_t i = 0; i < t.leaf_count(); ++i) {
    const NodeId leaf = t.leaves()[i];
    if (t.interval(leaf).scale <= k) continue;
    out.values[i] = avg[t.ancestor_at_scale(leaf, k)];
  }
  return out;
}

/// (h_I on I-, h_I on I+) = (sqrt m / mu(I-), -sqrt m / mu(I+)).
template <FloatScalar T>
std::pair<T, T> haar_values(const DyadicMeasure& mu, NodeId id) {
  const DyadicTree& t = mu.tree();
  if (t.is_leaf(id)) throw DyadError(ErrorKind::OutOfTree, "leaves carry no Haar function");
  const auto& mass = mu.masses<T>();
  const T s = mu.sqrt_m<T>()[id];
  return {s / mass[t.left(id)], T(-s / mass[t.right(id)])};
}

template <FloatScalar T>
std::pair<T, T> haar_values(const DyadicMeasure& mu, const DyadicInterval& I) {
  return haar_values<T>(mu, mu.tree().at(I));
}

/// The Haar function h_I as a leaf function.
template <FloatScalar T>
FunctionRep<T> haar_function(const DyadicMeasure& mu, NodeId id) {
  const DyadicTree& t = mu.tree();
  auto [lo, hi] = haar_values<T>(mu, id);
  FunctionRep<T> h = FunctionRep<T>::constant(mu.tree_ptr(), T(0));
  for (auto i = t.leaf_begin(t.left(id)); i < t.leaf_end(t.left(id)); ++i) h.values[static_cast<size_t>(i)] = lo;
  for (auto i = t.leaf_begin(t.right(id)); i < t.leaf_end(t.right(id)); ++i) h.values[static_cast<size_t>(i)] = hi;
  return h;
}

/// Haar expansion in difference form: diff(I) = <f>_{I-} - <f>_{I+}, so that
/// <f, h_I> = diff(I) sqrt m(I). This keeps the rational backend exact.
template <Scalar T>
struct HaarCoefficients {
  TreePtr tree;
  std::vector<T> diff;         // per node, zero on leaves
  std::vector<T> root_average; // per root index

  /// <f, h_I>; float backends only.
  template <FloatScalar S = T>
  S coefficient(const DyadicMeasure& mu, NodeId id) const {
    return convert<S>(diff[id]) * mu.sqrt_m<S>()[id];
  }
};

template <Scalar T>
HaarCoefficients<T> analyze(const FunctionRep<T>& f, const DyadicMeasure& mu) {
  const std::vector<T> avg = node_averages(f, mu);
  const DyadicTree& t = mu.tree();
  HaarCoefficients<T> c;
  c.tree = mu.tree_ptr();
  c.diff.assign(t.size(), T(0));
  for (NodeId id : t.internal_nodes()) c.diff[id] = avg[t.left(id)] - avg[t.right(id)];
  for (NodeId r : t.roots()) c.root_average.push_back(avg[r]);
  return c;
}

/// Leaf function g(x) = sum over internal I containing x of (x in I- ? left[I] : right[I]) plus base[root].
template <Scalar T>
FunctionRep<T> accumulate_down(const DyadicTree& tree, const TreePtr& ptr, const std::vector<T>& left_term,
                               const std::vector<T>& right_term, const std::vector<T>* root_base = nullptr) {
  std::vector<T> value(tree.size(), T(0));
  for (size_t r = 0; r < tree.root_count(); ++r) value[tree.roots()[r]] = root_base ? (*root_base)[r] : T(0);
  for (size_t i = 0; i < tree.size(); ++i) {
    const auto id = static_cast<NodeId>(i);
    if (tree.is_leaf(id)) continue;
    value[tree.left(id)] = value[id] + left_term[id];
    value[tree.right(id)] = value[id] + right_term[id];
  }
  std::vector<T> out;
  out.reserve(tree.leaf_count());
  for (NodeId leaf : tree.leaves()) out.push_back(value[leaf]);
  return FunctionRep<T>(ptr, std::move(out));
}

template <Scalar T>
FunctionRep<T> synthesize(const HaarCoefficients<T>& c, const DyadicMeasure& mu) {
  if (!c.tree) throw DyadError(ErrorKind::BackendMismatch, "coefficients without a tree");
  require_same_tree<T>(*c.tree, mu.tree());
  const DyadicTree& t = mu.tree();
  const auto& mass = mu.masses<T>();
  std::vector<T> lt(t.size(), T(0)), rt(t.size(), T(0));
  for (NodeId id : t.internal_nodes()) {
    // diff * m / mu(I-) = diff * mu(I+) / mu(I)
    lt[id] = c.diff[id] * mass[t.right(id)] / mass[id];
    rt[id] = -(c.diff[id] * mass[t.left(id)] / mass[id]);
  }
  return accumulate_down(t, mu.tree_ptr(), lt, rt, &c.root_average);
}

/// True Haar coefficients <f, h_I> per node (zero on leaves).
template <FloatScalar T>
std::vector<T> haar_coefficients(const FunctionRep<T>& f, const DyadicMeasure& mu) {
  HaarCoefficients<T> c = analyze(f, mu);
  const auto& s = mu.sqrt_m<T>();
  for (size_t i = 0; i < c.diff.size(); ++i) c.diff[i] *= s[i];
  return c.diff;
}

/// Synthesis from true coefficients with zero root averages.
template <FloatScalar T>
FunctionRep<T> from_haar_coefficients(const std::vector<T>& coef, const DyadicMeasure& mu,
                                      const std::vector<T>* root_average = nullptr) {
  const DyadicTree& t = mu.tree();
  const auto& mass = mu.masses<T>();
  const auto& s = mu.sqrt_m<T>();
  std::vector<T> lt(t.size(), T(0)), rt(t.size(), T(0));
  for (NodeId id : t.internal_nodes()) {
    lt[id] = coef[id] * s[id] / mass[t.left(id)];
    rt[id] = -(coef[id] * s[id] / mass[t.right(id)]);
  }
  return accumulate_down(t, mu.tree_ptr(), lt, rt, root_average);
}

/// Parseval with boundary terms: sum coef^2 + sum mu(root) avg^2.
template <FloatScalar T>
T parseval_energy(const FunctionRep<T>& f, const DyadicMeasure& mu) {
  HaarCoefficients<T> c = analyze(f, mu);
  const DyadicTree& t = mu.tree();
  const auto& m = mu.m_values<T>();
  const auto& mass = mu.masses<T>();
  T total(0);
  for (NodeId id : t.internal_nodes()) total += c.diff[id] * c.diff[id] * m[id];
  for (size_t r = 0; r < t.root_count(); ++r) total += mass[t.roots()[r]] * c.root_average[r] * c.root_average[r];
  return total;
}

template <Scalar T>
T inner_product(const FunctionRep<T>& f, const FunctionRep<T>& g, const DyadicMeasure& mu) {
  const auto& mass = mu.masses<T>();
  T total(0);
  for (size_t i = 0; i < f.size(); ++i) total += f.values[i] * g.values[i] * mass[mu.tree().leaves()[i]];
  return total;
}

enum class ParaproductKind { piB, piBStar, deltaB, lambda0, lambda1, lambdaFull };

ParaproductKind parse_paraproduct_kind(const std::string& name);

/// The paraproducts in difference form; every term carries m(I) to an integer
/// power, so rational inputs give rational outputs.
template <Scalar T>
FunctionRep<T> paraproduct(ParaproductKind kind, const FunctionRep<T>& b, const FunctionRep<T>& f,
                           const DyadicMeasure& mu) {
  require_on(b, mu);
  require_on(f, mu);
  const DyadicTree& t = mu.tree();
  const auto& mass = mu.masses<T>();
  const std::vector<T> ab = node_averages(b, mu);
  const std::vector<T> af = node_averages(f, mu);
  std::vector<T> lt(t.size(), T(0)), rt(t.size(), T(0));
  for (NodeId id : t.internal_nodes()) {
    const NodeId lo = t.left(id), hi = t.right(id);
    const T db = ab[lo] - ab[hi];
    const T df = af[lo] - af[hi];
    const T wl = mass[hi] / mass[id];  // m / mu(I-)
    const T wr = mass[lo] / mass[id];  // m / mu(I+)
    switch (kind) {
      case ParaproductKind::deltaB:
        lt[id] = db * df * wl * wl;
        rt[id] = db * df * wr * wr;
        break;
      case ParaproductKind::piB:
        lt[id] = db * af[id] * wl;
        rt[id] = -(db * af[id] * wr);
        break;
      case ParaproductKind::lambda0:
        lt[id] = df * ab[id] * wl;
        rt[id] = -(df * ab[id] * wr);
        break;
      case ParaproductKind::lambda1:
      case ParaproductKind::lambdaFull: {
        // <b,h_I> times the cubed integral, in rational form.
        T c = db * (mass[hi] - mass[lo]) / mass[id];
        if (kind == ParaproductKind::lambdaFull) c += ab[id];
        lt[id] = df * c * wl;
        rt[id] = -(df * c * wr);
        break;
      }
      case ParaproductKind::piBStar: {
        const T c = mu.m_values<T>()[id] * db * df / mass[id];
        lt[id] = c;
        rt[id] = c;
        break;
      }
    }
  }
  return accumulate_down(t, mu.tree_ptr(), lt, rt);
}

/// Sum over roots of <b>_R <f>_R 1_R, the term the finite-tree decompositions add back.
template <Scalar T>
FunctionRep<T> root_boundary_term(const FunctionRep<T>& b, const FunctionRep<T>& f, const DyadicMeasure& mu) {
  const DyadicTree& t = mu.tree();
  FunctionRep<T> out = FunctionRep<T>::constant(mu.tree_ptr(), T(0));
  for (NodeId r : t.roots()) {
    const T v = average(b, mu, r) * average(f, mu, r);
    for (auto i = t.leaf_begin(r); i < t.leaf_end(r); ++i) out.values[static_cast<size_t>(i)] = v;
  }
  return out;
}

/// The canonical value sqrt m(I) * integral of h_I^3 = (mu(I+) - mu(I-)) / mu(I).
Rational cubed_haar_canonical(const DyadicMeasure& mu, NodeId id);

/// Integral of h_I^3 in a float backend.
template <FloatScalar T>
T cubed_haar_integral(const DyadicMeasure& mu, NodeId id) {
  auto [lo, hi] = haar_values<T>(mu, id);
  const auto& mass = mu.masses<T>();
  const DyadicTree& t = mu.tree();
  return lo * lo * lo * mass[t.left(id)] + hi * hi * hi * mass[t.right(id)];
}

/// c_I(b) = <b,h_I> * integral h_I^3 + <b>_I, via the rational identity.
template <Scalar T>
T lambda_coefficient(const FunctionRep<T>& b, const DyadicMeasure& mu, NodeId id) {
  const DyadicTree& t = mu.tree();
  if (t.is_leaf(id)) throw DyadError(ErrorKind::OutOfTree, "lambda coefficient needs an internal interval");
  const auto& mass = mu.masses<T>();
  const T lo = average(b, mu, t.left(id));
  const T hi = average(b, mu, t.right(id));
  const T mid = average(b, mu, id);
  return (lo - hi) * (mass[t.right(id)] - mass[t.left(id)]) / mass[id] + mid;
}

/// "k:p value" lines in leaf order.
void write_function(std::ostream& out, const FunctionRep<Rational>& f);
FunctionRep<Rational> read_function(std::istream& in, const TreePtr& tree);
/// "k:p r" lines meaning r * sqrt m(I), plus "root k:p avg" lines.
void write_coefficients(std::ostream& out, const HaarCoefficients<Rational>& c);

}  // namespace dyadlab
