#pragma once

#include "dyadlab/errors.hpp"
#include "dyadlab/generators.hpp"
#include "dyadlab/haar.hpp"
#include "dyadlab/measures.hpp"
#include "dyadlab/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace testsupport {

using namespace dyadlab;

inline TreePtr tree(int root_scale, int depth, std::vector<std::int64_t> roots = {0}) {
  return DyadicTree::complete(TreeSpec{root_scale, std::move(roots), root_scale + depth});
}

inline DyadicInterval iv(int scale, std::int64_t position) { return DyadicInterval{scale, position}; }

/// Two leaves at level 2 and four at level 3.
inline TreePtr six_leaf_tree() {
  return DyadicTree::from_leaves(0, {0}, {iv(2, 0), iv(2, 1), iv(3, 4), iv(3, 5), iv(3, 6), iv(3, 7)});
}

/// Leaf masses drawn as small random integers, so every quantity stays a short rational.
inline DyadicMeasure random_integer_measure(const TreePtr& t, std::uint64_t seed, int max_mass = 9) {
  auto rng = keyed_rng(seed, 17);
  std::vector<Rational> masses;
  for (size_t i = 0; i < t->leaf_count(); ++i) masses.emplace_back(uniform_int(rng, 1, max_mass));
  return DyadicMeasure(t, std::move(masses), true, "random");
}

inline FunctionRep<Rational> random_rational_function(const TreePtr& t, std::uint64_t seed, int lo = -5, int hi = 5) {
  auto rng = keyed_rng(seed, 23);
  std::vector<Rational> v;
  for (size_t i = 0; i < t->leaf_count(); ++i) v.emplace_back(Rational(uniform_int(rng, lo, hi), uniform_int(rng, 1, 4)));
  return FunctionRep<Rational>(t, std::move(v));
}

inline FunctionRep<Rational> random_positive_function(const TreePtr& t, std::uint64_t seed) {
  auto rng = keyed_rng(seed, 29);
  std::vector<Rational> v;
  for (size_t i = 0; i < t->leaf_count(); ++i) v.emplace_back(Rational(uniform_int(rng, 1, 12), uniform_int(rng, 1, 4)));
  return FunctionRep<Rational>(t, std::move(v));
}

template <Scalar T>
T max_abs_diff(const FunctionRep<T>& a, const FunctionRep<T>& b) {
  T worst(0);
  for (size_t i = 0; i < a.size(); ++i) {
    T d = a.values[i] - b.values[i];
    if (d < 0) d = -d;
    if (d > worst) worst = d;
  }
  return worst;
}

inline Rational leaf_average(const FunctionRep<Rational>& f, const DyadicMeasure& mu, NodeId id) {
  const DyadicTree& t = mu.tree();
  Rational num(0);
  for (auto i = t.leaf_begin(id); i < t.leaf_end(id); ++i)
    num += f.values[static_cast<size_t>(i)] * mu.leaf_masses()[static_cast<size_t>(i)];
  return num / mu.mass(id);
}

/// Brute force over all ordered pairs with the four-case c_p table at p = 2.
inline Rational sib_oracle_p2(const FunctionRep<Rational>& w, const DyadicMeasure& mu) {
  const DyadicTree& t = mu.tree();
  FunctionRep<Rational> sigma = w;
  for (auto& v : sigma.values) v = 1 / v;
  auto m = [&](NodeId id) { return t.is_leaf(id) ? Rational(0) : mu.m(id); };
  auto parent = [&](NodeId id) { return t.is_root(id) ? kNoNode : t.parent(id); };
  auto sib = [&](NodeId id) { return id == kNoNode || t.is_root(id) ? kNoNode : t.sibling(id); };
  Rational best(0);
  const auto n = static_cast<NodeId>(t.size());
  for (NodeId I = 0; I < n; ++I)
    for (NodeId J = 0; J < n; ++J) {
      const NodeId pI = parent(I), pJ = parent(J);
      Rational c(0);
      if (I == J) c = 1;
      if (pI != kNoNode && pJ != kNoNode && pI == sib(pJ)) c = std::max(c, m(pI) / mu.mass(I) * m(pJ) / mu.mass(J));
      if (pI != kNoNode && J == sib(pI)) c = std::max(c, m(pI) / mu.mass(I) * m(J) / mu.mass(J));
      if (pJ != kNoNode && I == sib(pJ)) c = std::max(c, m(I) / mu.mass(I) * m(pJ) / mu.mass(J));
      if (c == 0) continue;
      best = std::max(best, c * leaf_average(w, mu, I) * leaf_average(sigma, mu, J));
    }
  return best;
}

inline double lp(const Eigen::VectorXd& f, const Eigen::VectorXd& wm, double p) {
  double s = 0;
  for (Eigen::Index i = 0; i < f.size(); ++i) s += std::pow(std::abs(f[i]), p) * wm[i];
  return std::pow(s, 1 / p);
}

/// Exhaustive grid over [-1,1]^n followed by a shrinking pattern search from the best grid points.
inline double grid_search_norm(const Eigen::MatrixXd& A, const Eigen::VectorXd& wm, double p) {
  const auto n = A.cols();
  auto ratio = [&](const Eigen::VectorXd& f) {
    const double d = lp(f, wm, p);
    return d > 0 ? lp(A * f, wm, p) / d : 0.0;
  };
  const int per = 7;
  std::vector<std::pair<double, Eigen::VectorXd>> best;
  Eigen::VectorXi idx = Eigen::VectorXi::Zero(n);
  while (true) {
    Eigen::VectorXd f(n);
    for (Eigen::Index i = 0; i < n; ++i) f[i] = -1.0 + 2.0 * idx[i] / (per - 1);
    const double r = ratio(f);
    if (best.size() < 12 || r > best.back().first) {
      best.emplace_back(r, f);
      std::sort(best.begin(), best.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
      if (best.size() > 12) best.pop_back();
    }
    Eigen::Index k = 0;
    while (k < n && ++idx[k] == per) idx[k++] = 0;
    if (k == n) break;
  }
  double top = 0;
  for (auto& [r, f] : best) {
    double step = 0.25;
    while (step > 1e-11) {
      bool moved = false;
      for (Eigen::Index i = 0; i < n; ++i)
        for (double sgn : {1.0, -1.0}) {
          Eigen::VectorXd g = f;
          g[i] += sgn * step;
          const double rg = ratio(g);
          if (rg > r) {
            r = rg;
            f = g;
            moved = true;
          }
        }
      if (!moved) step /= 2;
    }
    top = std::max(top, r);
  }
  return top;
}

}  // namespace testsupport
