#pragma once

#include "dyadlab/dyadic.hpp"
#include "dyadlab/numeric.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace dyadlab {

/// Positive rational masses on the leaves of a tree, aggregated once at
/// construction. Float copies of masses, m(I) and sqrt m(I) are cached too.
class DyadicMeasure {
 public:
  DyadicMeasure(TreePtr tree, std::vector<Rational> leaf_masses, bool atomless, std::string label = {});

  const DyadicTree& tree() const { return *tree_; }
  const TreePtr& tree_ptr() const { return tree_; }
  bool atomless() const { return atomless_; }
  const std::string& label() const { return label_; }

  const std::vector<Rational>& leaf_masses() const { return leaf_mass_; }
  const Rational& mass(NodeId id) const { return mass_[id]; }
  const Rational& mass(const DyadicInterval& I) const { return mass_[tree_->at(I)]; }
  /// m(I) = mu(I-) mu(I+) / mu(I); OutOfTree for leaves.
  const Rational& m(NodeId id) const;
  const Rational& m(const DyadicInterval& I) const { return m(tree_->at(I)); }
  /// m(I) for internal nodes and 0 for leaves, which carry no Haar function.
  const Rational& m_or_zero(NodeId id) const { return m_[id]; }

  template <Scalar T>
  const std::vector<T>& masses() const {
    if constexpr (std::is_same_v<T, Rational>) return mass_;
    else if constexpr (std::is_same_v<T, Quad>) return mass_q_;
    else return mass_d_;
  }
  /// Per node, 0 on leaves.
  template <Scalar T>
  const std::vector<T>& m_values() const {
    if constexpr (std::is_same_v<T, Rational>) return m_;
    else if constexpr (std::is_same_v<T, Quad>) return m_q_;
    else return m_d_;
  }
  template <FloatScalar T>
  const std::vector<T>& sqrt_m() const {
    if constexpr (std::is_same_v<T, Quad>) return sqrt_m_q_;
    else return sqrt_m_d_;
  }

  /// A copy with a different atomless flag (same masses).
  DyadicMeasure with_atomless(bool atomless) const;

 private:
  TreePtr tree_;
  std::vector<Rational> leaf_mass_;
  std::vector<Rational> mass_;
  std::vector<Rational> m_;
  std::vector<Quad> mass_q_, m_q_, sqrt_m_q_;
  std::vector<double> mass_d_, m_d_, sqrt_m_d_;
  bool atomless_ = true;
  std::string label_;
};

struct IntervalPair {
  DyadicInterval first;
  DyadicInterval second;
};

struct RegularityReport {
  Rational sib_constant;
  Rational bal_constant;
  Rational m_increasing_constant;
  IntervalPair sib_witness;
  IntervalPair bal_witness;
  IntervalPair m_increasing_witness;
};

/// Tree-restricted [mu]_sib, [mu]_bal and the m-increasing constant.
RegularityReport regularity_characteristics(const DyadicMeasure& mu);

/// Smallest C with m(I) <= C m(parent) over the tree (the tightest m-increasing constant).
Rational tightest_m_increasing(const DyadicMeasure& mu);

namespace measures {

struct Atom {
  Rational point;
  Rational mass;
};

/// Absolutely continuous mass assigned to a leaf.
using LeafDensity = std::function<Rational(const DyadicInterval& leaf)>;

DyadicMeasure lebesgue(TreePtr tree);

/// Density plus point masses; each atom lands on the leaf whose left endpoint it is.
DyadicMeasure density_plus_atoms(TreePtr tree, const LeafDensity& density, const std::vector<Atom>& atoms,
                                 bool atomless, std::string label);

/// Atoms 2^-k at 2^k and (3/2) 2^k, density 1 on [0,1) and 2^(-3k) on [2^k, 2^(k+1)).
/// The atomless variant spreads each atom uniformly over its leaf.
DyadicMeasure sib_not_balanced(TreePtr tree, bool atomless_variant = false);

/// Unit atoms at the integers plus density 2^-k.
DyadicMeasure mu_k(TreePtr tree, int k, bool atomless_variant = false);

/// Tree on [0,1) resolving I_k = [0, 2^-k) to scale n + tail and each I_k^s to
/// `below` generations under it.
TreePtr thm34_tree(int n, int tail = 3, int below = 2);
/// The block measure on [0,1); requires the root [0,1) and leaf scale above n.
DyadicMeasure thm34_block(TreePtr tree, int n);
/// k with I inside I_k^s = [2^-k, 2^(1-k)), or 0 when I = [0, 2^-scale). I is taken inside [0,1).
int thm34_block_index(const DyadicInterval& I);

/// Blocks n = 0..blocks glued on [0, 2^blocks); block n is the rescaled measure with parameter 2(n+1).
TreePtr thm34_glued_tree(int blocks, int tail = 3, int below = 2);
DyadicMeasure thm34_glued(TreePtr tree, int blocks);
/// For I inside the glued support: block number, the interval relative to [0,1), and the mass factor.
struct GluedLocation {
  int block;
  DyadicInterval relative;
  Rational factor;
};
std::optional<GluedLocation> thm34_glued_locate(const DyadicInterval& I);

/// Random splits chosen sibling pair by sibling pair so that m(I)/m(I^s) stays within
/// target; the heavy sibling splits unevenly, so the result is far from doubling.
DyadicMeasure random_sibling_balanced(TreePtr tree, std::uint64_t seed, double target_const, double split_ratio = 64.0);

/// Independent random splits with child mass ratio in [1/ratio, ratio]; balanced.
DyadicMeasure random_doubling(TreePtr tree, std::uint64_t seed, double ratio);

}  // namespace measures

void write_measure(std::ostream& out, const DyadicMeasure& mu);
DyadicMeasure read_measure(std::istream& in);

}  // namespace dyadlab
