#pragma once

#include "dyadlab/haar.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace dyadlab {

/// One coefficient alpha^I_{J,K}: sends <f,h_J> to the h_K component.
struct ShiftTerm {
  DyadicInterval I;
  DyadicInterval J;
  DyadicInterval K;
  Rational value;
};

enum class ShiftKind { dyadicHilbert, classicalS, siblingShift, slice, general };

/// A Haar shift of complexity (u, v). Builtins expand lazily over a tree;
/// general shifts carry explicit terms.
class HaarShiftSpec {
 public:
  using AlphaMap = std::unordered_map<DyadicInterval, Rational, DyadicIntervalHash>;

  /// h_{I+} -> h_{I-}, h_{I-} -> -h_{I+}.
  static HaarShiftSpec dyadic_hilbert();
  /// h_I -> h_{I-} - h_{I+}.
  static HaarShiftSpec classical_s();
  /// h_I -> alpha_I h_{I^s}; intervals missing from the map use fallback.
  static HaarShiftSpec sibling_shift(AlphaMap alpha, Rational fallback = Rational(0));
  /// sum_I alpha_I <f, h_{I_u^m}> h_{I_v^n}.
  static HaarShiftSpec slice(int u, int v, std::int64_t m, std::int64_t n, AlphaMap alpha, Rational fallback = Rational(0));
  static HaarShiftSpec general(int u, int v, std::vector<ShiftTerm> terms);

  ShiftKind kind() const { return kind_; }
  int u() const { return u_; }
  int v() const { return v_; }
  std::int64_t slice_m() const { return m_; }
  std::int64_t slice_n() const { return n_; }
  std::string name() const;

  /// All coefficients whose top interval I is an internal node of the tree.
  std::vector<ShiftTerm> expand(const DyadicTree& tree) const;
  /// The transpose in the Haar basis (the L^2(mu) adjoint).
  HaarShiftSpec adjoint(const DyadicTree& tree) const;
  /// Largest |alpha| over the expansion.
  Rational sup_abs(const DyadicTree& tree) const;
  /// Split into the 2^(u+v) slices T_{m,n}.
  std::vector<HaarShiftSpec> slices(const DyadicTree& tree) const;

 private:
  ShiftKind kind_ = ShiftKind::general;
  int u_ = 0, v_ = 0;
  std::int64_t m_ = 0, n_ = 0;
  AlphaMap alpha_;
  Rational fallback_{0};
  std::vector<ShiftTerm> terms_;
};

/// +1 for a right child, -1 for a left child.
inline int sign_of(const DyadicInterval& I) { return I.is_right_child() ? 1 : -1; }

/// Coefficient map bound to node ids; terms touching a Haar function absent
/// from the tree are dropped.
template <FloatScalar T>
struct BoundShift {
  std::vector<NodeId> from;
  std::vector<NodeId> to;
  std::vector<T> value;
};

template <FloatScalar T>
BoundShift<T> bind_shift(const HaarShiftSpec& spec, const DyadicTree& tree) {
  BoundShift<T> out;
  for (const ShiftTerm& term : spec.expand(tree)) {
    auto j = tree.find(term.J);
    auto k = tree.find(term.K);
    if (!j || !k || tree.is_leaf(*j) || tree.is_leaf(*k)) continue;
    out.from.push_back(*j);
    out.to.push_back(*k);
    out.value.push_back(convert<T>(term.value));
  }
  return out;
}

/// Coefficient-side application: analyze, reindex, synthesize.
template <FloatScalar T>
std::vector<T> apply_bound_coefficients(const BoundShift<T>& shift, const std::vector<T>& coef) {
  std::vector<T> out(coef.size(), T(0));
  for (size_t i = 0; i < shift.from.size(); ++i) out[shift.to[i]] += shift.value[i] * coef[shift.from[i]];
  return out;
}

template <FloatScalar T>
FunctionRep<T> apply_bound(const BoundShift<T>& shift, const FunctionRep<T>& f, const DyadicMeasure& mu) {
  return from_haar_coefficients(apply_bound_coefficients(shift, haar_coefficients(f, mu)), mu);
}

template <FloatScalar T>
FunctionRep<T> apply_shift(const HaarShiftSpec& spec, const FunctionRep<T>& f, const DyadicMeasure& mu) {
  require_on(f, mu);
  return apply_bound(bind_shift<T>(spec, mu.tree()), f, mu);
}

/// T(bf) - b T(f), computed literally.
template <FloatScalar T>
FunctionRep<T> commutator(const HaarShiftSpec& spec, const FunctionRep<T>& b, const FunctionRep<T>& f,
                          const DyadicMeasure& mu) {
  const BoundShift<T> bound = bind_shift<T>(spec, mu.tree());
  return apply_bound(bound, b * f, mu) - b * apply_bound(bound, f, mu);
}

struct RemainderShift {
  HaarShiftSpec spec;
  Rational sup_coefficient;
  /// 2||b|| for the Hilbert transform, (u+v)||b|| for slices and the classical shift.
  Rational bound;
};

/// The shift equal to [T, Lambda_b^0]: alpha (<b>_J - <b>_K) on each term.
RemainderShift remainder_shift(const HaarShiftSpec& spec, const FunctionRep<Rational>& b, const DyadicMeasure& mu);

/// "I=k:p J=k:p K=k:p value" lines.
void write_shift(std::ostream& out, const HaarShiftSpec& spec, const DyadicTree& tree);
HaarShiftSpec read_shift(std::istream& in);
/// Builtin names: dyadicHilbert, classicalS.
HaarShiftSpec builtin_shift(const std::string& name);

}  // namespace dyadlab
