#pragma once

#include "dyadlab/haar.hpp"

#include <cstdint>

namespace dyadlab::generators {

/// 1 at the integers, 2^k elsewhere, averaged over each leaf of the tree carrying mu_k.
FunctionRep<Rational> b_k(const DyadicMeasure& mu_k, int k);

/// Mean-zero martingale increments a_I (mu(I+) 1_{I-} - mu(I-) 1_{I+}) / mu(I) on every
/// node less than `resolution` levels below a root, a_I in {-1, -1/2, 0, 1/2, 1}.
/// Choices are keyed by interval, so the function does not depend on the tree depth.
FunctionRep<Rational> random_bmo(const DyadicMeasure& mu, std::uint64_t seed, int resolution = 6);

/// A nonnegative function: a base level in {0, 1} plus `bumps` indicators of random
/// nodes at most `resolution` levels deep with heights 2^u, u in [0, 10].
FunctionRep<Rational> random_nonnegative(const TreePtr& tree, std::uint64_t seed, int resolution = 6, int bumps = 4);

/// Values 1/2 or 2, constant on nodes `resolution` levels below the roots.
FunctionRep<Rational> two_valued_weight(const TreePtr& tree, std::uint64_t seed, int resolution = 4);

/// The block weight: 1/sqrt(k) on I_k^s for k <= n/2, 1/sqrt(n-k+1) for n/2 < k <= n, 1 otherwise.
template <FloatScalar T>
FunctionRep<T> thm34_weight(const TreePtr& tree, int n);

/// The glued weight: block 0 carries the n = 2 weight and block n >= 1 the n' = 2(n+1) weight.
template <FloatScalar T>
FunctionRep<T> thm34_glued_weight(const TreePtr& tree);

}  // namespace dyadlab::generators
