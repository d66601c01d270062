#include "support.hpp"

#include <sstream>

using namespace dyadlab;
using namespace testsupport;

namespace {

/// Independent summation of unit atoms at integers plus density 2^-k over [a, b), both dyadic.
Rational muk_oracle_mass(int k, const Rational& a, const Rational& b) {
  Rational total = (b - a) * pow2(-k);
  for (long z = -64; z <= 64; ++z)
    if (Rational(z) >= a && Rational(z) < b) total += 1;
  return total;
}

std::vector<DyadicMeasure> measure_zoo() {
  std::vector<DyadicMeasure> out;
  out.push_back(measures::lebesgue(tree(0, 6)));
  out.push_back(measures::mu_k(tree(-2, 8), 3));
  out.push_back(measures::sib_not_balanced(tree(-4, 8)));
  out.push_back(measures::thm34_block(measures::thm34_tree(6), 6));
  out.push_back(measures::thm34_glued(measures::thm34_glued_tree(3, 2, 2), 3));
  for (std::uint64_t s = 1; s <= 3; ++s) {
    out.push_back(measures::random_sibling_balanced(tree(0, 7), s, 4.0));
    out.push_back(measures::random_doubling(tree(0, 7), s, 3.0));
    out.push_back(random_integer_measure(tree(0, 5), s));
  }
  return out;
}

}  // namespace

TEST_SUITE("measures") {
  TEST_CASE("Lebesgue masses and m") {
    const DyadicMeasure mu = measures::lebesgue(tree(0, 5));
    CHECK(mu.mass(iv(1, 0)) == Rational(1, 2));
    for (const Rational& leaf : mu.leaf_masses()) CHECK(leaf == Rational(1, 32));
    CHECK(mu.m(iv(0, 0)) == Rational(1, 4));
    CHECK(error_kind_of([&] { mu.m(iv(5, 3)); }) == ErrorKind::OutOfTree);
    CHECK(error_kind_of([&] { mu.mass(iv(6, 0)); }) == ErrorKind::OutOfTree);
  }

  TEST_CASE("muK(2) masses against an independent summation") {
    const DyadicMeasure mu = measures::mu_k(tree(-2, 6), 2);
    CHECK(mu.mass(iv(0, 0)) == Rational(5, 4));
    CHECK(mu.mass(iv(1, 0)) == Rational(9, 8));
    CHECK(mu.mass(iv(1, 1)) == Rational(1, 8));
    CHECK(mu.m(iv(0, 0)) == Rational(9, 80));
    const DyadicTree& t = mu.tree();
    for (NodeId id = 0; id < static_cast<NodeId>(t.size()); ++id) {
      const DyadicInterval I = t.interval(id);
      CHECK(mu.mass(id) == muk_oracle_mass(2, I.left(), I.right()));
    }
    CHECK_FALSE(mu.atomless());
    CHECK(measures::mu_k(tree(-2, 6), 2, true).atomless());
  }

  TEST_CASE("additivity, positivity and the m bounds on every constructed measure") {
    for (const DyadicMeasure& mu : measure_zoo()) {
      const DyadicTree& t = mu.tree();
      for (NodeId id : t.internal_nodes()) {
        CHECK(mu.mass(id) == mu.mass(t.left(id)) + mu.mass(t.right(id)));
        const Rational lo = std::min(mu.mass(t.left(id)), mu.mass(t.right(id)));
        const Rational r = mu.m(id) / lo;
        CHECK(r >= Rational(1, 2));
        CHECK(r < 1);
      }
      for (const Rational& leaf : mu.leaf_masses()) CHECK(leaf > 0);
    }
  }

  TEST_CASE("regularity of Lebesgue") {
    const RegularityReport r = regularity_characteristics(measures::lebesgue(tree(0, 6)));
    CHECK(r.sib_constant == 1);
    CHECK(r.bal_constant == 2);
    CHECK(r.m_increasing_constant == Rational(1, 2));
    CHECK(error_kind_of([] { regularity_characteristics(measures::lebesgue(tree(0, 1))); }) ==
          ErrorKind::TreeTooShallow);
  }

  TEST_CASE("muK is uniformly sibling balanced") {
    for (int k = 2; k <= 10; ++k) {
      const RegularityReport r = regularity_characteristics(measures::mu_k(tree(-2, 12), k));
      CHECK(r.sib_constant >= 1);
      CHECK(r.sib_constant <= 4);
    }
  }

  TEST_CASE("the density-plus-atoms measure is sibling balanced but not balanced") {
    double previous = 0;
    for (int R = 4; R <= 10; R += 2) {
      const RegularityReport r = regularity_characteristics(measures::sib_not_balanced(tree(-R, R + 2)));
      const double bal = to_double(r.bal_constant);
      CHECK(to_double(r.sib_constant) <= 8);
      // balConstant grows at least like 2^R along the shells.
      CHECK(bal >= std::ldexp(1.0, R) / 8);
      CHECK(bal > previous);
      previous = bal;
    }
  }

  TEST_CASE("block measure masses") {
    for (int n : {4, 8, 16}) {
      const DyadicMeasure mu = measures::thm34_block(measures::thm34_tree(n), n);
      CHECK(mu.mass(iv(0, 0)) == 1);
      CHECK(mu.mass(iv(1, 0)) == Rational(1, 2));
      CHECK(mu.mass(iv(1, 1)) == Rational(1, 2));
      CHECK(mu.mass(iv(2, 1)) == Rational(1, 8));
      for (int k = 2; k <= n + 2; ++k) {
        const Rational b = k <= n ? Rational(1, k * k) : Rational(1, n * n);
        // mu(I_k^s) = b_k mu(I_{k-1}) and mu(I_k) = a_k mu(I_{k-1}).
        CHECK(mu.mass(iv(k, 1)) == b * mu.mass(iv(k - 1, 0)));
        CHECK(mu.mass(iv(k, 0)) == (1 - b) * mu.mass(iv(k - 1, 0)));
      }
      for (int k = 1; k <= n; ++k) {
        const double mass = to_double(mu.mass(iv(k, 0)));
        CHECK(mass >= 0.25);
        CHECK(mass <= 1.0);
        const double mk = to_double(mu.m(iv(k, 0))) * k * k;
        CHECK(mk >= 0.05);
        CHECK(mk <= 4.0);
      }
    }
    CHECK(error_kind_of([] { measures::thm34_block(tree(0, 4), 4); }) == ErrorKind::UnsupportedTree);
  }

  TEST_CASE("block-index and glued-location helpers") {
    CHECK(measures::thm34_block_index(iv(3, 1)) == 3);
    CHECK(measures::thm34_block_index(iv(5, 3)) == 4);
    CHECK(measures::thm34_block_index(iv(5, 0)) == 0);
    const auto loc = measures::thm34_glued_locate(iv(0, 5));
    REQUIRE(loc.has_value());
    CHECK(loc->block == 3);
  }

  TEST_CASE("balanced implies sibling balanced and the m-increasing slack") {
    for (const DyadicMeasure& mu : measure_zoo()) {
      const RegularityReport r = regularity_characteristics(mu);
      CHECK(r.sib_constant >= 1);
      CHECK(r.bal_constant >= 1);
      CHECK(r.sib_constant <= r.bal_constant * r.bal_constant);
      CHECK(r.m_increasing_constant <= r.sib_constant);
      const Rational tight = tightest_m_increasing(mu);
      CHECK(tight == r.m_increasing_constant);
      const DyadicTree& t = mu.tree();
      for (NodeId id : t.internal_nodes())
        if (!t.is_root(id)) CHECK(mu.m(id) <= 2 * r.sib_constant * mu.m(t.parent(id)));
    }
  }

  TEST_CASE("random sibling balanced measures respect the target") {
    for (std::uint64_t s = 1; s <= 5; ++s) {
      const DyadicMeasure mu = measures::random_sibling_balanced(tree(0, 10), s, 4.0);
      const RegularityReport r = regularity_characteristics(mu);
      CHECK(to_double(r.sib_constant) <= 4.0 * 1.01);
      CHECK(to_double(r.bal_constant) > 4.0);
    }
  }

  TEST_CASE("measure files round trip") {
    const DyadicMeasure mu = measures::mu_k(tree(-2, 5), 3, true);
    std::stringstream buffer;
    write_measure(buffer, mu);
    const DyadicMeasure back = read_measure(buffer);
    CHECK(back.tree().same_shape(mu.tree()));
    CHECK(back.leaf_masses() == mu.leaf_masses());
    CHECK(back.atomless());
    std::istringstream bad("tree: nonsense\n");
    CHECK(error_kind_of([&] { read_measure(bad); }) == ErrorKind::ParseError);
  }

  TEST_CASE("masses stay exact at 2^-64") {
    const DyadicMeasure mu = measures::mu_k(tree(-2, 2), 64);
    CHECK(mu.mass(iv(0, 0)) == 1 + pow2(-64));
  }
}
