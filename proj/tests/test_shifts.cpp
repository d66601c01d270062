#include "support.hpp"

#include "dyadlab/shifts.hpp"
#include "dyadlab/weights.hpp"

#include <sstream>

using namespace dyadlab;
using namespace testsupport;

namespace {

std::vector<DyadicMeasure> shift_zoo() {
  std::vector<DyadicMeasure> out;
  out.push_back(measures::lebesgue(tree(0, 6)));
  out.push_back(measures::mu_k(tree(-2, 8), 3));
  out.push_back(measures::random_sibling_balanced(tree(0, 7), 5, 4.0));
  out.push_back(random_integer_measure(tree(-1, 5, {0, 1}), 6));
  return out;
}

/// Zero root averages and zero coefficients on the roots, whose sibling pairing exits the tree.
FunctionRep<Quad> sibling_complete(const FunctionRep<Quad>& f, const DyadicMeasure& mu) {
  std::vector<Quad> coef = haar_coefficients(f, mu);
  for (NodeId r : mu.tree().roots()) coef[r] = 0;
  return from_haar_coefficients(coef, mu);
}

Quad l2_norm(const FunctionRep<Quad>& f, const DyadicMeasure& mu) { return sqrt_value(inner_product(f, f, mu)); }

}  // namespace

TEST_SUITE("shifts") {
  TEST_CASE("Hilbert transform on Haar functions") {
    for (const DyadicMeasure& mu : shift_zoo()) {
      const DyadicTree& t = mu.tree();
      const HaarShiftSpec H = HaarShiftSpec::dyadic_hilbert();
      for (NodeId id : t.internal_nodes()) {
        const NodeId lo = t.left(id), hi = t.right(id);
        if (t.is_leaf(lo)) continue;
        const auto hp = apply_shift(H, haar_function<Quad>(mu, hi), mu);
        CHECK(max_abs_diff(hp, haar_function<Quad>(mu, lo)) < Quad(1e-25));
        const auto hm = apply_shift(H, haar_function<Quad>(mu, lo), mu);
        CHECK(max_abs_diff(hm, scaled(haar_function<Quad>(mu, hi), Quad(-1))) < Quad(1e-25));
      }
      const auto one = FunctionRep<Quad>::constant(mu.tree_ptr(), Quad(1));
      CHECK(max_abs_diff(apply_shift(H, one, mu), FunctionRep<Quad>::constant(mu.tree_ptr(), Quad(0))) < Quad(1e-30));
    }
  }

  TEST_CASE("classical shift on Haar functions") {
    const auto mu = measures::random_sibling_balanced(tree(0, 6), 2, 4.0);
    const DyadicTree& t = mu.tree();
    const HaarShiftSpec S = HaarShiftSpec::classical_s();
    CHECK(S.u() == 0);
    CHECK(S.v() == 1);
    for (NodeId id : t.internal_nodes()) {
      if (t.is_leaf(t.left(id))) continue;
      const auto out = apply_shift(S, haar_function<Quad>(mu, id), mu);
      const auto expected = haar_function<Quad>(mu, t.left(id)) - haar_function<Quad>(mu, t.right(id));
      CHECK(max_abs_diff(out, expected) < Quad(1e-25));
    }
  }

  TEST_CASE("commutator with a constant vanishes") {
    const auto mu = measures::mu_k(tree(-2, 7), 4);
    const auto b = FunctionRep<Quad>::constant(mu.tree_ptr(), Quad(3));
    const auto f = random_rational_function(mu.tree_ptr(), 3).as<Quad>();
    const auto c = commutator(HaarShiftSpec::dyadic_hilbert(), b, f, mu);
    CHECK(max_abs_diff(c, FunctionRep<Quad>::constant(mu.tree_ptr(), Quad(0))) < Quad(1e-28));
  }

  TEST_CASE("testing the commutator with the generation k+1 expectation") {
    // [H, E_{k+1} b] h_{I-} = -(<b>_{I-} - <b>_{I+}) h_{I+} with the left/right orientation.
    for (const DyadicMeasure& mu : shift_zoo()) {
      const DyadicTree& t = mu.tree();
      const auto b = random_rational_function(mu.tree_ptr(), 41);
      const auto avg = node_averages(b, mu);
      for (NodeId id : t.internal_nodes()) {
        const NodeId lo = t.left(id), hi = t.right(id);
        if (t.is_leaf(lo) || t.is_leaf(hi)) continue;
        const int k = t.interval(id).scale;
        const auto eb = expectation(b, mu, k + 1).as<Quad>();
        const auto out = commutator(HaarShiftSpec::dyadic_hilbert(), eb, haar_function<Quad>(mu, lo), mu);
        const Quad gap = to_quad(avg[lo]) - to_quad(avg[hi]);
        const auto expected = scaled(haar_function<Quad>(mu, hi), Quad(-gap));
        CHECK(max_abs_diff(out, expected) < Quad(1e-22));
      }
    }
  }

  TEST_CASE("commutator splits along the first paraproduct decomposition") {
    for (const DyadicMeasure& mu : shift_zoo()) {
      const auto b = random_rational_function(mu.tree_ptr(), 51).as<Quad>();
      const auto f = random_rational_function(mu.tree_ptr(), 52).as<Quad>();
      const HaarShiftSpec H = HaarShiftSpec::dyadic_hilbert();
      auto comm_with = [&](ParaproductKind kind) {
        return apply_shift(H, paraproduct(kind, b, f, mu), mu) - paraproduct(kind, b, apply_shift(H, f, mu), mu);
      };
      const auto total = comm_with(ParaproductKind::piB) + comm_with(ParaproductKind::deltaB) +
                         comm_with(ParaproductKind::lambda0);
      CHECK(max_abs_diff(commutator(H, b, f, mu), total) < Quad(1e-22));
    }
  }

  TEST_CASE("remainder shift equals the commutator with Lambda_b^0") {
    int triples = 0;
    for (const DyadicMeasure& mu : shift_zoo())
      for (std::uint64_t s = 1; s <= 25; ++s) {
        const auto b = random_rational_function(mu.tree_ptr(), 300 + s);
        const auto f = random_rational_function(mu.tree_ptr(), 400 + s).as<Quad>();
        const auto bq = b.as<Quad>();
        const HaarShiftSpec H = HaarShiftSpec::dyadic_hilbert();
        const RemainderShift R = remainder_shift(H, b, mu);
        const auto lhs = apply_shift(R.spec, f, mu);
        const auto rhs = apply_shift(H, paraproduct(ParaproductKind::lambda0, bq, f, mu), mu) -
                         paraproduct(ParaproductKind::lambda0, bq, apply_shift(H, f, mu), mu);
        CHECK(max_abs_diff(lhs, rhs) < Quad(1e-22));
        const BmoReport<Rational> bmo = bmo_norm(b, mu, {});
        CHECK(R.sup_coefficient <= R.bound);
        CHECK(R.bound == 2 * bmo.norm);
        ++triples;
      }
    CHECK(triples == 100);
  }

  TEST_CASE("remainder of the classical shift and of slices") {
    const auto mu = random_integer_measure(tree(0, 5), 8);
    const auto b = random_rational_function(mu.tree_ptr(), 9);
    const auto f = random_rational_function(mu.tree_ptr(), 10).as<Quad>();
    const auto bq = b.as<Quad>();
    HaarShiftSpec::AlphaMap alpha;
    for (NodeId id : mu.tree().internal_nodes()) alpha[mu.tree().interval(id)] = Rational(static_cast<int>(id % 5) - 2, 3);
    for (const HaarShiftSpec& T : {HaarShiftSpec::classical_s(), HaarShiftSpec::slice(1, 2, 2, 3, alpha)}) {
      const RemainderShift R = remainder_shift(T, b, mu);
      const auto rhs = apply_shift(T, paraproduct(ParaproductKind::lambda0, bq, f, mu), mu) -
                       paraproduct(ParaproductKind::lambda0, bq, apply_shift(T, f, mu), mu);
      CHECK(max_abs_diff(apply_shift(R.spec, f, mu), rhs) < Quad(1e-22));
      CHECK(R.sup_coefficient <= R.bound);
    }
    const HaarShiftSpec G = HaarShiftSpec::general(0, 0, {{iv(0, 0), iv(0, 0), iv(0, 0), Rational(1)}});
    CHECK(error_kind_of([&] { remainder_shift(G, b, mu); }) == ErrorKind::UnsupportedShift);
  }

  TEST_CASE("remainder coefficients vanish for constants and grow like 2^k for b_k") {
    const auto mu = random_integer_measure(tree(0, 5), 12);
    const auto c = FunctionRep<Rational>::constant(mu.tree_ptr(), Rational(4));
    CHECK(remainder_shift(HaarShiftSpec::dyadic_hilbert(), c, mu).sup_coefficient == 0);
    for (int k = 4; k <= 10; ++k) {
      const auto muk = measures::mu_k(tree(-2, 12), k);
      const RemainderShift R = remainder_shift(HaarShiftSpec::dyadic_hilbert(), generators::b_k(muk, k), muk);
      const double ratio = to_double(R.sup_coefficient) / std::ldexp(1.0, k);
      CHECK(ratio >= 0.5);
      CHECK(ratio <= 2.0);
    }
  }

  TEST_CASE("slices of the Hilbert transform and the classical shift") {
    const TreePtr t = tree(0, 6);
    const auto mu = measures::random_sibling_balanced(t, 7, 4.0);
    const auto f = random_rational_function(t, 70).as<Quad>();
    auto slice = [](int m, int n, int sign) { return HaarShiftSpec::slice(1, 1, m, n, {}, Rational(sign)); };
    const auto H = apply_shift(HaarShiftSpec::dyadic_hilbert(), f, mu);
    const auto Hs = apply_shift(slice(2, 1, 1), f, mu) + apply_shift(slice(1, 2, -1), f, mu);
    CHECK(max_abs_diff(H, Hs) < Quad(1e-25));

    // The classical shift has complexity (0,1): two slices.
    const HaarShiftSpec S = HaarShiftSpec::classical_s();
    const auto slices = S.slices(*t);
    CHECK(slices.size() == 2);
    FunctionRep<Quad> sum = FunctionRep<Quad>::constant(t, Quad(0));
    for (const HaarShiftSpec& sl : slices) sum = sum + apply_shift(sl, f, mu);
    CHECK(max_abs_diff(sum, apply_shift(S, f, mu)) < Quad(1e-25));

    CHECK(error_kind_of([] { HaarShiftSpec::slice(1, 1, 3, 1, {}); }) == ErrorKind::InvalidIndex);
    CHECK(error_kind_of([] { HaarShiftSpec::slice(2, 1, 1, 0, {}); }) == ErrorKind::InvalidIndex);
  }

  TEST_CASE("slice expansion of the builtin Hilbert coefficients") {
    const TreePtr t = tree(0, 5);
    const auto slices = HaarShiftSpec::dyadic_hilbert().slices(*t);
    int nonzero = 0;
    for (const HaarShiftSpec& sl : slices) {
      const auto terms = sl.expand(*t);
      bool any = false;
      for (const ShiftTerm& term : terms) any = any || term.value != 0;
      if (!any) continue;
      ++nonzero;
      const int sign = sl.slice_m() == 2 && sl.slice_n() == 1 ? 1 : -1;
      CHECK(((sl.slice_m() == 2 && sl.slice_n() == 1) || (sl.slice_m() == 1 && sl.slice_n() == 2)));
      for (const ShiftTerm& term : terms) CHECK(term.value == sign);
    }
    CHECK(nonzero == 2);
  }

  TEST_CASE("slice-sum identity on random general coefficients") {
    const TreePtr t = tree(0, 6);
    const auto mu = random_integer_measure(t, 13);
    auto rng = keyed_rng(13, 1);
    std::vector<ShiftTerm> terms;
    for (NodeId id : t->internal_nodes()) {
      const DyadicInterval I = t->interval(id);
      if (I.scale + 2 > 6) continue;
      for (std::int64_t m = 1; m <= 4; ++m)
        for (std::int64_t n = 1; n <= 2; ++n)
          terms.push_back({I, sliced_subinterval(I, 2, m), sliced_subinterval(I, 1, n),
                           Rational(uniform_int(rng, -6, 6), 5)});
    }
    const HaarShiftSpec G = HaarShiftSpec::general(2, 1, terms);
    const auto f = random_rational_function(t, 14).as<Quad>();
    FunctionRep<Quad> sum = FunctionRep<Quad>::constant(t, Quad(0));
    const auto slices = G.slices(*t);
    CHECK(slices.size() == 8);
    for (const HaarShiftSpec& sl : slices) sum = sum + apply_shift(sl, f, mu);
    CHECK(max_abs_diff(sum, apply_shift(G, f, mu)) < Quad(1e-25));
    CHECK(G.sup_abs(*t) <= Rational(6, 5));
  }

  TEST_CASE("H^2 = -Id, anti-self-adjointness and isometry on the sibling-complete span") {
    const HaarShiftSpec H = HaarShiftSpec::dyadic_hilbert();
    for (const DyadicMeasure& mu : shift_zoo())
      for (std::uint64_t s = 1; s <= 5; ++s) {
        const auto f = sibling_complete(random_rational_function(mu.tree_ptr(), 500 + s).as<Quad>(), mu);
        const auto g = sibling_complete(random_rational_function(mu.tree_ptr(), 600 + s).as<Quad>(), mu);
        const auto Hf = apply_shift(H, f, mu);
        CHECK(max_abs_diff(apply_shift(H, Hf, mu), scaled(f, Quad(-1))) < Quad(1e-22));
        const Quad a = inner_product(Hf, g, mu);
        const Quad b = inner_product(f, apply_shift(H, g, mu), mu);
        CHECK(abs_value(Quad(a + b)) < Quad(1e-22));
        CHECK(abs_value(Quad(l2_norm(Hf, mu) - l2_norm(f, mu))) < Quad(1e-22));
      }
  }

  TEST_CASE("adjoint and coefficient files") {
    const TreePtr t = tree(0, 4);
    const auto mu = random_integer_measure(t, 15);
    const HaarShiftSpec S = HaarShiftSpec::classical_s();
    const auto f = random_rational_function(t, 16).as<Quad>();
    const auto g = random_rational_function(t, 17).as<Quad>();
    const Quad a = inner_product(apply_shift(S, f, mu), g, mu);
    const Quad b = inner_product(f, apply_shift(S.adjoint(*t), g, mu), mu);
    CHECK(abs_value(Quad(a - b)) < Quad(1e-25));
    std::stringstream buffer;
    write_shift(buffer, S, *t);
    const HaarShiftSpec back = read_shift(buffer);
    CHECK(max_abs_diff(apply_shift(back, f, mu), apply_shift(S, f, mu)) < Quad(1e-28));
    CHECK(builtin_shift("dyadicHilbert").kind() == ShiftKind::dyadicHilbert);
    CHECK(sign_of(iv(3, 5)) == 1);
    CHECK(sign_of(iv(3, 4)) == -1);
  }
}
