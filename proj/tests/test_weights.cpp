#include "support.hpp"

#include "dyadlab/weights.hpp"

#include <cmath>

using namespace dyadlab;
using namespace testsupport;

namespace {

/// The reverse Hoelder constant by per-interval enumeration of the two values.
double rh_oracle(const FunctionRep<Rational>& w, const DyadicMeasure& mu, double gamma) {
  const DyadicTree& t = mu.tree();
  double best = 0;
  for (NodeId id = 0; id < static_cast<NodeId>(t.size()); ++id) {
    double low = 0, high = 0;
    for (auto i = t.leaf_begin(id); i < t.leaf_end(id); ++i) {
      const double mass = to_double(mu.leaf_masses()[static_cast<size_t>(i)]);
      (w.values[static_cast<size_t>(i)] == Rational(1, 2) ? low : high) += mass;
    }
    const double total = low + high;
    const double pw = (low * std::pow(0.5, gamma) + high * std::pow(2.0, gamma)) / total;
    const double avg = (0.5 * low + 2.0 * high) / total;
    best = std::max(best, std::pow(pw, 1 / gamma) / avg);
  }
  return best;
}

std::vector<DyadicMeasure> weight_measures() {
  std::vector<DyadicMeasure> out;
  out.push_back(measures::lebesgue(tree(0, 5)));
  out.push_back(measures::random_sibling_balanced(tree(0, 5), 4, 4.0));
  out.push_back(measures::random_doubling(tree(0, 5), 4, 3.0));
  out.push_back(measures::mu_k(tree(-2, 6), 3, true));
  out.push_back(random_integer_measure(tree(-1, 4, {0, 1}), 5));
  return out;
}

FunctionRep<Rational> log_of(const FunctionRep<double>& w) {
  FunctionRep<Rational> out(w.tree, std::vector<Rational>(w.size()));
  for (size_t i = 0; i < w.size(); ++i) out.values[i] = exact_rational(std::log(w.values[i]));
  return out;
}

}  // namespace

TEST_SUITE("weights") {
  TEST_CASE("BMO of constants and the b_k family") {
    const auto mu = random_integer_measure(tree(0, 5), 3);
    const auto c = FunctionRep<Rational>::constant(mu.tree_ptr(), Rational(2));
    const auto rep = bmo_norm(c, mu, {1, 2});
    CHECK(rep.norm == 0);
    CHECK(rep.D == 0);
    CHECK(rep.kp_power.at(2) == 0);
    CHECK(error_kind_of([] { bmo_norm(FunctionRep<Rational>::constant(tree(0, 1), Rational(1)),
                                      measures::lebesgue(tree(0, 1)), {}); }) == ErrorKind::TreeTooShallow);
    for (int k = 4; k <= 10; ++k) {
      const auto muk = measures::mu_k(tree(-2, 12), k);
      const auto r = bmo_norm(generators::b_k(muk, k), muk, {1, 2});
      const double D = to_double(r.D) / std::ldexp(1.0, k);
      CHECK(D >= 0.25);
      CHECK(D <= 4.0);
      CHECK(r.kp.at(2) / std::ldexp(1.0, k / 2.0 * 1.0) <= 8.0);
      CHECK(to_double(r.D) <= 2 * to_double(r.norm));
      CHECK(to_double(r.norm) <= 2 * (r.kp.at(1) + to_double(r.D)));
    }
  }

  TEST_CASE("John-Nirenberg profile") {
    const auto mu = measures::lebesgue(tree(0, 10));
    const std::vector<double> grid{0.25, 0.5, 1, 1.5, 2, 3, 4};
    const auto zero = FunctionRep<Rational>::constant(mu.tree_ptr(), Rational(0));
    for (const JnPoint& pt : jn_profile(zero, mu, 0, grid).points) CHECK(pt.fraction == 0);

    // A logarithmic staircase: value j on the shell [2^-j-1, 2^-j), normalized to BMO norm 1.
    FunctionRep<Rational> b = zero;
    const DyadicTree& t = mu.tree();
    for (size_t i = 0; i < t.leaf_count(); ++i) {
      const auto pos = t.interval(t.leaves()[i]).position;
      int j = 10;
      while (j > 0 && (pos >> (10 - j)) != 0) --j;
      b.values[i] = j;
    }
    const Rational norm = bmo_norm(b, mu, {}).norm;
    REQUIRE(norm > 0);
    for (auto& v : b.values) v /= norm;
    const JnProfile prof = jn_profile(b, mu, 0, grid);
    CHECK(prof.delta_hat > 0);
    for (size_t i = 1; i < prof.points.size(); ++i) CHECK(prof.points[i].fraction <= prof.points[i - 1].fraction);
    for (const JnPoint& pt : prof.points)
      CHECK(to_double(pt.fraction) <= 1.5 * prof.c_hat * std::exp(-prof.delta_hat * pt.alpha) + 0.05);
  }

  TEST_CASE("dyadic maximal function") {
    const auto mu = measures::lebesgue(tree(0, 6));
    const auto one = FunctionRep<Rational>::constant(mu.tree_ptr(), Rational(1));
    CHECK(dyadic_maximal(one, mu).values == one.values);
    const auto f = FunctionRep<Rational>::indicator(mu.tree_ptr(), mu.tree().at(iv(6, 0)), Rational(64));
    const auto M = dyadic_maximal(f, mu);
    const DyadicTree& t = mu.tree();
    for (size_t i = 0; i < t.leaf_count(); ++i) {
      Rational best(0);
      for (NodeId a = t.leaves()[i]; a != kNoNode; a = t.is_root(a) ? kNoNode : t.parent(a))
        best = std::max(best, average(f, mu, a));
      CHECK(M.values[i] == best);
      CHECK(M.values[i] >= f.values[i]);
    }
    CHECK(M.values[0] == 64);
    CHECK(M.values[32] == 1);  // x = 1/2
    CHECK(M.values[2] == 16);  // the shell [1/32, 1/16)
    CHECK(dyadic_maximal(f, mu, &one).values == M.values);
    auto neg = f;
    neg.values[3] = -1;
    CHECK(error_kind_of([&] { dyadic_maximal(neg, mu); }) == ErrorKind::NegativeInput);
  }

  TEST_CASE("characteristics of the unit weight") {
    for (const DyadicMeasure& mu : weight_measures()) {
      const Weight<Rational> w(FunctionRep<Rational>::constant(mu.tree_ptr(), Rational(1)));
      CHECK(characteristic(w, mu, Rational(2), WeightClass::Ap).value == 1);
      CHECK(characteristic(w, mu, Rational(2), WeightClass::ApHat).value == 1);
      CHECK(characteristic(w, mu, Rational(2), WeightClass::Ainf).value == 1);
    }
    const auto mu = measures::lebesgue(tree(0, 3));
    const Weight<Rational> w(FunctionRep<Rational>::constant(mu.tree_ptr(), Rational(1)));
    CHECK(error_kind_of([&] { characteristic(w, mu, Rational(1), WeightClass::Ap); }) == ErrorKind::InvalidExponent);
    CHECK(error_kind_of([&] { characteristic(w, mu, Rational(3), WeightClass::Ap); }) == ErrorKind::InvalidExponent);
  }

  TEST_CASE("sibling characteristic matches the brute-force table at p = 2") {
    for (const DyadicMeasure& mu : weight_measures())
      for (std::uint64_t s = 1; s <= 3; ++s) {
        const auto wv = generators::two_valued_weight(mu.tree_ptr(), s, 3) + random_positive_function(mu.tree_ptr(), s);
        const auto rep = characteristic(Weight<Rational>(wv), mu, Rational(2), WeightClass::ApSib);
        CHECK(rep.value == sib_oracle_p2(wv, mu));
      }
  }

  TEST_CASE("dual weights") {
    const auto mu = random_integer_measure(tree(0, 4), 2);
    const auto wv = random_positive_function(mu.tree_ptr(), 2);
    const Weight<Rational> w(wv);
    const auto& sigma = w.dual(Rational(2));
    for (size_t i = 0; i < wv.size(); ++i) CHECK(sigma.values[i] * wv.values[i] == 1);
    CHECK(Weight<Rational>(sigma).dual(Rational(2)).values == wv.values);
    const Weight<Quad> wq(wv.as<Quad>());
    const auto& s3 = wq.dual(Rational(3));
    const Weight<Quad> sigma3(s3);
    const auto& back = sigma3.dual(Rational(3, 2));
    CHECK(max_abs_diff(back, wq.values()) < Quad(1e-28));
    CHECK(dual_exponent(Rational(3)) == Rational(3, 2));
    auto bad = wv;
    bad.values[0] = 0;
    CHECK(error_kind_of([&] { Weight<Rational> x(bad); }) == ErrorKind::NegativeInput);
  }

  TEST_CASE("block weights separate the two classes") {
    for (int n : {4, 8, 16, 32}) {
      const TreePtr t = measures::thm34_tree(n);
      const auto mu = measures::thm34_block(t, n);
      const auto w = generators::thm34_weight<double>(t, n);
      FunctionRep<double> inv = w;
      for (auto& v : inv.values) v = 1 / v;
      CHECK(std::abs(average(inv, mu, iv(n / 2, 1)) - std::sqrt(n / 2.0)) < 1e-12);
      const Weight<double> W(w);
      const auto hat = characteristic(W, mu, Rational(2), WeightClass::ApHat);
      CHECK(hat.value >= 0.5 * std::sqrt(n / 2.0));
      const auto bal = characteristic(W, mu, Rational(2), WeightClass::ApBal);
      CHECK(bal.value <= 5.0);
    }
  }

  TEST_CASE("containments between the classes") {
    for (const DyadicMeasure& mu : weight_measures())
      for (std::uint64_t s = 1; s <= 4; ++s) {
        const auto b = generators::random_bmo(mu, s, 4).as<double>();
        const Weight<double> w = exp_weight(b, 0.7);
        for (int p : {2, 3}) {
          const double ap = characteristic(w, mu, Rational(p), WeightClass::Ap).value;
          const double hat = characteristic(w, mu, Rational(p), WeightClass::ApHat).value;
          const double sib = characteristic(w, mu, Rational(p), WeightClass::ApSib).value;
          CHECK(ap >= 1);
          CHECK(ap <= hat);
          CHECK(sib <= std::pow(2.0, std::max(1, p - 1)) * hat * hat * hat);
        }
        const double ainf = characteristic(w, mu, Rational(2), WeightClass::Ainf).value;
        CHECK(std::isfinite(ainf));
        CHECK(ainf >= 1 - 1e-12);
      }
  }

  TEST_CASE("sibling and balanced characteristics are comparable on balanced measures") {
    for (std::uint64_t s = 1; s <= 4; ++s) {
      const auto mu = measures::random_doubling(tree(0, 6), s, 3.0);
      const double balc = to_double(regularity_characteristics(mu).bal_constant);
      const auto b = generators::random_bmo(mu, s, 4).as<double>();
      const Weight<double> w = exp_weight(b, 0.5);
      const double sib = characteristic(w, mu, Rational(2), WeightClass::ApSib).value;
      const double bal = characteristic(w, mu, Rational(2), WeightClass::ApBal).value;
      CHECK(sib / bal <= std::pow(balc, 4));
      CHECK(bal / sib <= std::pow(balc, 4));
    }
  }

  TEST_CASE("log of an Ahat_2 weight is in BMO") {
    for (const DyadicMeasure& mu : weight_measures())
      for (std::uint64_t s = 1; s <= 4; ++s) {
        const auto b = generators::random_bmo(mu, 10 + s, 4).as<double>();
        const Weight<double> w = exp_weight(b, 0.8);
        const double Q = characteristic(w, mu, Rational(2), WeightClass::ApHat).value;
        const double bmo = to_double(bmo_norm(log_of(w.values()), mu, {}).norm);
        CHECK(bmo <= std::log(2 * Q) + 1);
      }
  }

  TEST_CASE("exponential weights and admissible exponents") {
    const auto mu = measures::lebesgue(tree(0, 8));
    const auto zero = FunctionRep<double>::constant(mu.tree_ptr(), 0.0);
    for (double d : {0.1, 1.0, 10.0})
      CHECK(characteristic(exp_weight(zero, d), mu, Rational(2), WeightClass::ApHat).value == 1);
    for (std::uint64_t s = 1; s <= 5; ++s) {
      auto b = generators::random_bmo(mu, s, 6);
      const Rational norm = bmo_norm(b, mu, {}).norm;
      for (auto& v : b.values) v /= norm;
      const auto bd = b.as<double>();
      const AdmissibleDelta d = find_admissible_delta(bd, mu, Rational(2), 8.0);
      CHECK(d.delta >= 0.1);
      CHECK(d.characteristic <= 64.0);
      CHECK(characteristic(exp_weight(bd, d.delta), mu, Rational(2), WeightClass::ApHat).value <= 64.0);
      CHECK_FALSE(d.path.empty());
    }
  }

  TEST_CASE("reverse Hoelder exponents") {
    const auto mu = measures::lebesgue(tree(0, 6));
    const Weight<double> one(FunctionRep<double>::constant(mu.tree_ptr(), 1.0));
    const ReverseHolder trivial = reverse_holder_exponent(one, mu, 4.0);
    CHECK(trivial.gamma == 4.0);
    CHECK(trivial.constant == doctest::Approx(1.0));

    for (std::uint64_t s = 1; s <= 4; ++s) {
      const auto wv = generators::two_valued_weight(mu.tree_ptr(), s, 4);
      const Weight<double> w(wv.as<double>());
      for (double gamma : {1.5, 2.0, 3.0})
        CHECK(reverse_holder_constant(wv.as<double>(), mu, gamma) == doctest::Approx(rh_oracle(wv, mu, gamma)).epsilon(1e-12));
      ReverseHolderOptions opts;
      opts.ceiling = 1.2;
      const ReverseHolder rh = reverse_holder_exponent(w, mu, 4.0, opts);
      // Oracle bisection on the enumerated constant, which is non-decreasing in gamma.
      double lo = 1.0, hi = 4.0;
      if (rh_oracle(wv, mu, hi) <= opts.ceiling) lo = hi;
      else
        for (int i = 0; i < 60; ++i) {
          const double mid = (lo + hi) / 2;
          (rh_oracle(wv, mu, mid) <= opts.ceiling ? lo : hi) = mid;
        }
      CHECK(rh.gamma == doctest::Approx(lo).epsilon(1e-6));
      CHECK(rh.constant <= opts.ceiling);
      opts.ceiling = 1.0 + 1e-9;
      CHECK(error_kind_of([&] { reverse_holder_exponent(w, mu, 4.0, opts); }) == ErrorKind::NoExponent);
    }
  }

  TEST_CASE("stopping maximal intervals") {
    const auto mu = random_integer_measure(tree(-1, 5, {0, 1}), 4);
    const auto one = FunctionRep<Rational>::constant(mu.tree_ptr(), Rational(1));
    CHECK(stopping_maximal_intervals(one, mu, Rational(2)).empty());
    const auto roots = stopping_maximal_intervals(one, mu, Rational(1, 2));
    CHECK(roots == std::vector<DyadicInterval>{iv(-1, 0), iv(-1, 1)});

    for (std::uint64_t s = 1; s <= 4; ++s) {
      const auto b = generators::random_bmo(mu, s, 5).as<double>();
      const Weight<double> w = exp_weight(b, 0.8);
      const double Q = characteristic(w, mu, Rational(2), WeightClass::ApHat).value;
      const auto avg = node_averages(w.values(), mu);
      double lambda = 0;
      for (NodeId r : mu.tree().roots()) lambda = std::max(lambda, avg[r]);
      for (double scale : {1.0, 1.5, 2.5}) {
        const auto I = stopping_maximal_intervals(w.values(), mu, lambda * scale);
        for (size_t a = 0; a < I.size(); ++a) {
          CHECK(average(w.values(), mu, I[a]) > lambda * scale);
          CHECK(average(w.values(), mu, I[a]) <= Q * lambda * scale * (1 + 1e-12));
          for (size_t c = a + 1; c < I.size(); ++c) CHECK_FALSE((I[a].contains(I[c]) || I[c].contains(I[a])));
        }
      }
    }
  }

  TEST_CASE("characteristic CSV rows") {
    const auto mu = measures::lebesgue(tree(0, 3));
    const Weight<Rational> w(FunctionRep<Rational>::constant(mu.tree_ptr(), Rational(1)));
    const auto rep = characteristic(w, mu, Rational(2), WeightClass::ApHat);
    CHECK(characteristic_csv_header() == "classTag,p,value,witnessI,witnessJ,depth");
    CHECK(characteristic_csv_row(rep, 3) == "ApHat,2,1,0:0,0:0,3");
    CHECK(parse_weight_class("ApSib") == WeightClass::ApSib);
    CHECK(weight_class_name(WeightClass::Ainf) == "Ainf");
  }
}
