#include "support.hpp"

#include "dyadlab/normlab.hpp"

#include <array>
#include <cmath>

using namespace dyadlab;
using namespace testsupport;

namespace {

struct SmallCase {
  std::string name;
  LinearOperator op;
};

}  // namespace

TEST_SUITE("normlab") {
  TEST_CASE("dense matrices agree with coefficient-side application") {
    const auto mu = measures::random_sibling_balanced(tree(0, 5), 2, 4.0);
    const auto b = generators::random_bmo(mu, 3, 4).as<double>();
    for (const LinearOperator& op :
         {shift_operator(HaarShiftSpec::dyadic_hilbert(), mu), shift_operator(HaarShiftSpec::classical_s(), mu),
          commutator_operator(HaarShiftSpec::dyadic_hilbert(), b, mu)}) {
      const Eigen::MatrixXd A = dense_matrix(op).matrix;
      auto rng = keyed_rng(4, 4);
      for (int trial = 0; trial < 5; ++trial) {
        Vec f(mu.tree().leaf_count());
        for (double& v : f) v = uniform(rng, -1, 1);
        const Vec g = op.apply(f);
        const Eigen::VectorXd h = A * Eigen::Map<const Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(f.size()));
        for (size_t i = 0; i < g.size(); ++i) CHECK(std::abs(g[i] - h[static_cast<Eigen::Index>(i)]) < 1e-12);
      }
    }
  }

  TEST_CASE("the Hilbert transform has L2 norm one") {
    for (const DyadicMeasure& mu :
         {measures::lebesgue(tree(0, 6)), measures::mu_k(tree(-2, 8), 5), measures::sib_not_balanced(tree(-4, 8)),
          measures::random_sibling_balanced(tree(0, 8), 1, 4.0)}) {
      const LinearOperator H = shift_operator(HaarShiftSpec::dyadic_hilbert(), mu);
      const NormEstimate e = operator_norm(H, mu, nullptr, 2.0);
      CHECK(e.method == NormMethod::exactSpectral);
      CHECK(std::abs(e.value - 1) < 1e-10);
      NormOptions o;
      o.dense_cap = 8;
      const NormEstimate l = operator_norm(H, mu, nullptr, 2.0, o);
      CHECK(l.method == NormMethod::lanczos);
      CHECK(std::abs(l.value - 1) < 1e-8);
    }
  }

  TEST_CASE("commutator with a constant has norm zero") {
    const auto mu = measures::mu_k(tree(-2, 6), 3);
    const auto b = FunctionRep<double>::constant(mu.tree_ptr(), 2.5);
    const auto op = commutator_operator(HaarShiftSpec::dyadic_hilbert(), b, mu);
    CHECK(operator_norm(op, mu, nullptr, 2.0).value < 1e-12);
    CHECK(operator_norm(op, mu, nullptr, 3.0).value < 1e-12);
  }

  TEST_CASE("power iteration matches the direction-grid oracle at six leaves") {
    const TreePtr t = six_leaf_tree();
    REQUIRE(t->leaf_count() == 6);
    for (std::uint64_t s = 1; s <= 2; ++s) {
      const auto mu = random_integer_measure(t, s);
      const auto b = random_rational_function(t, 10 + s);
      const auto bd = b.as<double>();
      std::vector<SmallCase> cases{
          {"H", shift_operator(HaarShiftSpec::dyadic_hilbert(), mu)},
          {"S", shift_operator(HaarShiftSpec::classical_s(), mu)},
          {"[H,b]", commutator_operator(HaarShiftSpec::dyadic_hilbert(), bd, mu)},
          {"R_b", remainder_operator(HaarShiftSpec::dyadic_hilbert(), b, mu)},
          {"pi_b", paraproduct_operator(ParaproductKind::piB, bd, mu)},
      };
      Vec w(6);
      auto rng = keyed_rng(s, 99);
      for (double& v : w) v = log_uniform(rng, 0.25, 4);
      for (const SmallCase& c : cases)
        for (double p : {1.5, 2.0, 3.0})
          for (const Vec* wp : std::array<const Vec*, 2>{nullptr, &w}) {
            CAPTURE(c.name);
            CAPTURE(p);
            CAPTURE(wp != nullptr);
            const Eigen::MatrixXd A = dense_matrix(c.op).matrix;
            Eigen::VectorXd wm(6);
            for (size_t i = 0; i < 6; ++i)
              wm[static_cast<Eigen::Index>(i)] = to_double(mu.leaf_masses()[i]) * (wp ? w[i] : 1.0);
            const double oracle = grid_search_norm(A, wm, p);
            NormOptions opts;
            opts.force_power = true;
            const NormEstimate e = operator_norm(c.op, mu, wp, p, opts);
            CHECK(std::abs(e.value - oracle) <= 1e-4 * std::max(1.0, oracle));
          }
    }
  }

  TEST_CASE("certificates reproduce the reported values") {
    const auto mu = measures::random_sibling_balanced(tree(0, 6), 3, 4.0);
    const auto b = generators::random_bmo(mu, 4, 5).as<double>();
    const auto op = commutator_operator(HaarShiftSpec::dyadic_hilbert(), b, mu);
    Vec w(mu.tree().leaf_count());
    auto rng = keyed_rng(5, 5);
    for (double& v : w) v = log_uniform(rng, 0.5, 2);
    for (double p : {1.5, 2.0, 3.0})
      for (const Vec* wp : std::array<const Vec*, 2>{nullptr, &w}) {
        const NormEstimate e = operator_norm(op, mu, wp, p);
        REQUIRE(e.certificate.size() == mu.tree().leaf_count());
        const double r = weighted_lp_norm(op.apply(e.certificate), mu, wp, p) / weighted_lp_norm(e.certificate, mu, wp, p);
        CHECK(r >= e.value - std::max(e.tolerance, 1e-9 * e.value));
        CHECK(r == doctest::Approx(e.certificate_ratio).epsilon(1e-9));
      }
  }

  TEST_CASE("weak-type ratios") {
    const auto mu = measures::random_sibling_balanced(tree(0, 6), 6, 4.0);
    const auto id = identity_operator(mu);
    for (std::uint64_t s = 1; s <= 10; ++s) {
      const Vec f = generators::random_nonnegative(mu.tree_ptr(), s, 5, 3).as<double>().values;
      bool nonzero = false;
      for (double v : f) nonzero = nonzero || v != 0;
      if (!nonzero) continue;
      CHECK(weak_type_ratio(id, mu, f).ratio <= 1 + 1e-12);
      const auto H = shift_operator(HaarShiftSpec::dyadic_hilbert(), mu);
      Vec g = f;
      for (double& v : g) v *= -3.5;
      CHECK(weak_type_ratio(H, mu, f).ratio == doctest::Approx(weak_type_ratio(H, mu, g).ratio).epsilon(1e-12));
      const std::vector<double> grid{0.1, 0.5, 1, 2, 4};
      CHECK(weak_type_ratio(H, mu, f, grid).ratio <= weak_type_ratio(H, mu, f).ratio + 1e-12);
    }
    CHECK(error_kind_of([&] { weak_type_ratio(id, mu, Vec(mu.tree().leaf_count(), 0.0)); }) == ErrorKind::ZeroFunction);

    double lo = 1e300, hi = 0;
    for (int k = 2; k <= 8; ++k) {
      const auto muk = measures::mu_k(tree(-2, 10), k);
      const DyadicTree& t = muk.tree();
      Vec atom(t.leaf_count(), 0.0);
      atom[static_cast<size_t>(t.leaf_index(t.at(iv(8, 0))))] = 1.0;
      const double r = weak_type_ratio(shift_operator(HaarShiftSpec::dyadic_hilbert(), muk), muk, atom).ratio;
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    CHECK(hi <= 1.5);
    CHECK(hi / lo <= 2.0);
  }

  TEST_CASE("norm scans keep going after a failing row") {
    std::vector<std::function<ScanRow()>> jobs;
    jobs.push_back([] { return ScanRow{{{"k", "1"}}, {{"value", 1.5}}, ""}; });
    jobs.push_back([]() -> ScanRow { throw DyadError(ErrorKind::Divergence, "boom"); });
    jobs.push_back([] { return ScanRow{{{"k", "3"}}, {{"value", 2.5}}, ""}; });
    const auto rows = norm_scan(jobs);
    REQUIRE(rows.size() == 3);
    CHECK(rows[1].error.find("boom") != std::string::npos);
    CHECK(rows[2].values[0].second == 2.5);
    CHECK(scan_csv(rows).find("2.5") != std::string::npos);
    CHECK(norm_method_name(NormMethod::pPowerIteration) == "pPowerIteration");
  }
}
