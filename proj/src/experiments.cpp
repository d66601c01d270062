#include "dyadlab/experiments.hpp"

#include "dyadlab/generators.hpp"
#include "dyadlab/random.hpp"
#include "dyadlab/sparse.hpp"
#include "dyadlab/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dyadlab {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    const auto a = item.find_first_not_of(" \t");
    const auto b = item.find_last_not_of(" \t");
    if (a == std::string::npos) continue;
    out.push_back(item.substr(a, b - a + 1));
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (const std::string& item : split_list(text)) {
    try {
      const auto dots = item.find("..");
      if (dots == std::string::npos) {
        out.push_back(std::stoi(item));
        continue;
      }
      const int lo = std::stoi(item.substr(0, dots));
      const int hi = std::stoi(item.substr(dots + 2));
      if (hi < lo) throw DyadError(ErrorKind::ConfigError, "empty range " + item);
      for (int v = lo; v <= hi; ++v) out.push_back(v);
    } catch (const std::logic_error&) {
      throw DyadError(ErrorKind::ConfigError, "not an integer list: " + text);
    }
  }
  return out;
}

std::string ExperimentConfig::get(const std::string& key, const std::string& fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

int ExperimentConfig::get_int(const std::string& key, int fallback) const {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  try {
    size_t used = 0;
    const int v = std::stoi(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::logic_error&) {
    throw DyadError(ErrorKind::ConfigError, key + " is not an integer: " + it->second);
  }
}

double ExperimentConfig::get_double(const std::string& key, double fallback) const {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  try {
    size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::logic_error&) {
    throw DyadError(ErrorKind::ConfigError, key + " is not a number: " + it->second);
  }
}

std::vector<int> ExperimentConfig::get_ints(const std::string& key, const std::vector<int>& fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : parse_int_list(it->second);
}

std::vector<double> ExperimentConfig::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  std::vector<double> out;
  for (const std::string& item : split_list(it->second)) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::logic_error&) {
      throw DyadError(ErrorKind::ConfigError, key + " is not a number list: " + it->second);
    }
  }
  return out;
}

std::vector<std::string> ExperimentConfig::get_list(const std::string& key,
                                                    const std::vector<std::string>& fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : split_list(it->second);
}

namespace experiments {

namespace {

using generators::b_k;
using generators::random_bmo;
using generators::random_nonnegative;

TreePtr complete_tree(int root_scale, int depth) {
  return DyadicTree::complete(TreeSpec{root_scale, {0}, root_scale + depth});
}

std::string kv(const std::string& key, const std::string& value) { return key + "=" + value; }

std::string pair_witness(const DyadicInterval& I, const DyadicInterval& J) { return I.str() + "|" + J.str(); }

/// Generator resolution at one depth: depth - resolution_gap when the gap is set, else the fixed resolution.
int resolution_of(const ExperimentConfig& cfg, int depth) {
  if (cfg.params.count("resolution_gap")) return std::max(1, depth - cfg.get_int("resolution_gap", 0));
  return cfg.get_int("resolution", 6);
}

std::vector<int> depths_of(const ExperimentConfig& cfg, std::vector<int> fallback) {
  std::vector<int> d = cfg.depths.empty() ? std::move(fallback) : cfg.depths;
  std::sort(d.begin(), d.end());
  return d;
}

std::vector<std::uint64_t> seeds_of(const ExperimentConfig& cfg) {
  return cfg.seeds.empty() ? std::vector<std::uint64_t>{1} : cfg.seeds;
}

NormOptions norm_options(const ExperimentConfig& cfg, std::uint64_t seed) {
  NormOptions o;
  o.seed = seed;
  o.restarts = cfg.get_int("restarts", 3);
  o.max_iterations = cfg.get_int("max_iterations", 100);
  o.tol = cfg.get_double("tol", 1e-9);
  o.lanczos_steps = cfg.get_int("lanczos_steps", 300);
  return o;
}

double max_of(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }
double min_of(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::min_element(v.begin(), v.end()); }

/// max/min over positive entries; 1 for fewer than two.
double variation(const std::vector<double>& v) {
  const double lo = min_of(v), hi = max_of(v);
  if (v.size() < 2) return 1.0;
  if (lo <= 0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

FunctionRep<double> to_double_rep(const FunctionRep<Rational>& f) { return f.as<double>(); }

std::string p_suffix(double p) {
  std::ostringstream s;
  s << "_p" << p;
  return s.str();
}

}  // namespace

DyadicMeasure make_measure(const MeasureRequest& req) {
  if (req.kind == "lebesgue") return measures::lebesgue(complete_tree(0, req.depth));
  if (req.kind == "muk") return measures::mu_k(complete_tree(-2, req.depth), req.k, req.atomless);
  if (req.kind == "sibnotbal") {
    if (req.depth < 4) throw DyadError(ErrorKind::TreeTooShallow, "sibnotbal needs depth >= 4");
    return measures::sib_not_balanced(complete_tree(-4, req.depth), req.atomless);
  }
  if (req.kind == "sibling") return measures::random_sibling_balanced(complete_tree(0, req.depth), req.seed, req.target);
  if (req.kind == "doubling") return measures::random_doubling(complete_tree(0, req.depth), req.seed, req.target);
  if (req.kind == "glued") {
    const int refine = std::max(2, req.depth / 4);
    return measures::thm34_glued(measures::thm34_glued_tree(req.k, refine, refine), req.k);
  }
  throw DyadError(ErrorKind::ConfigError, "unknown measure kind " + req.kind);
}

NormEstimate commutator_norm(const FunctionRep<double>& b, const DyadicMeasure& mu, double p, const Vec* w,
                             const NormOptions& opts) {
  const LinearOperator op = commutator_operator(HaarShiftSpec::dyadic_hilbert(), b, mu);
  return operator_norm(op, mu, w, p, opts);
}

std::pair<double, DyadicInterval> testing_ratio(const FunctionRep<Rational>& b, const DyadicMeasure& mu, double p,
                                                int max_level) {
  const DyadicTree& t = mu.tree();
  const FunctionRep<double> bd = to_double_rep(b);
  const LinearOperator op = commutator_operator(HaarShiftSpec::dyadic_hilbert(), bd, mu);
  const std::vector<double> avg = node_averages(bd, mu);
  const auto& mass = mu.masses<double>();
  double best = 0;
  DyadicInterval witness = t.interval(t.roots()[0]);
  for (NodeId id : t.internal_nodes()) {
    if (t.level(id) >= max_level) continue;
    double lhs = 0;
    for (auto i = t.leaf_begin(id); i < t.leaf_end(id); ++i) {
      const auto li = static_cast<size_t>(i);
      lhs += std::pow(std::abs(bd.values[li] - avg[id]), p) * mass[t.leaves()[li]];
    }
    if (lhs <= 1e-14 * mass[id]) continue;
    Vec one(t.leaf_count(), 0.0);
    for (auto i = t.leaf_begin(id); i < t.leaf_end(id); ++i) one[static_cast<size_t>(i)] = 1.0;
    const double rhs = std::pow(weighted_lp_norm(op.apply(one), mu, nullptr, p), p);
    const double r = rhs > 0 ? lhs / rhs : std::numeric_limits<double>::infinity();
    if (r > best) {
      best = r;
      witness = t.interval(id);
    }
  }
  return {best, witness};
}

namespace {

template <FloatScalar T>
struct IsometryErrors {
  double isometry = 0, square = 0, antisymmetry = 0, haar_map = 0, remainder = 0;
};

template <FloatScalar T>
T l2(const FunctionRep<T>& f, const DyadicMeasure& mu) {
  return sqrt_value(inner_product(f, f, mu));
}

template <FloatScalar T>
IsometryErrors<T> isometry_trial(const DyadicMeasure& mu, std::uint64_t seed, int resolution) {
  const DyadicTree& t = mu.tree();
  const HaarShiftSpec H = HaarShiftSpec::dyadic_hilbert();
  const BoundShift<T> bound = bind_shift<T>(H, t);
  auto rng = keyed_rng(seed, 0x150);
  auto random_span = [&]() {
    std::vector<T> coef(t.size(), T(0));
    for (NodeId id : t.internal_nodes()) {
      if (t.is_root(id) || t.is_leaf(t.sibling(id))) continue;
      coef[id] = T(uniform(rng, -1, 1));
    }
    return from_haar_coefficients(coef, mu);
  };
  IsometryErrors<T> e;
  const FunctionRep<T> f = random_span();
  const FunctionRep<T> g = random_span();
  const FunctionRep<T> hf = apply_bound(bound, f, mu);
  const FunctionRep<T> hg = apply_bound(bound, g, mu);
  const T nf = l2(f, mu), ng = l2(g, mu);
  e.isometry = as_double(abs_value(T(inner_product(hf, hf, mu) - nf * nf)) / (nf * nf));
  e.square = as_double(l2(apply_bound(bound, hf, mu) + f, mu) / nf);
  e.antisymmetry = as_double(abs_value(T(inner_product(hf, g, mu) + inner_product(f, hg, mu))) / (nf * ng));

  // H h_{P+} = h_{P-} on every parent whose children are both internal.
  for (NodeId p : t.internal_nodes()) {
    const NodeId lo = t.left(p), hi = t.right(p);
    if (t.is_leaf(lo) || t.is_leaf(hi)) continue;
    const FunctionRep<T> img = apply_bound(bound, haar_function<T>(mu, hi), mu);
    e.haar_map = std::max(e.haar_map, as_double(l2(img - haar_function<T>(mu, lo), mu)));
  }

  // R_b = [H, Lambda_b^0] on a generic f (root averages included).
  const FunctionRep<Rational> b = random_bmo(mu, seed, resolution);
  const FunctionRep<T> bt = b.as<T>();
  FunctionRep<T> h = FunctionRep<T>::constant(mu.tree_ptr(), T(0));
  for (auto& v : h.values) v = T(uniform(rng, -1, 1));
  const FunctionRep<T> lhs = apply_bound(bound, paraproduct(ParaproductKind::lambda0, bt, h, mu), mu) -
                             paraproduct(ParaproductKind::lambda0, bt, apply_bound(bound, h, mu), mu);
  const RemainderShift R = remainder_shift(H, b, mu);
  const FunctionRep<T> rhs = apply_shift<T>(R.spec, h, mu);
  T bmax(0);
  for (const T& v : bt.values) bmax = std::max(bmax, abs_value(v));
  e.remainder = as_double(l2(lhs - rhs, mu) / (l2(h, mu) * std::max(bmax, T(1))));
  return e;
}

template <FloatScalar T>
void isometry_rows(const ExperimentConfig& cfg, std::vector<Measurement>& out) {
  const int trials = cfg.get_int("trials", 10);
  const int resolution = cfg.get_int("resolution", 6);
  for (int depth : depths_of(cfg, {8})) {
    for (std::uint64_t seed : seeds_of(cfg)) {
      for (const std::string& kind : cfg.get_list("measures", {"lebesgue", "muk", "sibling"})) {
        MeasureRequest req;
        req.kind = kind;
        req.depth = depth;
        req.seed = seed;
        req.k = cfg.get_int("k", 4);
        const DyadicMeasure mu = make_measure(req);
        IsometryErrors<T> worst;
        for (int trial = 0; trial < trials; ++trial) {
          const IsometryErrors<T> e = isometry_trial<T>(mu, mix_seed(seed, static_cast<std::uint64_t>(trial)), resolution);
          worst.isometry = std::max(worst.isometry, e.isometry);
          worst.square = std::max(worst.square, e.square);
          worst.antisymmetry = std::max(worst.antisymmetry, e.antisymmetry);
          worst.haar_map = std::max(worst.haar_map, e.haar_map);
          worst.remainder = std::max(worst.remainder, e.remainder);
        }
        const std::string w = kv("measure", mu.label());
        out.push_back({"isometry_error", worst.isometry, depth, seed, w});
        out.push_back({"square_error", worst.square, depth, seed, w});
        out.push_back({"antisymmetry_error", worst.antisymmetry, depth, seed, w});
        out.push_back({"haar_map_error", worst.haar_map, depth, seed, w});
        out.push_back({"remainder_error", worst.remainder, depth, seed, w});
        const NormEstimate hn = operator_norm(shift_operator(HaarShiftSpec::dyadic_hilbert(), mu), mu, nullptr, 2,
                                              norm_options(cfg, seed));
        out.push_back({"hilbert_norm_error", std::abs(hn.value - 1.0), depth, seed, w});
      }
    }
  }
}

}  // namespace

std::vector<Measurement> isometry(const ExperimentConfig& cfg) {
  std::vector<Measurement> out;
  if (cfg.get_int("precision_bits", 113) > 53) isometry_rows<Quad>(cfg, out);
  else isometry_rows<double>(cfg, out);
  return out;
}

std::vector<Measurement> properties_bmu(const ExperimentConfig& cfg) {
  std::vector<Measurement> out;
  for (int depth : depths_of(cfg, {10})) {
    for (int k : cfg.get_ints("k", {4, 5, 6, 7, 8, 9, 10})) {
      const DyadicMeasure mu = make_measure({"muk", depth, 1, k, false, 4});
      const FunctionRep<Rational> b = b_k(mu, k);
      const RegularityReport reg = regularity_characteristics(mu);
      const BmoReport<Rational> bmo = bmo_norm(b, mu, {2});
      const std::string w = kv("k", std::to_string(k));
      out.push_back({"sib", to_double(reg.sib_constant), depth, 0, w + " " + pair_witness(reg.sib_witness.first, reg.sib_witness.second)});
      out.push_back({"D_over_2k", std::ldexp(to_double(bmo.D), -k), depth, 0, w + " " + bmo.D_witness.str()});
      out.push_back({"K2_over_2k2", bmo.kp.at(2) / std::pow(2.0, k / 2.0), depth, 0, w + " " + bmo.kp_witness.at(2).str()});
      out.push_back({"bmo_over_2k", std::ldexp(to_double(bmo.norm), -k), depth, 0, w + " " + bmo.norm_witness.str()});
    }
  }
  return out;
}

std::vector<Measurement> theorem_a_failure(const ExperimentConfig& cfg) {
  std::vector<Measurement> out;
  const std::vector<int> ks = cfg.get_ints("k", {4, 5, 6, 7, 8, 9, 10});
  const std::vector<int> weak_ks = cfg.get_ints("weak_k", {2, 3, 4, 5, 6, 7, 8});
  const bool power = cfg.get_int("power", 1) != 0;
  for (int depth : depths_of(cfg, {10})) {
    std::vector<double> over_d, scaled;
    for (int k : ks) {
      const DyadicMeasure mu = make_measure({"muk", depth, 1, k, false, 4});
      const FunctionRep<Rational> b = b_k(mu, k);
      const double D = to_double(bmo_norm(b, mu, {}).D);
      NormOptions opts = norm_options(cfg, 1);
      const NormEstimate est = commutator_norm(to_double_rep(b), mu, 2, nullptr, opts);
      const double root = std::pow(2.0, k / 2.0);
      const std::string w = kv("k", std::to_string(k)) + " " + kv("method", norm_method_name(est.method));
      out.push_back({"comm_over_2k2", est.value / root, depth, 0, w});
      out.push_back({"certified_over_2k2", est.certificate_ratio / root, depth, 0, w});
      out.push_back({"comm_over_D", est.value / D, depth, 0, w});
      if (power) {
        NormOptions po = opts;
        po.force_power = true;
        po.restarts = std::max(1, cfg.get_int("power_restarts", 2));
        po.max_iterations = cfg.get_int("power_iterations", 300);
        const NormEstimate pe = commutator_norm(to_double_rep(b), mu, 2, nullptr, po);
        out.push_back({"power_over_2k2", pe.value / root, depth, 0, kv("k", std::to_string(k))});
        out.push_back({"power_gap", std::abs(pe.value - est.value) / est.value, depth, 0, kv("k", std::to_string(k))});
      }
      over_d.push_back(est.value / D);
      scaled.push_back(est.value / root);
    }
    bool monotone = true;
    for (size_t i = 1; i < over_d.size(); ++i) monotone = monotone && over_d[i] < over_d[i - 1];
    const std::string span = kv("k", std::to_string(ks.front()) + ".." + std::to_string(ks.back()));
    out.push_back({"decay_ratio", over_d.empty() ? 0.0 : over_d.back() / over_d.front(), depth, 0, span});
    out.push_back({"monotone_decay", monotone ? 1.0 : 0.0, depth, 0, span});
    out.push_back({"scaled_spread", variation(scaled), depth, 0, span});

    std::vector<double> weak;
    for (int k : weak_ks) {
      const DyadicMeasure mu = make_measure({"muk", depth, 1, k, false, 4});
      Vec f(mu.tree().leaf_count(), 0.0);
      f[0] = 1.0;
      const WeakTypeResult r = weak_type_ratio(shift_operator(HaarShiftSpec::dyadic_hilbert(), mu), mu, f);
      out.push_back({"weak_ratio", r.ratio, depth, 0, kv("k", std::to_string(k)) + " " + kv("lambda", to_string(r.lambda))});
      weak.push_back(r.ratio);
    }
    if (!weak.empty()) out.push_back({"weak_spread", variation(weak), depth, 0, "weak k grid"});
  }
  return out;
}

std::vector<Measurement> theorem_a_upper(const ExperimentConfig& cfg) {
  std::vector<Measurement> out;
  const int n_measures = cfg.get_int("measures", 20);
  const int n_functions = cfg.get_int("functions", 20);
  const double target = cfg.get_double("target", 4);
  const bool per_item = cfg.get_int("per_item", 0) != 0;
  const bool testing = cfg.get_int("testing", 1) != 0;
  const bool ek = cfg.get_int("ek", 0) != 0;
  const std::uint64_t base = seeds_of(cfg).front();
  for (double p : cfg.get_doubles("p", {2, 3})) {
    const std::string sfx = p_suffix(p);
    std::vector<double> comm_by_depth, test_by_depth;
    for (int depth : depths_of(cfg, {6, 8, 10})) {
      const int resolution = resolution_of(cfg, depth);
      double comm_max = 0, test_max = 0, ek_max = 0, sib_max = 0;
      std::string comm_w, test_w, ek_w;
      for (int i = 0; i < n_measures; ++i) {
        const std::uint64_t mseed = base * 1000 + static_cast<std::uint64_t>(i);
        const DyadicMeasure mu = make_measure({"sibling", depth, mseed, 0, false, target});
        sib_max = std::max(sib_max, to_double(regularity_characteristics(mu).sib_constant));
        for (int j = 0; j < n_functions; ++j) {
          const std::uint64_t fseed = base * 1000 + 500 + static_cast<std::uint64_t>(j);
          const FunctionRep<Rational> b = random_bmo(mu, fseed, resolution);
          const double bmo = to_double(bmo_norm(b, mu, {}).norm);
          if (bmo == 0) continue;
          const FunctionRep<double> bd = to_double_rep(b);
          const NormEstimate est = commutator_norm(bd, mu, p, nullptr, norm_options(cfg, fseed));
          const double ratio = est.value / bmo;
          const std::string w = kv("measure", std::to_string(mseed)) + " " + kv("b", std::to_string(fseed));
          if (per_item) out.push_back({"comm_ratio" + sfx, ratio, depth, fseed, w});
          if (ratio > comm_max) comm_max = ratio, comm_w = w;
          if (testing) {
            const auto [tr, I] = testing_ratio(b, mu, p, resolution);
            if (per_item) out.push_back({"testing_ratio" + sfx, tr, depth, fseed, w + " I=" + I.str()});
            if (tr > test_max) test_max = tr, test_w = w + " I=" + I.str();
          }
          if (ek && p == 2) {
            double sup = 0;
            for (int s = 1; s <= resolution; ++s) {
              const FunctionRep<double> eb = expectation(bd, mu, mu.tree().root_scale() + s);
              sup = std::max(sup, commutator_norm(eb, mu, 2, nullptr, norm_options(cfg, fseed)).value);
            }
            const double lower = bmo / (est.value + sup);
            if (lower > ek_max) ek_max = lower, ek_w = w;
          }
        }
      }
      out.push_back({"C_comm" + sfx, comm_max, depth, 0, comm_w});
      out.push_back({"grid_sib", sib_max, depth, 0, "max sibling constant"});
      comm_by_depth.push_back(comm_max);
      if (testing) {
        out.push_back({"C_testing" + sfx, test_max, depth, 0, test_w});
        test_by_depth.push_back(test_max);
      }
      if (ek && p == 2) out.push_back({"C_lower_ek", ek_max, depth, 0, ek_w});
    }
    out.push_back({"comm_variation" + sfx, variation(comm_by_depth), 0, 0, "max/min over depths"});
    if (testing) out.push_back({"testing_variation" + sfx, variation(test_by_depth), 0, 0, "max/min over depths"});
  }
  return out;
}

std::vector<Measurement> theorem_b_rh(const ExperimentConfig& cfg) {
  std::vector<Measurement> out;
  const int n_measures = cfg.get_int("measures", 6);
  const int n_functions = cfg.get_int("functions", 6);
  const double target = cfg.get_double("target", 4);
  const double gamma_max = cfg.get_double("gamma_max", 4);
  const double budget = cfg.get_double("budget", 8);
  const std::uint64_t base = seeds_of(cfg).front();
  std::vector<double> gamma_by_depth;
  for (int depth : depths_of(cfg, {6, 8, 10, 12})) {
    const int resolution = resolution_of(cfg, depth);
    double min_delta = std::numeric_limits<double>::infinity(), max_excess = -std::numeric_limits<double>::infinity();
    double min_gamma = std::numeric_limits<double>::infinity(), max_rh = 0;
    std::string delta_w, excess_w, gamma_w, rh_w;
    int failures = 0;
    for (int i = 0; i < n_measures; ++i) {
      const std::uint64_t mseed = base * 1000 + static_cast<std::uint64_t>(i);
      const DyadicMeasure mu = make_measure({"sibling", depth, mseed, 0, false, target});
      for (int j = 0; j < n_functions; ++j) {
        const std::uint64_t fseed = base * 1000 + 500 + static_cast<std::uint64_t>(j);
        const FunctionRep<double> b = to_double_rep(random_bmo(mu, fseed, resolution));
        const double bmo = bmo_norm(b, mu, {}).norm;
        if (bmo == 0) continue;
        const std::string w = kv("measure", std::to_string(mseed)) + " " + kv("b", std::to_string(fseed));
        for (double p : cfg.get_doubles("p", {2, 3})) {
          const Rational pr = exact_rational(p);
          AdmissibleDelta adm;
          try {
            adm = find_admissible_delta(b, mu, pr, budget / bmo);
          } catch (const DyadError&) {
            ++failures;
            continue;
          }
          const Weight<double> omega = exp_weight(b, adm.delta);
          const std::string wp = w + " " + kv("p", to_string(p));
          if (p == 2) {
            if (adm.delta * bmo < min_delta) min_delta = adm.delta * bmo, delta_w = wp;
            FunctionRep<double> logw = omega.values();
            for (double& v : logw.values) v = std::log(v);
            const double q = characteristic(omega, mu, pr, WeightClass::ApHat).value;
            const double excess = bmo_norm(logw, mu, {}).norm - std::log(2 * q);
            if (excess > max_excess) max_excess = excess, excess_w = wp;
          }
          try {
            const ReverseHolder rh = reverse_holder_exponent(omega, mu, gamma_max);
            if (rh.gamma < min_gamma) min_gamma = rh.gamma, gamma_w = wp;
            if (rh.constant > max_rh) max_rh = rh.constant, rh_w = wp;
          } catch (const DyadError&) {
            ++failures;
          }
        }
      }
    }
    out.push_back({"delta_times_bmo", min_delta, depth, 0, delta_w});
    out.push_back({"log_bmo_excess", max_excess, depth, 0, excess_w});
    out.push_back({"rh_gamma", min_gamma, depth, 0, gamma_w});
    out.push_back({"rh_constant", max_rh, depth, 0, rh_w});
    out.push_back({"failures", static_cast<double>(failures), depth, 0, "admissibility or reverse Hoelder"});
    gamma_by_depth.push_back(min_gamma - 1);
  }
  out.push_back({"rh_gamma_variation", variation(gamma_by_depth), 0, 0, "max/min of gamma-1 over depths"});
  return out;
}

namespace {

/// e^(delta b') with delta admissible at p, or a two-valued weight for odd indices when mixed.
FunctionRep<double> grid_weight(const DyadicMeasure& mu, std::uint64_t seed, int resolution, const Rational& p,
                                bool two_valued) {
  if (two_valued) return generators::two_valued_weight(mu.tree_ptr(), seed, std::min(resolution, 4)).as<double>();
  const FunctionRep<double> b = to_double_rep(random_bmo(mu, seed, resolution));
  const double bmo = bmo_norm(b, mu, {}).norm;
  if (bmo == 0) return FunctionRep<double>::constant(mu.tree_ptr(), 1.0);
  const AdmissibleDelta adm = find_admissible_delta(b, mu, p, 4 / bmo);
  return exp_weight(b, adm.delta).values();
}

}  // namespace

std::vector<Measurement> theorem_c_weighted(const ExperimentConfig& cfg) {
  std::vector<Measurement> out;
  const int n_measures = cfg.get_int("measures", 4);
  const int n_weights = cfg.get_int("weights", 4);
  const int n_functions = cfg.get_int("functions", 4);
  const int resolution = cfg.get_int("resolution", 6);
  const double target = cfg.get_double("target", 4);
  const double p = cfg.get_double("p", 2);
  const std::uint64_t base = seeds_of(cfg).front();
  const std::string sfx = p_suffix(p);
  for (int depth : depths_of(cfg, {8})) {
    double worst = 0, worst_q = 0;
    std::string w_worst;
    for (int i = 0; i < n_measures; ++i) {
      const std::uint64_t mseed = base * 1000 + static_cast<std::uint64_t>(i);
      const DyadicMeasure mu = make_measure({"sibling", depth, mseed, 0, false, target});
      for (int a = 0; a < n_weights; ++a) {
        const std::uint64_t wseed = base * 1000 + 300 + static_cast<std::uint64_t>(a);
        const FunctionRep<double> wf = grid_weight(mu, wseed, resolution, exact_rational(p), a % 2 == 1);
        const double q = characteristic(Weight<double>(wf), mu, exact_rational(p), WeightClass::ApHat).value;
        worst_q = std::max(worst_q, q);
        for (int j = 0; j < n_functions; ++j) {
          const std::uint64_t fseed = base * 1000 + 500 + static_cast<std::uint64_t>(j);
          const FunctionRep<Rational> b = random_bmo(mu, fseed, resolution);
          const double bmo = to_double(bmo_norm(b, mu, {}).norm);
          if (bmo == 0) continue;
          const NormEstimate est = commutator_norm(to_double_rep(b), mu, p, &wf.values, norm_options(cfg, fseed));
          const double r = est.value / bmo;
          if (r > worst) {
            worst = r;
            w_worst = kv("measure", std::to_string(mseed)) + " " + kv("weight", std::to_string(wseed)) + " " +
                      kv("b", std::to_string(fseed)) + " " + kv("Q", to_string(q));
          }
        }
      }
    }
    out.push_back({"weighted_ratio" + sfx, worst, depth, 0, w_worst});
    out.push_back({"grid_ahat" + sfx, worst_q, depth, 0, "max Ahat characteristic over the weights"});
  }
  return out;
}

std::vector<Measurement> thm34(const ExperimentConfig& cfg) {
  std::vector<Measurement> out;
  const int tail = cfg.get_int("tail", 3);
  const int below = cfg.get_int("below", 2);
  const Rational two(2);
  for (int n : cfg.get_ints("n", {4, 8, 16, 32})) {
    const TreePtr tree = measures::thm34_tree(n, tail, below);
    const DyadicMeasure mu = measures::thm34_block(tree, n);
    const Weight<Quad> w(generators::thm34_weight<Quad>(tree, n));
    const auto hat = characteristic(w, mu, two, WeightClass::ApHat);
    const auto bal = characteristic(w, mu, two, WeightClass::ApBal);
    const double bound = 0.5 * std::sqrt(n / 2.0);
    const DyadicInterval mid{n / 2, 1};
    const Quad sigma_avg = average(w.dual(two), mu, mid);
    const std::string tag = kv("n", std::to_string(n));
    out.push_back({"ahat_over_bound", as_double(hat.value) / bound, 0, 0, tag + " " + pair_witness(hat.I, hat.J)});
    out.push_back({"sigma_avg_error", std::abs(as_double(sigma_avg) - std::sqrt(n / 2.0)), 0, 0, tag + " " + mid.str()});
    out.push_back({"bal_characteristic", as_double(bal.value), 0, 0, tag + " " + pair_witness(bal.I, bal.J)});
    out.push_back({"bal_measure", to_double(regularity_characteristics(mu).bal_constant), 0, 0, tag});
  }
  std::vector<double> glued;
  const std::vector<int> blocks = cfg.get_ints("blocks", {1, 2, 3, 4});
  for (int B : blocks) {
    const TreePtr tree = measures::thm34_glued_tree(B, tail, below);
    const DyadicMeasure mu = measures::thm34_glued(tree, B);
    const Weight<Quad> w(generators::thm34_glued_weight<Quad>(tree));
    const auto hat = characteristic(w, mu, two, WeightClass::ApHat);
    const std::string tag = kv("blocks", std::to_string(B));
    out.push_back({"glued_bal_measure", to_double(regularity_characteristics(mu).bal_constant), 0, 0, tag});
    out.push_back({"glued_ahat_over_bound", as_double(hat.value) / (0.5 * std::sqrt(B + 1.0)), 0, 0,
                   tag + " " + pair_witness(hat.I, hat.J)});
    glued.push_back(as_double(hat.value));
  }
  if (glued.size() >= 2)
    out.push_back({"glued_ahat_growth", glued.back() / glued.front(), 0, 0,
                   kv("blocks", std::to_string(blocks.front()) + ".." + std::to_string(blocks.back()))});
  return out;
}

std::vector<Measurement> sparse_domination(const ExperimentConfig& cfg) {
  std::vector<Measurement> out;
  const int trials = cfg.get_int("trials", 100);
  const std::uint64_t base = seeds_of(cfg).front();
  std::vector<MeasureRequest> families;
  for (const std::string& name : cfg.get_list("families", {"lebesgue", "sibnotbal", "muk2", "muk4", "muk8", "glued"})) {
    MeasureRequest req;
    req.atomless = true;
    if (name.rfind("muk", 0) == 0) {
      req.kind = "muk";
      try {
        req.k = std::stoi(name.substr(3));
      } catch (const std::logic_error&) {
        throw DyadError(ErrorKind::ConfigError, "muk family needs k, as in muk4");
      }
    } else {
      req.kind = name;
      if (name == "glued") req.k = cfg.get_int("glued_blocks", 3);
    }
    families.push_back(req);
  }
  double overall = 0, eta_overall = 1, drift_max = 0, e4_overall = 0;
  std::string overall_w, eta_w, drift_w;
  for (MeasureRequest req : families) {
    std::vector<double> by_depth;
    for (int depth : depths_of(cfg, {8, 12})) {
      const int resolution = resolution_of(cfg, depth);
      req.depth = depth;
      const DyadicMeasure mu = make_measure(req);
      const double sib = to_double(regularity_characteristics(mu).sib_constant);
      const NodeId I0 = mu.tree().roots()[0];
      double worst = 0, e4 = 0;
      Rational eta_min(1);
      std::string w;
      for (int trial = 0; trial < trials; ++trial) {
        const std::uint64_t s = base * 100000 + static_cast<std::uint64_t>(trial);
        const FunctionRep<Rational> f1 = random_nonnegative(mu.tree_ptr(), 2 * s, resolution);
        const FunctionRep<Rational> f2 = random_nonnegative(mu.tree_ptr(), 2 * s + 1, resolution);
        const DominationResult d = domination_check(f1, f2, mu, I0, sib);
        if (d.rhs > 0 && d.ratio > worst) worst = d.ratio, w = kv("trial", std::to_string(trial));
        if (d.family.eta < eta_min) eta_min = d.family.eta;
        const double main = 2 * std::sqrt(sib) * d.forms.A;
        if (main > 0) e4 = std::max(e4, d.forms.E4 / main);
      }
      const std::string tag = kv("family", mu.label());
      out.push_back({"domination_ratio", worst, depth, base, tag + " " + w});
      out.push_back({"eta", to_double(eta_min), depth, base, tag});
      out.push_back({"e4_ratio", e4, depth, base, tag});
      by_depth.push_back(worst);
      if (worst > overall) overall = worst, overall_w = tag + " " + w;
      if (to_double(eta_min) < eta_overall) eta_overall = to_double(eta_min), eta_w = tag;
      e4_overall = std::max(e4_overall, e4);
    }
    if (by_depth.size() >= 2 && by_depth.front() > 0) {
      const double drift = std::abs(by_depth.back() - by_depth.front()) / by_depth.front();
      out.push_back({"depth_drift", drift, 0, base, kv("family", req.kind + (req.kind == "muk" ? std::to_string(req.k) : ""))});
      if (drift > drift_max) drift_max = drift, drift_w = req.kind;
    }
  }
  out.push_back({"C0", overall, 0, base, overall_w});
  out.push_back({"eta_min", eta_overall, 0, base, eta_w});
  out.push_back({"e4_max", e4_overall, 0, base, "E4 / (2 sib^(1/2) A)"});
  return out;
}

std::vector<Measurement> czdecomp(const ExperimentConfig& cfg) {
  std::vector<Measurement> out;
  const int inputs = cfg.get_int("inputs", 1000);
  const int resolution = cfg.get_int("resolution", 6);
  const std::vector<std::string> kinds = cfg.get_list("measures", {"lebesgue", "sibling", "doubling", "muk"});
  const std::uint64_t base = seeds_of(cfg).front();
  for (int depth : depths_of(cfg, {8})) {
    int failures = 0;
    Rational l1(0), bmo(0);
    std::map<int, Rational> lp;
    std::string first_failure;
    for (int i = 0; i < inputs; ++i) {
      const std::uint64_t s = base * 100000 + static_cast<std::uint64_t>(i);
      auto rng = keyed_rng(s, 0xc2);
      MeasureRequest req;
      req.kind = kinds[static_cast<size_t>(i) % kinds.size()];
      req.depth = depth;
      req.seed = s;
      req.k = static_cast<int>(uniform_int(rng, 1, 6));
      req.target = 4;
      const DyadicMeasure mu = make_measure(req);
      const FunctionRep<Rational> f = random_nonnegative(mu.tree_ptr(), s, resolution);
      const NodeId root = mu.tree().roots()[0];
      const Rational avg = average(f, mu, root);
      const Rational lambda = (avg > 0 ? avg : Rational(1)) * pow2(static_cast<long>(uniform_int(rng, 0, 6)));
      CzOptions opts;
      opts.enforce = false;
      const CZResult r = cz_decompose(f, mu, root, lambda, opts);
      const CzCertificate& c = r.certificate;
      if (!c.passed) {
        ++failures;
        if (first_failure.empty()) first_failure = kv("input", std::to_string(i)) + " " + c.failure;
      }
      l1 = std::max(l1, c.max_l1_ratio);
      if (c.bmo_ratio) bmo = std::max(bmo, *c.bmo_ratio);
      for (const auto& [pp, v] : c.lp_ratio) lp[pp] = std::max(lp[pp], v);
    }
    out.push_back({"cz_failures", static_cast<double>(failures), depth, base, first_failure});
    out.push_back({"cz_l1_ratio", to_double(l1), depth, base, "max ||b_k||_1 / int f"});
    for (const auto& [pp, v] : lp) out.push_back({"cz_l" + std::to_string(pp) + "_ratio", to_double(v), depth, base, ""});
    out.push_back({"cz_bmo_ratio", to_double(bmo), depth, base, "max ||g||_BMO / lambda"});
  }
  return out;
}

std::vector<Measurement> weight_containments(const ExperimentConfig& cfg) {
  std::vector<Measurement> out;
  const int n_measures = cfg.get_int("measures", 6);
  const int n_weights = cfg.get_int("weights", 6);
  const int resolution = cfg.get_int("resolution", 6);
  const double target = cfg.get_double("target", 4);
  const std::uint64_t base = seeds_of(cfg).front();
  for (int depth : depths_of(cfg, {8})) {
    for (double p : cfg.get_doubles("p", {2, 3})) {
      const Rational pr = exact_rational(p);
      const std::string sfx = p_suffix(p);
      const double factor = std::pow(2.0, std::max(1.0, p - 1));
      double prop37 = 0, ap_hat = 0, sibbal = 0, balsib = 0, ainf = 0;
      std::string w37, wap, wsb, wbs;
      for (int i = 0; i < n_measures; ++i) {
        const std::uint64_t mseed = base * 1000 + static_cast<std::uint64_t>(i);
        const DyadicMeasure sib_mu = make_measure({"sibling", depth, mseed, 0, false, target});
        const DyadicMeasure bal_mu = make_measure({"doubling", depth, mseed, 0, false, 4});
        for (int a = 0; a < n_weights; ++a) {
          const std::uint64_t wseed = base * 1000 + 300 + static_cast<std::uint64_t>(a);
          const std::string w = kv("measure", std::to_string(mseed)) + " " + kv("weight", std::to_string(wseed));
          {
            const Weight<double> wt(grid_weight(sib_mu, wseed, resolution, pr, a % 2 == 1));
            const double hat = characteristic(wt, sib_mu, pr, WeightClass::ApHat).value;
            const double sib = characteristic(wt, sib_mu, pr, WeightClass::ApSib).value;
            const double ap = characteristic(wt, sib_mu, pr, WeightClass::Ap).value;
            const double r = sib / (factor * hat * hat * hat);
            if (r > prop37) prop37 = r, w37 = w;
            if (ap / hat > ap_hat) ap_hat = ap / hat, wap = w;
            if (p == 2) ainf = std::max(ainf, characteristic(wt, sib_mu, pr, WeightClass::Ainf).value);
          }
          {
            const Weight<double> wt(grid_weight(bal_mu, wseed, resolution, pr, a % 2 == 1));
            const double sib = characteristic(wt, bal_mu, pr, WeightClass::ApSib).value;
            const double bal = characteristic(wt, bal_mu, pr, WeightClass::ApBal).value;
            if (sib / bal > sibbal) sibbal = sib / bal, wsb = w;
            if (bal / sib > balsib) balsib = bal / sib, wbs = w;
          }
        }
      }
      out.push_back({"sib_over_hat_cubed" + sfx, prop37, depth, 0, w37});
      out.push_back({"ap_over_hat" + sfx, ap_hat, depth, 0, wap});
      out.push_back({"sib_over_bal" + sfx, sibbal, depth, 0, wsb});
      out.push_back({"bal_over_sib" + sfx, balsib, depth, 0, wbs});
      if (p == 2) out.push_back({"ainf", ainf, depth, 0, "max over the sibling-balanced grid"});
    }
  }
  return out;
}

}  // namespace experiments

const std::map<std::string, Experiment>& experiment_registry() {
  static const std::map<std::string, Experiment> registry{
      {"isometry", experiments::isometry},
      {"propertiesbmu", experiments::properties_bmu},
      {"theoremA-failure", experiments::theorem_a_failure},
      {"theoremA-upper", experiments::theorem_a_upper},
      {"theoremB-rh", experiments::theorem_b_rh},
      {"theoremC-weighted", experiments::theorem_c_weighted},
      {"thm34", experiments::thm34},
      {"sparse-domination", experiments::sparse_domination},
      {"czdecomp", experiments::czdecomp},
      {"weight-containments", experiments::weight_containments},
  };
  return registry;
}

std::vector<Measurement> run_experiment(const std::string& name, const ExperimentConfig& cfg) {
  const auto& reg = experiment_registry();
  auto it = reg.find(name);
  if (it == reg.end()) throw DyadError(ErrorKind::ConfigError, "unknown experiment " + name);
  return it->second(cfg);
}

}  // namespace dyadlab
