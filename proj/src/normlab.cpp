#include "dyadlab/normlab.hpp"

#include "dyadlab/random.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dyadlab {

namespace {

using SharedMeasure = std::shared_ptr<const DyadicMeasure>;

FunctionRep<double> as_function(const SharedMeasure& mu, const Vec& x) { return FunctionRep<double>(mu->tree_ptr(), x); }

Vec leaf_masses(const DyadicMeasure& mu) {
  Vec out;
  out.reserve(mu.tree().leaf_count());
  for (NodeId leaf : mu.tree().leaves()) out.push_back(mu.masses<double>()[leaf]);
  return out;
}

double lp_norm(const Vec& x, double p) {
  double s = 0;
  if (p == 2) {
    for (double v : x) s += v * v;
    return std::sqrt(s);
  }
  for (double v : x) s += std::pow(std::abs(v), p);
  return std::pow(s, 1.0 / p);
}


/// The conjugated operator B = D A D^{-1} on plain l^p, with D = (w mu)^(1/p).
class Conjugated {
 public:
  Conjugated(const LinearOperator& op, const DyadicMeasure& mu, const Vec* w, double p) : op_(op) {
    mass_ = leaf_masses(mu);
    d_.resize(mass_.size());
    for (size_t i = 0; i < d_.size(); ++i) d_[i] = std::pow(mass_[i] * (w ? (*w)[i] : 1.0), 1.0 / p);
    if (!op.adjoint) dense_ = dense_matrix(op).matrix;
  }

  size_t size() const { return d_.size(); }
  const Vec& d() const { return d_; }

  Vec apply(const Vec& x) const {
    Vec f(x.size());
    for (size_t i = 0; i < x.size(); ++i) f[i] = x[i] / d_[i];
    Vec y = forward(f);
    for (size_t i = 0; i < y.size(); ++i) y[i] *= d_[i];
    return y;
  }

  Vec apply_transpose(const Vec& s) const {
    Vec u(s.size());
    for (size_t i = 0; i < s.size(); ++i) u[i] = d_[i] * s[i];
    Vec z = transpose(u);
    for (size_t i = 0; i < z.size(); ++i) z[i] /= d_[i];
    return z;
  }

 private:
  Vec forward(const Vec& f) const {
    if (dense_) {
      Eigen::VectorXd y = *dense_ * Eigen::Map<const Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(f.size()));
      return Vec(y.data(), y.data() + y.size());
    }
    return op_.apply(f);
  }
  /// Euclidean transpose: A^T u = mu * A^*(u / mu).
  Vec transpose(const Vec& u) const {
    if (dense_) {
      Eigen::VectorXd z =
          dense_->transpose() * Eigen::Map<const Eigen::VectorXd>(u.data(), static_cast<Eigen::Index>(u.size()));
      return Vec(z.data(), z.data() + z.size());
    }
    Vec v(u.size());
    for (size_t i = 0; i < u.size(); ++i) v[i] = u[i] / mass_[i];
    Vec z = op_.adjoint(v);
    for (size_t i = 0; i < z.size(); ++i) z[i] *= mass_[i];
    return z;
  }

  const LinearOperator& op_;
  Vec mass_;
  Vec d_;
  std::optional<Eigen::MatrixXd> dense_;
};

struct Lanczos {
  double theta = 0;
  Vec vector;
  int iterations = 0;
  bool converged = false;
};

/// Largest eigenvalue of the positive semidefinite map B^T B with full reorthogonalization.
Lanczos lanczos_top(const Conjugated& B, int max_steps, double tol, std::uint64_t seed) {
  const auto n = static_cast<Eigen::Index>(B.size());
  const int steps = static_cast<int>(std::min<Eigen::Index>(n, max_steps));
  auto rng = keyed_rng(seed, 0x1a2c);
  Eigen::MatrixXd Q(n, steps + 1);
  Eigen::VectorXd q(n);
  for (Eigen::Index i = 0; i < n; ++i) q[i] = uniform(rng, -1, 1);
  q.normalize();
  Q.col(0) = q;
  std::vector<double> alpha, beta;
  Lanczos out;
  auto ritz = [&](int k, bool take_vector) {
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < k; ++i) {
      T(i, i) = alpha[static_cast<size_t>(i)];
      if (i + 1 < k) T(i, i + 1) = T(i + 1, i) = beta[static_cast<size_t>(i)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    const double theta = es.eigenvalues()[k - 1];
    const double resid = std::abs(beta[static_cast<size_t>(k - 1)] * es.eigenvectors()(k - 1, k - 1));
    if (take_vector) {
      Eigen::VectorXd v = Q.leftCols(k) * es.eigenvectors().col(k - 1);
      out.vector.assign(v.data(), v.data() + v.size());
    }
    return std::pair{theta, resid};
  };
  for (int j = 0; j < steps; ++j) {
    const Vec qj(Q.col(j).data(), Q.col(j).data() + n);
    const Vec bw = B.apply_transpose(B.apply(qj));
    Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(bw.data(), n);
    alpha.push_back(Q.col(j).dot(w));
    for (int pass = 0; pass < 2; ++pass) w -= Q.leftCols(j + 1) * (Q.leftCols(j + 1).transpose() * w);
    beta.push_back(w.norm());
    out.iterations = j + 1;
    const bool last = j + 1 == steps;
    const bool breakdown = beta.back() <= 1e-14 * std::max(1.0, std::abs(alpha.back()));
    if (last || breakdown || (j + 1) % 5 == 0) {
      auto [theta, resid] = ritz(j + 1, false);
      if (breakdown || resid <= tol * std::max(theta, 1e-300) || last) {
        ritz(j + 1, true);
        out.theta = theta;
        out.converged = breakdown || resid <= tol * std::max(theta, 1e-300);
        return out;
      }
    }
    Q.col(j + 1) = w / beta.back();
  }
  return out;
}

Vec certificate_from(const Conjugated& B, const Vec& x) {
  Vec f(x.size());
  for (size_t i = 0; i < x.size(); ++i) f[i] = x[i] / B.d()[i];
  return f;
}

}  // namespace

LinearOperator identity_operator(const DyadicMeasure& mu) {
  auto id = [](const Vec& x) { return x; };
  return {mu.tree_ptr(), "identity", id, id};
}

LinearOperator shift_operator(const HaarShiftSpec& spec, const DyadicMeasure& mu) {
  auto m = std::make_shared<const DyadicMeasure>(mu);
  auto fwd = std::make_shared<const BoundShift<double>>(bind_shift<double>(spec, mu.tree()));
  auto adj = std::make_shared<const BoundShift<double>>(bind_shift<double>(spec.adjoint(mu.tree()), mu.tree()));
  LinearOperator op;
  op.tree = mu.tree_ptr();
  op.name = spec.name();
  op.apply = [m, fwd](const Vec& x) { return apply_bound(*fwd, as_function(m, x), *m).values; };
  op.adjoint = [m, adj](const Vec& x) { return apply_bound(*adj, as_function(m, x), *m).values; };
  return op;
}

LinearOperator commutator_operator(const HaarShiftSpec& spec, const FunctionRep<double>& b, const DyadicMeasure& mu) {
  require_on(b, mu);
  auto m = std::make_shared<const DyadicMeasure>(mu);
  auto fwd = std::make_shared<const BoundShift<double>>(bind_shift<double>(spec, mu.tree()));
  auto adj = std::make_shared<const BoundShift<double>>(bind_shift<double>(spec.adjoint(mu.tree()), mu.tree()));
  auto bv = std::make_shared<const FunctionRep<double>>(b);
  LinearOperator op;
  op.tree = mu.tree_ptr();
  op.name = "[" + spec.name() + ",b]";
  op.apply = [m, fwd, bv](const Vec& x) {
    const FunctionRep<double> f = as_function(m, x);
    return (apply_bound(*fwd, *bv * f, *m) - *bv * apply_bound(*fwd, f, *m)).values;
  };
  // [T,b]^* = b T^* - T^* b.
  op.adjoint = [m, adj, bv](const Vec& x) {
    const FunctionRep<double> f = as_function(m, x);
    return (*bv * apply_bound(*adj, f, *m) - apply_bound(*adj, *bv * f, *m)).values;
  };
  return op;
}

LinearOperator multiplication_operator(const FunctionRep<double>& b, const DyadicMeasure& mu) {
  require_on(b, mu);
  auto bv = std::make_shared<const Vec>(b.values);
  auto mul = [bv](const Vec& x) {
    Vec y = x;
    for (size_t i = 0; i < y.size(); ++i) y[i] *= (*bv)[i];
    return y;
  };
  return {mu.tree_ptr(), "b", mul, mul};
}

LinearOperator remainder_operator(const HaarShiftSpec& spec, const FunctionRep<Rational>& b, const DyadicMeasure& mu) {
  LinearOperator op = shift_operator(remainder_shift(spec, b, mu).spec, mu);
  op.name = "R_b(" + spec.name() + ")";
  return op;
}

LinearOperator paraproduct_operator(ParaproductKind kind, const FunctionRep<double>& b, const DyadicMeasure& mu) {
  require_on(b, mu);
  auto m = std::make_shared<const DyadicMeasure>(mu);
  auto bv = std::make_shared<const FunctionRep<double>>(b);
  LinearOperator op;
  op.tree = mu.tree_ptr();
  op.name = "paraproduct";
  op.apply = [m, bv, kind](const Vec& x) { return paraproduct(kind, *bv, as_function(m, x), *m).values; };
  return op;
}

OperatorMatrix dense_matrix(const LinearOperator& op) {
  const size_t n = op.tree->leaf_count();
  OperatorMatrix out;
  out.matrix.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Vec e(n, 0.0);
  for (size_t j = 0; j < n; ++j) {
    e[j] = 1;
    const Vec col = op.apply(e);
    e[j] = 0;
    for (size_t i = 0; i < n; ++i) out.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
  }
  return out;
}

std::string norm_method_name(NormMethod m) {
  switch (m) {
    case NormMethod::exactSpectral: return "exactSpectral";
    case NormMethod::lanczos: return "lanczos";
    case NormMethod::pPowerIteration: return "pPowerIteration";
    case NormMethod::randomLowerBound: return "randomLowerBound";
  }
  return "?";
}

double weighted_lp_norm(const Vec& f, const DyadicMeasure& mu, const Vec* w, double p) {
  const DyadicTree& t = mu.tree();
  double s = 0;
  for (size_t i = 0; i < f.size(); ++i) {
    const double mass = mu.masses<double>()[t.leaves()[i]] * (w ? (*w)[i] : 1.0);
    s += (p == 2 ? f[i] * f[i] : std::pow(std::abs(f[i]), p)) * mass;
  }
  return p == 2 ? std::sqrt(s) : std::pow(s, 1.0 / p);
}

NormEstimate operator_norm(const LinearOperator& op, const DyadicMeasure& mu, const Vec* w, double p,
                           const NormOptions& opts) {
  if (!(p > 1) || !std::isfinite(p)) throw DyadError(ErrorKind::InvalidExponent, "operator norms need 1 < p < inf");
  if (!op.tree || !op.tree->same_shape(mu.tree())) throw DyadError(ErrorKind::BackendMismatch, "operator on another tree");
  if (w) {
    if (w->size() != mu.tree().leaf_count()) throw DyadError(ErrorKind::InvalidArgument, "weight size mismatch");
    for (double v : *w)
      if (!(v > 0)) throw DyadError(ErrorKind::NegativeInput, "weights must be strictly positive");
  }
  const size_t n = mu.tree().leaf_count();
  auto ratio_of = [&](const Vec& f) {
    const double denom = weighted_lp_norm(f, mu, w, p);
    return denom > 0 ? weighted_lp_norm(op.apply(f), mu, w, p) / denom : 0.0;
  };

  NormEstimate est;
  if (p == 2 && !opts.force_power) {
    const Conjugated B(op, mu, w, 2);
    Vec x;
    if (n <= opts.dense_cap) {
      const Eigen::MatrixXd A = dense_matrix(op).matrix;
      const Eigen::Map<const Eigen::VectorXd> d(B.d().data(), static_cast<Eigen::Index>(n));
      const Eigen::MatrixXd Bm = d.asDiagonal() * A * d.cwiseInverse().asDiagonal();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Bm.transpose() * Bm);
      const auto last = static_cast<Eigen::Index>(n) - 1;
      est.value = std::sqrt(std::max(0.0, es.eigenvalues()[last]));
      const Eigen::VectorXd v = es.eigenvectors().col(last);
      x.assign(v.data(), v.data() + v.size());
      est.method = NormMethod::exactSpectral;
      est.iterations = 1;
      est.converged = true;
    } else {
      const Lanczos lz = lanczos_top(B, opts.lanczos_steps, opts.tol, opts.seed);
      est.value = std::sqrt(std::max(0.0, lz.theta));
      x = lz.vector;
      est.method = NormMethod::lanczos;
      est.iterations = lz.iterations;
      est.converged = lz.converged;
    }
    est.certificate = certificate_from(B, x);
    est.certificate_ratio = ratio_of(est.certificate);
    est.tolerance = std::max(opts.tol * std::max(1.0, est.value), est.value - est.certificate_ratio);
    return est;
  }

  // Nonlinear power iteration for the l^p -> l^p norm of the conjugated operator.
  const Conjugated B(op, mu, w, p);
  const double q = p / (p - 1);
  auto normalize = [&](Vec& x) {
    const double s = lp_norm(x, p);
    if (s > 0)
      for (double& v : x) v /= s;
    return s > 0;
  };
  std::vector<Vec> starts;
  if (!opts.force_power) {
    // Warm start: the top L^2 singular direction carried into l^p coordinates.
    NormOptions o2 = opts;
    o2.tol = 1e-8;
    o2.force_power = false;
    const NormEstimate l2 = operator_norm(op, mu, w, 2, o2);
    Vec x(n);
    for (size_t i = 0; i < n; ++i) x[i] = l2.certificate[i] * B.d()[i];
    starts.push_back(std::move(x));
  }
  for (int r = 0; r < opts.restarts; ++r) {
    auto rng = keyed_rng(opts.seed, static_cast<std::uint64_t>(r) + 1);
    Vec x(n);
    for (double& v : x) v = uniform(rng, -1, 1);
    starts.push_back(std::move(x));
  }
  est.method = NormMethod::pPowerIteration;
  est.converged = false;
  double best = -1;
  for (Vec x : starts) {
    if (!normalize(x)) continue;
    double prev = 0, val = 0;
    bool converged = false;
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
      const Vec y = B.apply(x);
      val = lp_norm(y, p);
      if (val == 0) break;
      Vec s(n);
      for (size_t i = 0; i < n; ++i) s[i] = std::copysign(std::pow(std::abs(y[i]), p - 1), y[i]);
      const Vec z = B.apply_transpose(s);
      for (size_t i = 0; i < n; ++i) x[i] = std::copysign(std::pow(std::abs(z[i]), q - 1), z[i]);
      if (!normalize(x)) break;
      if (it > 0 && std::abs(val - prev) <= opts.tol * val) {
        converged = true;
        break;
      }
      prev = val;
    }
    val = lp_norm(B.apply(x), p);
    est.iterations += it + 1;
    if (val > best) {
      best = val;
      est.certificate = certificate_from(B, x);
      est.converged = converged;
    }
  }
  if (est.certificate.empty()) est.certificate.assign(n, 0.0);
  est.certificate_ratio = ratio_of(est.certificate);
  est.value = est.certificate_ratio;
  est.tolerance = opts.tol * std::max(1.0, est.value);
  return est;
}

WeakTypeResult weak_type_ratio(const LinearOperator& op, const DyadicMeasure& mu, const Vec& f,
                               const std::vector<double>& lambda_grid) {
  const Vec mass = leaf_masses(mu);
  double l1 = 0;
  for (size_t i = 0; i < f.size(); ++i) l1 += std::abs(f[i]) * mass[i];
  if (l1 == 0) throw DyadError(ErrorKind::ZeroFunction, "weak-type ratio of the zero function");
  const Vec tf = op.apply(f);
  WeakTypeResult out;
  if (!lambda_grid.empty()) {
    for (double lambda : lambda_grid) {
      double level = 0;
      for (size_t i = 0; i < tf.size(); ++i)
        if (std::abs(tf[i]) > lambda) level += mass[i];
      const double r = lambda * level / l1;
      if (r > out.ratio) out = {r, lambda};
    }
    return out;
  }
  std::vector<std::pair<double, double>> vals;
  for (size_t i = 0; i < tf.size(); ++i) vals.emplace_back(std::abs(tf[i]), mass[i]);
  std::sort(vals.begin(), vals.end(), [](auto& a, auto& b) { return a.first > b.first; });
  double level = 0;
  for (size_t i = 0; i < vals.size(); ++i) {
    level += vals[i].second;
    if (i + 1 < vals.size() && vals[i + 1].first == vals[i].first) continue;
    const double r = vals[i].first * level / l1;
    if (r > out.ratio) out = {r, vals[i].first};
  }
  return out;
}

std::vector<ScanRow> norm_scan(const std::vector<std::function<ScanRow()>>& jobs) {
  std::vector<ScanRow> rows;
  for (const auto& job : jobs) {
    try {
      rows.push_back(job());
    } catch (const std::exception& e) {
      ScanRow r;
      r.error = e.what();
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

std::string scan_csv(const std::vector<ScanRow>& rows) {
  std::vector<std::string> pkeys, vkeys;
  auto add = [](std::vector<std::string>& keys, const std::string& k) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
  };
  for (const ScanRow& r : rows) {
    for (const auto& [k, v] : r.params) add(pkeys, k);
    for (const auto& [k, v] : r.values) add(vkeys, k);
  }
  std::ostringstream out;
  for (const auto& k : pkeys) out << k << ',';
  for (const auto& k : vkeys) out << k << ',';
  out << "error\n";
  for (const ScanRow& r : rows) {
    for (const auto& k : pkeys) {
      auto it = std::find_if(r.params.begin(), r.params.end(), [&](auto& kv) { return kv.first == k; });
      out << (it == r.params.end() ? "" : it->second) << ',';
    }
    for (const auto& k : vkeys) {
      auto it = std::find_if(r.values.begin(), r.values.end(), [&](auto& kv) { return kv.first == k; });
      out << (it == r.values.end() ? "" : to_string(it->second)) << ',';
    }
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    out << err << "\n";
  }
  return out.str();
}

}  // namespace dyadlab
