#include "dyadlab/weights.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace dyadlab {

namespace {

std::optional<unsigned long> integer_value(const Rational& q) {
  if (denominator(q) != 1 || q < 0) return std::nullopt;
  return static_cast<unsigned long>(numerator(q));
}

/// x^e; the rational backend accepts non-negative integer exponents only.
template <Scalar T>
T power(const T& x, const Rational& e) {
  if (auto k = integer_value(e)) return ipow(x, *k);
  if constexpr (std::is_same_v<T, Rational>) {
    throw DyadError(ErrorKind::InvalidExponent, "exponent " + to_string(e) + " needs a float backend");
  } else {
    return pow_value(x, convert<T>(e));
  }
}

template <Scalar T>
struct Best {
  T value{};
  bool set = false;
  DyadicInterval I, J;

  void offer(const T& v, const DyadicInterval& a, const DyadicInterval& b) {
    if (!set || v > value) {
      value = v;
      I = a;
      J = b;
      set = true;
    }
  }
};

}  // namespace

Rational dual_exponent(const Rational& p) {
  require_exponent(p);
  return p / (p - 1);
}

void require_exponent(const Rational& p) {
  if (p <= 1) throw DyadError(ErrorKind::InvalidExponent, "exponent must exceed 1, got " + to_string(p));
}

template <Scalar T>
Weight<T>::Weight(FunctionRep<T> w) : w_(std::move(w)) {
  for (const T& v : w_.values)
    if (!(v > 0)) throw DyadError(ErrorKind::NegativeInput, "weights must be strictly positive");
}

template <Scalar T>
const FunctionRep<T>& Weight<T>::dual(const Rational& p) const {
  require_exponent(p);
  auto it = dual_cache_.find(p);
  if (it != dual_cache_.end()) return it->second;
  const Rational e = 1 / (p - 1);
  FunctionRep<T> s = w_;
  for (T& v : s.values) v = T(1) / power(v, e);
  return dual_cache_.emplace(p, std::move(s)).first->second;
}

template <Scalar T>
BmoReport<T> bmo_norm(const FunctionRep<T>& b, const DyadicMeasure& mu, const std::vector<int>& p_list) {
  require_on(b, mu);
  const DyadicTree& t = mu.tree();
  if (t.depth() < 2) throw DyadError(ErrorKind::TreeTooShallow, "BMO needs a tree of depth at least 2");
  const auto& mass = mu.masses<T>();
  const std::vector<T> avg = node_averages(b, mu);
  auto leaf_mass = [&](std::int32_t i) -> const T& { return mass[t.leaves()[static_cast<size_t>(i)]]; };

  BmoReport<T> r;
  Best<T> norm, D;
  std::map<int, Best<T>> kp;
  for (int p : p_list) {
    if (p < 1) throw DyadError(ErrorKind::InvalidExponent, "oscillation exponents must be positive integers");
    kp[p];
  }
  for (size_t n = 0; n < t.size(); ++n) {
    const auto id = static_cast<NodeId>(n);
    const DyadicInterval& I = t.interval(id);
    if (!t.is_root(id)) {
      const T c = avg[t.parent(id)];
      T sum(0);
      for (auto i = t.leaf_begin(id); i < t.leaf_end(id); ++i) sum += abs_value(T(b.values[static_cast<size_t>(i)] - c)) * leaf_mass(i);
      norm.offer(sum / mass[id], I, I);
    }
    if (!t.is_leaf(id)) D.offer(abs_value(T(avg[t.left(id)] - avg[t.right(id)])), I, I);
    for (auto& [p, best] : kp) {
      T sum(0);
      for (auto i = t.leaf_begin(id); i < t.leaf_end(id); ++i)
        sum += ipow(abs_value(T(b.values[static_cast<size_t>(i)] - avg[id])), static_cast<unsigned long>(p)) * leaf_mass(i);
      best.offer(sum / mass[id], I, I);
    }
  }
  r.norm = norm.value;
  r.norm_witness = norm.I;
  r.D = D.value;
  r.D_witness = D.I;
  for (auto& [p, best] : kp) {
    r.kp_power[p] = best.value;
    r.kp[p] = std::pow(as_double(best.value), 1.0 / p);
    r.kp_witness[p] = best.I;
  }
  return r;
}

template <Scalar T>
JnProfile jn_profile(const FunctionRep<T>& b, const DyadicMeasure& mu, NodeId I, const std::vector<double>& alpha_grid) {
  require_on(b, mu);
  const DyadicTree& t = mu.tree();
  if (t.depth() < 2) throw DyadError(ErrorKind::TreeTooShallow, "profile needs a tree of depth at least 2");
  const T c = t.is_root(I) ? average(b, mu, I) : average(b, mu, t.parent(I));
  JnProfile out;
  for (double alpha : alpha_grid) {
    const T a = convert<T>(alpha);
    Rational level(0);
    for (auto i = t.leaf_begin(I); i < t.leaf_end(I); ++i)
      if (abs_value(T(b.values[static_cast<size_t>(i)] - c)) > a) level += mu.mass(t.leaves()[static_cast<size_t>(i)]);
    out.points.push_back({alpha, level / mu.mass(I)});
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const JnPoint& pt : out.points) {
    if (pt.fraction <= 0) continue;
    const double y = std::log(to_double(pt.fraction));
    sx += pt.alpha;
    sy += y;
    sxx += pt.alpha * pt.alpha;
    sxy += pt.alpha * y;
    ++n;
  }
  const double det = n * sxx - sx * sx;
  if (n >= 2 && det > 0) {
    const double slope = (n * sxy - sx * sy) / det;
    out.delta_hat = -slope;
    out.c_hat = std::exp((sy - slope * sx) / n);
  }
  return out;
}

template <Scalar T>
FunctionRep<T> dyadic_maximal(const FunctionRep<T>& f, const DyadicMeasure& mu, const FunctionRep<T>* weight) {
  require_on(f, mu);
  for (const T& v : f.values)
    if (v < 0) throw DyadError(ErrorKind::NegativeInput, "maximal function needs a nonnegative input");
  const DyadicTree& t = mu.tree();
  std::vector<T> avg;
  if (weight) {
    require_on(*weight, mu);
    avg = node_integrals(f * *weight, mu);
    const std::vector<T> wi = node_integrals(*weight, mu);
    for (size_t i = 0; i < avg.size(); ++i) avg[i] /= wi[i];
  } else {
    avg = node_averages(f, mu);
  }
  std::vector<T> run(t.size());
  for (size_t n = 0; n < t.size(); ++n) {
    const auto id = static_cast<NodeId>(n);
    run[n] = t.is_root(id) ? avg[n] : std::max(run[t.parent(id)], avg[n]);
  }
  FunctionRep<T> out = f;
  for (size_t i = 0; i < t.leaf_count(); ++i) out.values[i] = run[t.leaves()[i]];
  return out;
}

WeightClass parse_weight_class(const std::string& name) {
  if (name == "Ap") return WeightClass::Ap;
  if (name == "ApHat") return WeightClass::ApHat;
  if (name == "ApBal") return WeightClass::ApBal;
  if (name == "ApSib") return WeightClass::ApSib;
  if (name == "Ainf") return WeightClass::Ainf;
  throw DyadError(ErrorKind::InvalidArgument, "unknown weight class '" + name + "'");
}

std::string weight_class_name(WeightClass c) {
  switch (c) {
    case WeightClass::Ap: return "Ap";
    case WeightClass::ApHat: return "ApHat";
    case WeightClass::ApBal: return "ApBal";
    case WeightClass::ApSib: return "ApSib";
    case WeightClass::Ainf: return "Ainf";
  }
  return "?";
}

template <Scalar T>
CharacteristicReport<T> characteristic(const Weight<T>& w, const DyadicMeasure& mu, const Rational& p, WeightClass tag) {
  require_exponent(p);
  require_on(w.values(), mu);
  const DyadicTree& t = mu.tree();
  const auto& mass = mu.masses<T>();
  const auto& m = mu.m_values<T>();
  const std::vector<T> aw = node_averages(w.values(), mu);
  Best<T> best;

  if (tag == WeightClass::Ainf) {
    // int_I M(w 1_I) dmu / w(I), with the maximal function restricted to subintervals of I.
    std::vector<std::pair<NodeId, T>> stack;
    for (size_t n = 0; n < t.size(); ++n) {
      const auto top = static_cast<NodeId>(n);
      T total(0);
      stack.clear();
      stack.emplace_back(top, aw[n]);
      while (!stack.empty()) {
        auto [id, run] = stack.back();
        stack.pop_back();
        if (t.is_leaf(id)) {
          total += run * mass[id];
          continue;
        }
        stack.emplace_back(t.left(id), std::max(run, aw[t.left(id)]));
        stack.emplace_back(t.right(id), std::max(run, aw[t.right(id)]));
      }
      best.offer(total / (aw[n] * mass[n]), t.interval(top), t.interval(top));
    }
    return {tag, p, best.value, best.I, best.J};
  }

  if constexpr (std::is_same_v<T, Rational>) {
    if (p != 2) throw DyadError(ErrorKind::InvalidExponent, "exact characteristics are available at p = 2 only");
  }
  const Rational pm1 = p - 1;
  std::vector<T> as = node_averages(w.dual(p), mu);
  for (T& v : as) v = power(v, pm1);
  auto plain = [&](NodeId i, NodeId j) { best.offer(T(aw[i] * as[j]), t.interval(i), t.interval(j)); };
  auto factored = [&](NodeId i, NodeId j, const T& c) { best.offer(T(c * aw[i] * as[j]), t.interval(i), t.interval(j)); };
  const Rational half_p = p / 2;

  for (size_t n = 0; n < t.size(); ++n) {
    const auto I = static_cast<NodeId>(n);
    switch (tag) {
      case WeightClass::Ap:
        plain(I, I);
        break;
      case WeightClass::ApHat:
        plain(I, I);
        if (!t.is_root(I)) {
          plain(I, t.parent(I));
          plain(t.parent(I), I);
        }
        break;
      case WeightClass::ApBal: {
        auto c = [&](NodeId i, NodeId j) {
          return T(power(m[i], half_p) * power(m[j], half_p) / (power(mass[i], pm1) * mass[j]));
        };
        factored(I, I, c(I, I));
        const NodeId s = t.sibling(I);
        if (s != kNoNode && !t.is_leaf(s)) {
          for (NodeId child : {t.left(s), t.right(s)}) {
            factored(I, child, c(I, child));
            factored(child, I, c(child, I));
          }
        }
        break;
      }
      case WeightClass::ApSib: {
        plain(I, I);
        if (t.is_root(I)) break;
        const NodeId P = t.parent(I);
        const NodeId Ps = t.sibling(P);
        if (Ps != kNoNode) {
          const T base = power(T(m[P] / mass[I]), pm1);
          // J is the sibling of the parent of I.
          factored(I, Ps, T(base * m[Ps] / mass[Ps]));
          // The parents of I and J are siblings.
          if (!t.is_leaf(Ps))
            for (NodeId J : {t.left(Ps), t.right(Ps)}) factored(I, J, T(base * m[Ps] / mass[J]));
        }
        // I is the sibling of the parent of J.
        const NodeId s = t.sibling(I);
        if (!t.is_leaf(s)) {
          const T base = power(T(m[I] / mass[I]), pm1);
          for (NodeId J : {t.left(s), t.right(s)}) factored(I, J, T(base * m[s] / mass[J]));
        }
        break;
      }
      case WeightClass::Ainf: break;
    }
  }
  return {tag, p, best.value, best.I, best.J};
}

std::string characteristic_csv_header() { return "classTag,p,value,witnessI,witnessJ,depth"; }

template <Scalar T>
std::string characteristic_csv_row(const CharacteristicReport<T>& r, int depth) {
  std::ostringstream out;
  out << weight_class_name(r.tag) << ',' << to_string(r.p) << ',' << to_string(r.value) << ',' << r.I.str() << ','
      << r.J.str() << ',' << depth;
  return out.str();
}

template <FloatScalar T>
Weight<T> exp_weight(const FunctionRep<T>& b, const T& delta) {
  FunctionRep<T> w = b;
  for (T& v : w.values) v = exp_value(T(delta * v));
  return Weight<T>(std::move(w));
}

template <FloatScalar T>
AdmissibleDelta find_admissible_delta(const FunctionRep<T>& b, const DyadicMeasure& mu, const Rational& p, double budget,
                                      const AdmissibilityOptions& opts) {
  if (!(budget > 0)) throw DyadError(ErrorKind::InvalidArgument, "delta budget must be positive");
  AdmissibleDelta out;
  auto eval = [&](double d) {
    const double c = as_double(characteristic(exp_weight(b, T(d)), mu, p, WeightClass::ApHat).value);
    out.path.emplace_back(d, c);
    return c;
  };
  double d = budget;
  double failing = -1;
  double c = eval(d);
  while (!(c <= opts.ceiling)) {
    failing = d;
    d /= 2;
    if (d < opts.min_delta) throw DyadError(ErrorKind::Divergence, "no admissible delta above the minimum");
    c = eval(d);
  }
  double lo = d, lo_c = c;
  if (failing > 0) {
    double hi = failing;
    for (int i = 0; i < opts.refine_steps; ++i) {
      const double mid = 0.5 * (lo + hi);
      const double cm = eval(mid);
      if (cm <= opts.ceiling) {
        lo = mid;
        lo_c = cm;
      } else {
        hi = mid;
      }
    }
  }
  out.delta = lo;
  out.characteristic = lo_c;
  std::vector<std::pair<double, double>> sorted = out.path;
  std::sort(sorted.begin(), sorted.end());
  for (size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i].second < sorted[i - 1].second) out.monotone = false;
  return out;
}

template <FloatScalar T>
double reverse_holder_constant(const FunctionRep<T>& w, const DyadicMeasure& mu, double gamma) {
  FunctionRep<T> wg = w;
  const T g = convert<T>(gamma);
  for (T& v : wg.values) v = pow_value(v, g);
  const std::vector<T> ag = node_averages(wg, mu);
  const std::vector<T> aw = node_averages(w, mu);
  T best(0);
  const T inv = T(1) / g;
  for (size_t i = 0; i < ag.size(); ++i) best = std::max(best, T(pow_value(ag[i], inv) / aw[i]));
  return as_double(best);
}

template <FloatScalar T>
ReverseHolder reverse_holder_exponent(const Weight<T>& w, const DyadicMeasure& mu, double gamma_max,
                                      const ReverseHolderOptions& opts) {
  if (!(gamma_max > 1)) throw DyadError(ErrorKind::InvalidArgument, "gamma_max must exceed 1");
  const FunctionRep<T>& f = w.values();
  const double top = reverse_holder_constant(f, mu, gamma_max);
  if (top <= opts.ceiling) return {gamma_max, top};
  double lo = 1 + opts.min_step;
  double lo_c = reverse_holder_constant(f, mu, lo);
  if (!(lo_c <= opts.ceiling)) throw DyadError(ErrorKind::NoExponent, "reverse Hoelder fails just above 1");
  double hi = gamma_max;
  for (int i = 0; i < opts.refine_steps; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double c = reverse_holder_constant(f, mu, mid);
    if (c <= opts.ceiling) {
      lo = mid;
      lo_c = c;
    } else {
      hi = mid;
    }
  }
  return {lo, lo_c};
}

template <Scalar T>
std::vector<DyadicInterval> stopping_maximal_intervals(const FunctionRep<T>& w, const DyadicMeasure& mu, const T& lambda) {
  const DyadicTree& t = mu.tree();
  const std::vector<T> aw = node_averages(w, mu);
  std::vector<char> covered(t.size(), 0);
  std::vector<DyadicInterval> out;
  for (size_t n = 0; n < t.size(); ++n) {
    const auto id = static_cast<NodeId>(n);
    if (!t.is_root(id) && covered[t.parent(id)]) {
      covered[n] = 1;
      continue;
    }
    if (aw[n] > lambda) {
      covered[n] = 1;
      out.push_back(t.interval(id));
    }
  }
  return out;
}

#define DYADLAB_ALL(T)                                                                                                \
  template class Weight<T>;                                                                                           \
  template BmoReport<T> bmo_norm(const FunctionRep<T>&, const DyadicMeasure&, const std::vector<int>&);               \
  template JnProfile jn_profile(const FunctionRep<T>&, const DyadicMeasure&, NodeId, const std::vector<double>&);     \
  template FunctionRep<T> dyadic_maximal(const FunctionRep<T>&, const DyadicMeasure&, const FunctionRep<T>*);         \
  template CharacteristicReport<T> characteristic(const Weight<T>&, const DyadicMeasure&, const Rational&, WeightClass); \
  template std::string characteristic_csv_row(const CharacteristicReport<T>&, int);                                   \
  template std::vector<DyadicInterval> stopping_maximal_intervals(const FunctionRep<T>&, const DyadicMeasure&, const T&);

#define DYADLAB_FLOAT(T)                                                                                               \
  template Weight<T> exp_weight(const FunctionRep<T>&, const T&);                                                      \
  template AdmissibleDelta find_admissible_delta(const FunctionRep<T>&, const DyadicMeasure&, const Rational&, double,  \
                                                 const AdmissibilityOptions&);                                         \
  template double reverse_holder_constant(const FunctionRep<T>&, const DyadicMeasure&, double);                        \
  template ReverseHolder reverse_holder_exponent(const Weight<T>&, const DyadicMeasure&, double, const ReverseHolderOptions&);

DYADLAB_ALL(Rational)
DYADLAB_ALL(Quad)
DYADLAB_ALL(double)
DYADLAB_FLOAT(Quad)
DYADLAB_FLOAT(double)

}  // namespace dyadlab
