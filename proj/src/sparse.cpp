#include "dyadlab/sparse.hpp"

#include "dyadlab/weights.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

namespace dyadlab {

namespace {

/// Maximal nodes strictly inside I where pred holds, in id order.
template <class Pred>
std::vector<NodeId> maximal_below(const DyadicTree& t, NodeId I, Pred pred) {
  std::vector<NodeId> out, stack;
  if (!t.is_leaf(I)) {
    stack.push_back(t.right(I));
    stack.push_back(t.left(I));
  }
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    if (pred(id)) {
      out.push_back(id);
    } else if (!t.is_leaf(id)) {
      stack.push_back(t.right(id));
      stack.push_back(t.left(id));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

void require_nonnegative(const FunctionRep<Rational>& f) {
  for (const Rational& v : f.values)
    if (v < 0) throw DyadError(ErrorKind::NegativeInput, "expected a nonnegative function");
}

CZResult decompose_over(const FunctionRep<Rational>& f, const DyadicMeasure& mu, NodeId I0, const Rational& lambda,
                        const std::vector<NodeId>& stopping, const CzOptions& opts) {
  const DyadicTree& t = mu.tree();
  const std::vector<Rational> integral = node_integrals(f, mu);
  auto leaf_mass = [&](std::int32_t i) -> const Rational& { return mu.mass(t.leaves()[static_cast<size_t>(i)]); };

  CZResult r;
  r.lambda = lambda;
  r.base = t.interval(I0);
  std::vector<char> inside(t.leaf_count(), 0);
  for (NodeId s : stopping) {
    r.stopping.push_back(t.interval(s));
    const NodeId P = t.parent(s);
    CzPiece piece;
    piece.stopping = t.interval(s);
    piece.c = integral[s] / mu.mass(P);
    piece.leaf_begin = t.leaf_begin(P);
    piece.values.assign(static_cast<size_t>(t.leaf_end(P) - t.leaf_begin(P)), -piece.c);
    for (auto i = t.leaf_begin(s); i < t.leaf_end(s); ++i) {
      piece.values[static_cast<size_t>(i - piece.leaf_begin)] += f.values[static_cast<size_t>(i)];
      inside[static_cast<size_t>(i)] = 1;
    }
    r.pieces.push_back(std::move(piece));
  }
  // Good part built directly: f off the stopping intervals plus the averages spread over the parents.
  r.good = f;
  for (size_t i = 0; i < inside.size(); ++i)
    if (inside[i]) r.good.values[i] = 0;
  for (NodeId s : stopping) {
    const NodeId P = t.parent(s);
    const Rational c = integral[s] / mu.mass(P);
    for (auto i = t.leaf_begin(P); i < t.leaf_end(P); ++i) r.good.values[static_cast<size_t>(i)] += c;
  }

  CzCertificate& cert = r.certificate;
  FunctionRep<Rational> sum = r.good;
  cert.zero_means = true;
  for (size_t k = 0; k < r.pieces.size(); ++k) {
    const CzPiece& piece = r.pieces[k];
    Rational mean(0), l1(0);
    for (size_t j = 0; j < piece.values.size(); ++j) {
      const auto i = piece.leaf_begin + static_cast<std::int32_t>(j);
      sum.values[static_cast<size_t>(i)] += piece.values[j];
      mean += piece.values[j] * leaf_mass(i);
      l1 += abs_value(piece.values[j]) * leaf_mass(i);
    }
    if (mean != 0) cert.zero_means = false;
    const Rational mass_f = integral[stopping[k]];
    if (mass_f > 0) cert.max_l1_ratio = std::max(cert.max_l1_ratio, Rational(l1 / mass_f));
    else if (l1 > 0) cert.max_l1_ratio = std::max(cert.max_l1_ratio, Rational(1000000));
  }
  cert.reconstruction = sum.values == f.values;

  const Rational f_l1 = integral_of_abs(f, mu);
  bool lp_ok = true;
  for (const auto& [p, bound] : opts.lp_constant) {
    Rational gp(0);
    for (size_t i = 0; i < r.good.size(); ++i)
      gp += ipow(r.good.values[i], static_cast<unsigned long>(p)) * leaf_mass(static_cast<std::int32_t>(i));
    const Rational denom = ipow(lambda, static_cast<unsigned long>(p - 1)) * f_l1;
    const Rational ratio = denom > 0 ? gp / denom : Rational(0);
    cert.lp_ratio[p] = ratio;
    if (ratio > bound) lp_ok = false;
  }
  bool bmo_ok = true;
  if (t.depth() >= 2) {
    const Rational norm = bmo_norm(r.good, mu, {}).norm;
    cert.bmo_ratio = lambda > 0 ? norm / lambda : Rational(0);
    if (*cert.bmo_ratio > opts.bmo_constant) bmo_ok = false;
  }
  const bool l1_ok = cert.max_l1_ratio <= opts.l1_constant;
  cert.passed = cert.reconstruction && cert.zero_means && l1_ok && lp_ok && bmo_ok;
  if (!cert.reconstruction) cert.failure = "reconstruction";
  else if (!cert.zero_means) cert.failure = "zero mean";
  else if (!l1_ok) cert.failure = "L1 control";
  else if (!lp_ok) cert.failure = "Lp control";
  else if (!bmo_ok) cert.failure = "BMO control";
  if (!cert.passed && opts.enforce)
    throw DyadError(ErrorKind::CertificateFailure, "decomposition certificate failed: " + cert.failure);
  return r;
}

void check_support(const FunctionRep<Rational>& f, const DyadicTree& t, NodeId I0) {
  for (size_t i = 0; i < f.size(); ++i) {
    const auto li = static_cast<std::int32_t>(i);
    if (f.values[i] != 0 && (li < t.leaf_begin(I0) || li >= t.leaf_end(I0)))
      throw DyadError(ErrorKind::InvalidArgument, "function is not supported in " + t.interval(I0).str());
  }
}

double sqrt_m(const DyadicMeasure& mu, NodeId id) { return mu.sqrt_m<double>()[id]; }

std::vector<double> double_averages(const FunctionRep<Rational>& f, const DyadicMeasure& mu) {
  const std::vector<Rational> avg = node_averages(f, mu);
  std::vector<double> out(avg.size());
  for (size_t i = 0; i < avg.size(); ++i) out[i] = to_double(avg[i]);
  return out;
}

/// True Haar coefficients from exact differences.
std::vector<double> double_coefficients(const FunctionRep<Rational>& f, const DyadicMeasure& mu) {
  const HaarCoefficients<Rational> c = analyze(f, mu);
  std::vector<double> out(c.diff.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = to_double(c.diff[i]) * mu.sqrt_m<double>()[i];
  return out;
}

}  // namespace

Rational integral_of_abs(const FunctionRep<Rational>& f, const DyadicMeasure& mu) {
  Rational total(0);
  for (size_t i = 0; i < f.size(); ++i) total += abs_value(f.values[i]) * mu.mass(mu.tree().leaves()[i]);
  return total;
}

FunctionRep<Rational> CzPiece::function(const TreePtr& tree) const {
  FunctionRep<Rational> out = FunctionRep<Rational>::constant(tree, Rational(0));
  for (size_t j = 0; j < values.size(); ++j) out.values[static_cast<size_t>(leaf_begin) + j] = values[j];
  return out;
}

CZResult cz_decompose(const FunctionRep<Rational>& f, const DyadicMeasure& mu, NodeId I0, const Rational& lambda,
                      const CzOptions& opts) {
  require_on(f, mu);
  require_nonnegative(f);
  const DyadicTree& t = mu.tree();
  check_support(f, t, I0);
  const std::vector<Rational> avg = node_averages(f, mu);
  if (lambda < avg[I0]) throw DyadError(ErrorKind::HeightTooLow, "height below the average over the base interval");
  const auto stopping = maximal_below(t, I0, [&](NodeId id) { return avg[id] > lambda; });
  return decompose_over(f, mu, I0, lambda, stopping, opts);
}

CZResult cz_decompose(const FunctionRep<Rational>& f, const DyadicMeasure& mu, const Rational& lambda,
                      const CzOptions& opts) {
  require_on(f, mu);
  const DyadicTree& t = mu.tree();
  std::optional<NodeId> base;
  for (NodeId r : t.roots()) {
    bool any = false;
    for (auto i = t.leaf_begin(r); i < t.leaf_end(r); ++i) any = any || f.values[static_cast<size_t>(i)] != 0;
    if (!any) continue;
    if (base) throw DyadError(ErrorKind::InvalidArgument, "function support spans several roots");
    base = r;
  }
  return cz_decompose(f, mu, base.value_or(t.roots().front()), lambda, opts);
}

std::pair<CZResult, CZResult> cz_decompose_pair(const FunctionRep<Rational>& f1, const FunctionRep<Rational>& f2,
                                                const DyadicMeasure& mu, NodeId I0, const Rational& lambda1,
                                                const Rational& lambda2, const CzOptions& opts) {
  require_on(f1, mu);
  require_on(f2, mu);
  require_nonnegative(f1);
  require_nonnegative(f2);
  const DyadicTree& t = mu.tree();
  check_support(f1, t, I0);
  check_support(f2, t, I0);
  const std::vector<Rational> a1 = node_averages(f1, mu), a2 = node_averages(f2, mu);
  if (lambda1 < a1[I0] || lambda2 < a2[I0])
    throw DyadError(ErrorKind::HeightTooLow, "height below the average over the base interval");
  const auto stopping = maximal_below(t, I0, [&](NodeId id) { return a1[id] > lambda1 || a2[id] > lambda2; });
  return {decompose_over(f1, mu, I0, lambda1, stopping, opts), decompose_over(f2, mu, I0, lambda2, stopping, opts)};
}

namespace {

StoppingChildren stopping_children_from(const DyadicTree& t, const std::vector<Rational>& a1,
                                        const std::vector<Rational>& a2, NodeId I, int height) {
  const Rational l1 = a1[I] * height, l2 = a2[I] * height;
  StoppingChildren out;
  out.bad = maximal_below(t, I, [&](NodeId id) { return a1[id] > l1 || a2[id] > l2; });
  const std::set<NodeId> bad(out.bad.begin(), out.bad.end());
  std::vector<NodeId> stack{I};
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    if (bad.count(id)) continue;
    out.good.push_back(id);
    if (!t.is_leaf(id)) {
      stack.push_back(t.right(id));
      stack.push_back(t.left(id));
    }
  }
  std::sort(out.good.begin(), out.good.end());
  return out;
}

}  // namespace

StoppingChildren stopping_children(const FunctionRep<Rational>& f1, const FunctionRep<Rational>& f2,
                                   const DyadicMeasure& mu, NodeId I, int height) {
  require_on(f1, mu);
  require_on(f2, mu);
  require_nonnegative(f1);
  require_nonnegative(f2);
  return stopping_children_from(mu.tree(), node_averages(f1, mu), node_averages(f2, mu), I, height);
}

Rational packing_eta(const std::vector<DyadicInterval>& family, const DyadicMeasure& mu) {
  const DyadicTree& t = mu.tree();
  std::vector<char> member(t.size(), 0);
  for (const DyadicInterval& I : family) member[t.at(I)] = 1;
  std::vector<Rational> below(t.size(), Rational(0));
  Rational worst(0);
  for (size_t n = t.size(); n-- > 0;) {
    const auto id = static_cast<NodeId>(n);
    if (!t.is_leaf(id)) below[n] = below[t.left(id)] + below[t.right(id)];
    if (member[n]) {
      below[n] += mu.mass(id);
      worst = std::max(worst, Rational(below[n] / mu.mass(id)));
    }
  }
  return worst > 0 ? 1 / worst : Rational(1);
}

SparseFamily build_sparse_family(const FunctionRep<Rational>& f1, const FunctionRep<Rational>& f2,
                                 const DyadicMeasure& mu, NodeId I0, int height) {
  require_on(f1, mu);
  require_on(f2, mu);
  require_nonnegative(f1);
  require_nonnegative(f2);
  const DyadicTree& t = mu.tree();
  check_support(f1, t, I0);
  check_support(f2, t, I0);
  const std::vector<Rational> a1 = node_averages(f1, mu), a2 = node_averages(f2, mu);
  const int budget = t.depth() + 1;
  std::set<NodeId> base;
  std::vector<std::pair<NodeId, int>> stack{{I0, 0}};
  while (!stack.empty()) {
    auto [id, level] = stack.back();
    stack.pop_back();
    if (level > budget) throw DyadError(ErrorKind::RecursionBudgetExceeded, "stopping recursion exceeded the tree depth");
    if (!base.insert(id).second) continue;
    for (NodeId child : stopping_children_from(t, a1, a2, id, height).bad) stack.emplace_back(child, level + 1);
  }
  std::set<NodeId> full = base;
  for (NodeId id : base) {
    const NodeId s = t.sibling(id);
    if (s != kNoNode && base.count(s)) full.insert(t.parent(id));
  }
  SparseFamily out;
  for (NodeId id : base) out.base.push_back(t.interval(id));
  for (NodeId id : full) out.intervals.push_back(t.interval(id));
  out.base_eta = packing_eta(out.base, mu);
  out.eta = packing_eta(out.intervals, mu);
  return out;
}

std::optional<std::map<DyadicInterval, std::vector<NodeId>>> greedy_certificate(
    const std::vector<DyadicInterval>& family, const DyadicMeasure& mu, const Rational& eta) {
  const DyadicTree& t = mu.tree();
  std::vector<NodeId> order;
  for (const DyadicInterval& I : family) order.push_back(t.at(I));
  std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) { return t.interval(b) < t.interval(a); });
  std::vector<char> used(t.leaf_count(), 0);
  std::map<DyadicInterval, std::vector<NodeId>> sets;
  for (NodeId id : order) {
    const Rational need = eta * mu.mass(id);
    Rational got(0);
    std::vector<NodeId>& E = sets[t.interval(id)];
    for (auto i = t.leaf_begin(id); i < t.leaf_end(id) && got < need; ++i) {
      if (used[static_cast<size_t>(i)]) continue;
      used[static_cast<size_t>(i)] = 1;
      const NodeId leaf = t.leaves()[static_cast<size_t>(i)];
      E.push_back(leaf);
      got += mu.mass(leaf);
    }
    if (got < need) return std::nullopt;
  }
  return sets;
}

bool verify_certificate(const std::vector<DyadicInterval>& family,
                        const std::map<DyadicInterval, std::vector<NodeId>>& sets, const DyadicMeasure& mu,
                        const Rational& eta) {
  const DyadicTree& t = mu.tree();
  std::vector<char> used(t.leaf_count(), 0);
  for (const DyadicInterval& I : family) {
    auto it = sets.find(I);
    if (it == sets.end()) return false;
    const NodeId id = t.at(I);
    Rational got(0);
    for (NodeId leaf : it->second) {
      const auto li = t.leaf_index(leaf);
      if (li < t.leaf_begin(id) || li >= t.leaf_end(id) || used[static_cast<size_t>(li)]) return false;
      used[static_cast<size_t>(li)] = 1;
      got += mu.mass(leaf);
    }
    if (got < eta * mu.mass(id)) return false;
  }
  return true;
}

SparseForms sparse_forms(const std::vector<DyadicInterval>& family, const FunctionRep<Rational>& f1,
                         const FunctionRep<Rational>& f2, const DyadicMeasure& mu) {
  require_on(f1, mu);
  require_on(f2, mu);
  const DyadicTree& t = mu.tree();
  const std::vector<double> a1 = double_averages(f1, mu), a2 = double_averages(f2, mu);
  std::vector<char> in(t.size(), 0);
  for (const DyadicInterval& I : family) in[t.at(I)] = 1;
  auto member = [&](NodeId id) { return id != kNoNode && in[id]; };
  SparseForms out;
  for (const DyadicInterval& Iv : family) {
    const NodeId I = t.at(Iv);
    out.A += a1[I] * a2[I] * mu.masses<double>()[I];
    if (t.is_root(I)) continue;
    const NodeId P = t.parent(I);
    const NodeId s = t.sibling(I);
    if (member(s)) out.E4 += a1[I] * a2[s] * sqrt_m(mu, I) * sqrt_m(mu, s);
    if (!t.is_leaf(s))
      for (NodeId J : {t.left(s), t.right(s)})
        if (member(J)) out.E2 += a1[I] * a2[J] * sqrt_m(mu, I) * sqrt_m(mu, s);
    const NodeId Q = t.sibling(P);
    if (Q == kNoNode) continue;
    if (member(Q)) out.E3 += a1[I] * a2[Q] * sqrt_m(mu, P) * sqrt_m(mu, Q);
    if (!t.is_leaf(Q))
      for (NodeId J : {t.left(Q), t.right(Q)})
        if (member(J)) out.E1 += a1[I] * a2[J] * sqrt_m(mu, P) * sqrt_m(mu, Q);
  }
  return out;
}

double hilbert_pairing(const FunctionRep<Rational>& f1, const FunctionRep<Rational>& f2, const DyadicMeasure& mu,
                       NodeId I0) {
  require_on(f1, mu);
  require_on(f2, mu);
  const DyadicTree& t = mu.tree();
  const std::vector<double> c1 = double_coefficients(f1, mu), c2 = double_coefficients(f2, mu);
  double total = 0;
  std::vector<NodeId> stack{I0};
  while (!stack.empty()) {
    const NodeId J = stack.back();
    stack.pop_back();
    if (t.is_leaf(J)) continue;
    const NodeId lo = t.left(J), hi = t.right(J);
    total += c1[hi] * c2[lo] - c1[lo] * c2[hi];
    stack.push_back(hi);
    stack.push_back(lo);
  }
  return total;
}

DominationResult domination_check(const FunctionRep<Rational>& f1, const FunctionRep<Rational>& f2,
                                  const DyadicMeasure& mu, NodeId I0, std::optional<double> sib) {
  if (!mu.atomless()) throw DyadError(ErrorKind::AtomicMeasure, "sparse domination needs an atomless measure");
  DominationResult out;
  out.family = build_sparse_family(f1, f2, mu, I0);
  out.forms = sparse_forms(out.family.intervals, f1, f2, mu);
  out.sib = sib ? *sib : to_double(regularity_characteristics(mu).sib_constant);
  out.lhs = std::abs(hilbert_pairing(f1, f2, mu, I0));
  out.rhs = std::sqrt(out.sib) * out.forms.A + out.forms.E1 + out.forms.E2 + out.forms.E3;
  out.ratio = out.rhs > 0 ? out.lhs / out.rhs : 0.0;
  return out;
}

IterationStepTerms iteration_step_terms(const FunctionRep<Rational>& f1, const FunctionRep<Rational>& f2,
                                        const DyadicMeasure& mu, NodeId I, int height) {
  require_on(f1, mu);
  require_on(f2, mu);
  require_nonnegative(f1);
  require_nonnegative(f2);
  const DyadicTree& t = mu.tree();
  const std::vector<Rational> r1 = node_averages(f1, mu), r2 = node_averages(f2, mu);
  const std::vector<double> a1 = double_averages(f1, mu), a2 = double_averages(f2, mu);
  const std::vector<double> c1 = double_coefficients(f1, mu), c2 = double_coefficients(f2, mu);
  const StoppingChildren sc = stopping_children_from(t, r1, r2, I, height);

  std::set<NodeId> B(sc.bad.begin(), sc.bad.end()), B1;
  for (NodeId J : sc.bad)
    for (NodeId K : stopping_children_from(t, r1, r2, J, height).bad) B1.insert(K);
  std::set<NodeId> Bup = B;
  Bup.insert(B1.begin(), B1.end());

  IterationStepTerms out;
  for (NodeId J : sc.good) {
    if (t.is_leaf(J)) continue;
    const NodeId lo = t.left(J), hi = t.right(J);
    out.lhs += c1[hi] * c2[lo] - c1[lo] * c2[hi];
  }
  out.lhs = std::abs(out.lhs);
  const double sib = to_double(regularity_characteristics(mu).sib_constant);
  out.main = std::sqrt(sib) * a1[I] * a2[I] * mu.masses<double>()[I];

  for (NodeId S : Bup) {
    if (t.is_root(S)) continue;
    const NodeId P = t.parent(S);
    const NodeId Q = t.sibling(P);
    if (Q == kNoNode || t.is_leaf(Q)) continue;
    for (NodeId T : {t.left(Q), t.right(Q)})
      if (Bup.count(T)) out.parents += a1[S] * a2[T] * sqrt_m(mu, P) * sqrt_m(mu, Q);
  }
  for (NodeId S : B) {
    const NodeId s = t.sibling(S);
    if (s != kNoNode && B.count(s)) out.siblings += a1[S] * a2[s] * sqrt_m(mu, S) * sqrt_m(mu, s);
  }
  // S = sibling of parent(T), with S in B and T in B or B_1.
  for (NodeId T : Bup) {
    if (t.is_root(T)) continue;
    const NodeId Q = t.parent(T);
    const NodeId S = t.sibling(Q);
    if (S == kNoNode || !B.count(S)) continue;
    out.mixed += (a1[S] * a2[T] + a1[T] * a2[S]) * sqrt_m(mu, S) * sqrt_m(mu, Q);
  }
  return out;
}

void write_sparse_family(std::ostream& out, const SparseFamily& s, const DyadicTree& tree) {
  out << "eta: " << to_string(s.eta) << "\n";
  for (const DyadicInterval& I : s.intervals) out << I.str() << "\n";
  if (s.disjoint_sets) {
    for (const auto& [I, leaves] : *s.disjoint_sets) {
      out << "E " << I.str() << ":";
      for (NodeId leaf : leaves) out << ' ' << tree.interval(leaf).str();
      out << "\n";
    }
  }
}

}  // namespace dyadlab
