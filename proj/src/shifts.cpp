#include "dyadlab/shifts.hpp"

#include "dyadlab/weights.hpp"

#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace dyadlab {

HaarShiftSpec HaarShiftSpec::dyadic_hilbert() {
  HaarShiftSpec s;
  s.kind_ = ShiftKind::dyadicHilbert;
  s.u_ = s.v_ = 1;
  return s;
}

HaarShiftSpec HaarShiftSpec::classical_s() {
  HaarShiftSpec s;
  s.kind_ = ShiftKind::classicalS;
  s.u_ = 0;
  s.v_ = 1;
  return s;
}

HaarShiftSpec HaarShiftSpec::sibling_shift(AlphaMap alpha, Rational fallback) {
  HaarShiftSpec s;
  s.kind_ = ShiftKind::siblingShift;
  s.u_ = s.v_ = 1;
  s.alpha_ = std::move(alpha);
  s.fallback_ = std::move(fallback);
  return s;
}

HaarShiftSpec HaarShiftSpec::slice(int u, int v, std::int64_t m, std::int64_t n, AlphaMap alpha, Rational fallback) {
  if (u < 0 || v < 0 || u > 20 || v > 20) throw DyadError(ErrorKind::InvalidIndex, "slice complexity out of range");
  if (m < 1 || m > (std::int64_t{1} << u) || n < 1 || n > (std::int64_t{1} << v))
    throw DyadError(ErrorKind::InvalidIndex, "slice indices out of range");
  HaarShiftSpec s;
  s.kind_ = ShiftKind::slice;
  s.u_ = u;
  s.v_ = v;
  s.m_ = m;
  s.n_ = n;
  s.alpha_ = std::move(alpha);
  s.fallback_ = std::move(fallback);
  return s;
}

HaarShiftSpec HaarShiftSpec::general(int u, int v, std::vector<ShiftTerm> terms) {
  for (const ShiftTerm& t : terms) {
    if (t.J.scale != t.I.scale + u || t.K.scale != t.I.scale + v || !t.I.contains(t.J) || !t.I.contains(t.K))
      throw DyadError(ErrorKind::InvalidArgument, "term " + t.I.str() + " does not match complexity");
  }
  HaarShiftSpec s;
  s.kind_ = ShiftKind::general;
  s.u_ = u;
  s.v_ = v;
  s.terms_ = std::move(terms);
  return s;
}

std::string HaarShiftSpec::name() const {
  switch (kind_) {
    case ShiftKind::dyadicHilbert: return "dyadicHilbert";
    case ShiftKind::classicalS: return "classicalS";
    case ShiftKind::siblingShift: return "siblingShift";
    case ShiftKind::slice:
      return "slice(" + std::to_string(u_) + "," + std::to_string(v_) + "," + std::to_string(m_) + "," + std::to_string(n_) + ")";
    case ShiftKind::general: return "general(" + std::to_string(u_) + "," + std::to_string(v_) + ")";
  }
  return "shift";
}

std::vector<ShiftTerm> HaarShiftSpec::expand(const DyadicTree& tree) const {
  std::vector<ShiftTerm> out;
  auto alpha_of = [&](const DyadicInterval& I) {
    auto it = alpha_.find(I);
    return it == alpha_.end() ? fallback_ : it->second;
  };
  if (kind_ == ShiftKind::general) {
    for (const ShiftTerm& t : terms_) {
      auto id = tree.find(t.I);
      if (id && !tree.is_leaf(*id)) out.push_back(t);
    }
    return out;
  }
  for (NodeId id : tree.internal_nodes()) {
    const DyadicInterval I = tree.interval(id);
    const DyadicInterval lo = I.left_child(), hi = I.right_child();
    switch (kind_) {
      case ShiftKind::dyadicHilbert:
        out.push_back({I, hi, lo, Rational(1)});
        out.push_back({I, lo, hi, Rational(-1)});
        break;
      case ShiftKind::classicalS:
        out.push_back({I, I, lo, Rational(1)});
        out.push_back({I, I, hi, Rational(-1)});
        break;
      case ShiftKind::siblingShift: {
        const Rational a_lo = alpha_of(lo), a_hi = alpha_of(hi);
        if (a_lo != 0) out.push_back({I, lo, hi, a_lo});
        if (a_hi != 0) out.push_back({I, hi, lo, a_hi});
        break;
      }
      case ShiftKind::slice: {
        const Rational a = alpha_of(I);
        if (a != 0) out.push_back({I, sliced_subinterval(I, u_, m_), sliced_subinterval(I, v_, n_), a});
        break;
      }
      case ShiftKind::general: break;
    }
  }
  return out;
}

HaarShiftSpec HaarShiftSpec::adjoint(const DyadicTree& tree) const {
  std::vector<ShiftTerm> terms;
  for (const ShiftTerm& t : expand(tree)) terms.push_back({t.I, t.K, t.J, t.value});
  return general(v_, u_, std::move(terms));
}

Rational HaarShiftSpec::sup_abs(const DyadicTree& tree) const {
  Rational best(0);
  for (const ShiftTerm& t : expand(tree)) best = std::max(best, abs_value(t.value));
  return best;
}

std::vector<HaarShiftSpec> HaarShiftSpec::slices(const DyadicTree& tree) const {
  std::map<std::pair<std::int64_t, std::int64_t>, AlphaMap> groups;
  for (const ShiftTerm& t : expand(tree)) {
    const std::int64_t m = t.J.position - (t.I.position << u_) + 1;
    const std::int64_t n = t.K.position - (t.I.position << v_) + 1;
    groups[{m, n}][t.I] += t.value;
  }
  std::vector<HaarShiftSpec> out;
  for (auto& [mn, alpha] : groups) out.push_back(slice(u_, v_, mn.first, mn.second, std::move(alpha)));
  return out;
}

RemainderShift remainder_shift(const HaarShiftSpec& spec, const FunctionRep<Rational>& b, const DyadicMeasure& mu) {
  if (spec.kind() != ShiftKind::dyadicHilbert && spec.kind() != ShiftKind::classicalS && spec.kind() != ShiftKind::slice)
    throw DyadError(ErrorKind::UnsupportedShift, "remainder form is defined for the Hilbert transform, the classical shift and slices");
  require_on(b, mu);
  const DyadicTree& t = mu.tree();
  const std::vector<Rational> avg = node_averages(b, mu);
  std::vector<ShiftTerm> terms;
  Rational sup(0);
  for (const ShiftTerm& term : spec.expand(t)) {
    auto j = t.find(term.J);
    auto k = t.find(term.K);
    if (!j || !k || t.is_leaf(*j) || t.is_leaf(*k)) continue;
    Rational beta = term.value * (avg[*j] - avg[*k]);
    if (beta == 0) continue;
    sup = std::max(sup, abs_value(beta));
    terms.push_back({term.I, term.J, term.K, std::move(beta)});
  }
  RemainderShift out{HaarShiftSpec::general(spec.u(), spec.v(), std::move(terms)), sup, Rational(0)};
  const Rational norm = t.depth() >= 2 ? bmo_norm(b, mu, {}).norm : Rational(0);
  const Rational alpha_sup = spec.sup_abs(t);
  const int factor = spec.kind() == ShiftKind::dyadicHilbert ? 2 : spec.u() + spec.v();
  out.bound = alpha_sup * factor * norm;
  if (t.depth() >= 2 && out.sup_coefficient > out.bound)
    throw DyadError(ErrorKind::CertificateFailure, "remainder coefficients exceed the BMO bound");
  return out;
}

void write_shift(std::ostream& out, const HaarShiftSpec& spec, const DyadicTree& tree) {
  out << "complexity: " << spec.u() << ' ' << spec.v() << "\n";
  for (const ShiftTerm& t : spec.expand(tree))
    out << "I=" << t.I.str() << " J=" << t.J.str() << " K=" << t.K.str() << ' ' << to_string(t.value) << "\n";
}

HaarShiftSpec read_shift(std::istream& in) {
  std::string line;
  std::optional<std::pair<int, int>> complexity;
  std::vector<ShiftTerm> terms;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    if (line.rfind("complexity:", 0) == 0) {
      std::string key;
      int u = 0, v = 0;
      ls >> key >> u >> v;
      complexity = {u, v};
      continue;
    }
    std::string a, b, c, value;
    if (!(ls >> a >> b >> c >> value) || a.rfind("I=", 0) != 0 || b.rfind("J=", 0) != 0 || c.rfind("K=", 0) != 0)
      throw DyadError(ErrorKind::ParseError, "bad shift line '" + line + "'");
    terms.push_back({DyadicInterval::parse(a.substr(2)), DyadicInterval::parse(b.substr(2)),
                     DyadicInterval::parse(c.substr(2)), parse_rational(value)});
  }
  if (!complexity) {
    if (terms.empty()) throw DyadError(ErrorKind::ParseError, "shift file without complexity or terms");
    complexity = {terms[0].J.scale - terms[0].I.scale, terms[0].K.scale - terms[0].I.scale};
  }
  return HaarShiftSpec::general(complexity->first, complexity->second, std::move(terms));
}

HaarShiftSpec builtin_shift(const std::string& name) {
  if (name == "dyadicHilbert") return HaarShiftSpec::dyadic_hilbert();
  if (name == "classicalS") return HaarShiftSpec::classical_s();
  throw DyadError(ErrorKind::UnsupportedShift, "unknown builtin shift '" + name + "'");
}

}  // namespace dyadlab
