#include "dyadlab/measures.hpp"

#include "dyadlab/errors.hpp"
#include "dyadlab/random.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace dyadlab {

DyadicMeasure::DyadicMeasure(TreePtr tree, std::vector<Rational> leaf_masses, bool atomless, std::string label)
    : tree_(std::move(tree)), leaf_mass_(std::move(leaf_masses)), atomless_(atomless), label_(std::move(label)) {
  const DyadicTree& t = *tree_;
  if (leaf_mass_.size() != t.leaf_count())
    throw DyadError(ErrorKind::InvalidArgument, "leaf mass count does not match the tree");
  const size_t n = t.size();
  mass_.assign(n, Rational(0));
  for (size_t i = 0; i < leaf_mass_.size(); ++i) {
    if (leaf_mass_[i] <= 0) throw DyadError(ErrorKind::InvalidArgument, "leaf masses must be positive");
    mass_[t.leaves()[i]] = leaf_mass_[i];
  }
  // Children have larger ids than parents.
  for (size_t i = n; i-- > 0;) {
    const auto id = static_cast<NodeId>(i);
    if (!t.is_leaf(id)) mass_[id] = mass_[t.left(id)] + mass_[t.right(id)];
  }
  m_.assign(n, Rational(0));
  for (NodeId id : t.internal_nodes()) m_[id] = mass_[t.left(id)] * mass_[t.right(id)] / mass_[id];
  mass_q_.resize(n);
  m_q_.resize(n);
  sqrt_m_q_.resize(n);
  mass_d_.resize(n);
  m_d_.resize(n);
  sqrt_m_d_.resize(n);
  for (size_t i = 0; i < n; ++i) {
    mass_q_[i] = to_quad(mass_[i]);
    m_q_[i] = to_quad(m_[i]);
    sqrt_m_q_[i] = sqrt(m_q_[i]);
    mass_d_[i] = static_cast<double>(mass_q_[i]);
    m_d_[i] = static_cast<double>(m_q_[i]);
    sqrt_m_d_[i] = static_cast<double>(sqrt_m_q_[i]);
  }
}

const Rational& DyadicMeasure::m(NodeId id) const {
  if (tree_->is_leaf(id)) throw DyadError(ErrorKind::OutOfTree, "m(I) needs children; " + tree_->interval(id).str() + " is a leaf");
  return m_[id];
}

DyadicMeasure DyadicMeasure::with_atomless(bool atomless) const {
  DyadicMeasure copy = *this;
  copy.atomless_ = atomless;
  return copy;
}

RegularityReport regularity_characteristics(const DyadicMeasure& mu) {
  const DyadicTree& t = mu.tree();
  RegularityReport report;
  bool have_pair = false;
  bool have_sib = false;
  for (NodeId id : t.internal_nodes()) {
    if (t.is_root(id)) continue;
    const NodeId parent = t.parent(id);
    const Rational up = mu.m(id) / mu.m(parent);
    const Rational bal = up >= 1 ? up : Rational(1 / up);
    if (!have_pair || bal > report.bal_constant) {
      report.bal_constant = bal;
      report.bal_witness = {t.interval(id), t.interval(parent)};
    }
    if (!have_pair || up > report.m_increasing_constant) {
      report.m_increasing_constant = up;
      report.m_increasing_witness = {t.interval(id), t.interval(parent)};
    }
    have_pair = true;
    const NodeId sib = t.sibling(id);
    if (t.is_leaf(sib)) continue;
    const Rational ratio = mu.m(id) / mu.m(sib);
    if (!have_sib || ratio > report.sib_constant) {
      report.sib_constant = ratio;
      report.sib_witness = {t.interval(id), t.interval(sib)};
    }
    have_sib = true;
  }
  if (!have_pair || !have_sib) throw DyadError(ErrorKind::TreeTooShallow, "regularity needs two internal generations");
  return report;
}

Rational tightest_m_increasing(const DyadicMeasure& mu) { return regularity_characteristics(mu).m_increasing_constant; }

namespace measures {

namespace {

/// Round t in (0,1) to a dyadic rational; the smaller of t and 1 - t keeps 30 significant bits.
Rational dyadic_fraction(double t) {
  if (t > 0.5) return 1 - dyadic_fraction(1.0 - t);
  t = std::clamp(t, 0x1.0p-60, 0.5);
  int e = 0;
  std::frexp(t, &e);
  const int bits = 30 - e;
  const double scaled = std::nearbyint(std::ldexp(t, bits));
  Rational q(static_cast<long long>(scaled));
  return q * pow2(-bits);
}

TreePtr require_tree(TreePtr tree) {
  if (!tree) throw DyadError(ErrorKind::InvalidArgument, "null tree");
  return tree;
}

std::vector<Rational> leaf_masses_from_nodes(const DyadicTree& t, const std::vector<Rational>& node_mass) {
  std::vector<Rational> out;
  out.reserve(t.leaf_count());
  for (NodeId leaf : t.leaves()) out.push_back(node_mass[leaf]);
  return out;
}

}  // namespace

DyadicMeasure lebesgue(TreePtr tree) {
  require_tree(tree);
  std::vector<Rational> masses;
  masses.reserve(tree->leaf_count());
  for (NodeId leaf : tree->leaves()) masses.push_back(tree->interval(leaf).length());
  return DyadicMeasure(tree, std::move(masses), true, "lebesgue");
}

DyadicMeasure density_plus_atoms(TreePtr tree, const LeafDensity& density, const std::vector<Atom>& atoms,
                                 bool atomless, std::string label) {
  require_tree(tree);
  const DyadicTree& t = *tree;
  std::vector<Rational> masses;
  masses.reserve(t.leaf_count());
  std::map<Rational, size_t> by_left;
  for (size_t i = 0; i < t.leaf_count(); ++i) {
    const DyadicInterval& leaf = t.interval(t.leaves()[i]);
    masses.push_back(density ? density(leaf) : Rational(0));
    by_left.emplace(leaf.left(), i);
  }
  for (const Atom& atom : atoms) {
    auto it = by_left.find(atom.point);
    if (it == by_left.end())
      throw DyadError(ErrorKind::UnsupportedTree, "atom at " + to_string(atom.point) + " is not a leaf left endpoint");
    masses[it->second] += atom.mass;
  }
  return DyadicMeasure(tree, std::move(masses), atomless, std::move(label));
}

DyadicMeasure sib_not_balanced(TreePtr tree, bool atomless_variant) {
  require_tree(tree);
  const DyadicTree& t = *tree;
  Rational lo(0), hi(0);
  for (NodeId r : t.roots()) {
    lo = std::min(lo, t.interval(r).left());
    hi = std::max(hi, t.interval(r).right());
  }
  if (lo < 0) throw DyadError(ErrorKind::UnsupportedTree, "sibNotBalanced lives on [0, infinity)");
  auto density = [](const DyadicInterval& leaf) -> Rational {
    const Rational a = leaf.left();
    const Rational len = leaf.length();
    if (leaf.right() <= 1) return len;
    if (a < 1) throw DyadError(ErrorKind::UnsupportedTree, "leaf straddles 1");
    // a in [2^k, 2^(k+1)); leaves are at most unit length so the leaf stays in that shell.
    int k = 0;
    while (Rational(pow2(k + 1)) <= a) ++k;
    if (leaf.right() > pow2(k + 1)) throw DyadError(ErrorKind::UnsupportedTree, "leaf straddles a dyadic shell");
    return len * pow2(-3L * k);
  };
  std::vector<Atom> atoms;
  for (int k = 0; Rational(pow2(k)) < hi; ++k) {
    const Rational w = pow2(-k);
    atoms.push_back({pow2(k), w});
    const Rational three_halves = Rational(3, 2) * pow2(k);
    if (three_halves < hi) atoms.push_back({three_halves, w});
  }
  return density_plus_atoms(tree, density, atoms, atomless_variant, atomless_variant ? "sibNotBalanced-atomless" : "sibNotBalanced");
}

DyadicMeasure mu_k(TreePtr tree, int k, bool atomless_variant) {
  require_tree(tree);
  if (k < 0) throw DyadError(ErrorKind::InvalidArgument, "muK needs k >= 0");
  const DyadicTree& t = *tree;
  const Rational dens = pow2(-k);
  std::vector<Atom> atoms;
  for (NodeId r : t.roots()) {
    const Rational a = t.interval(r).left();
    const Rational b = t.interval(r).right();
    // Integers in [a, b).
    Integer first = numerator(a) / denominator(a);
    if (Rational(first) < a) first += 1;
    for (Integer z = first; Rational(z) < b; ++z) atoms.push_back({Rational(z), Rational(1)});
  }
  auto density = [dens](const DyadicInterval& leaf) { return dens * leaf.length(); };
  std::string label = "muK(" + std::to_string(k) + ")";
  if (atomless_variant) label += "-atomless";
  return density_plus_atoms(tree, density, atoms, atomless_variant, label);
}

int thm34_block_index(const DyadicInterval& I) {
  if (I.position == 0) return 0;
  int lg = 0;
  while ((I.position >> (lg + 1)) != 0) ++lg;
  return I.scale - lg;
}

TreePtr thm34_tree(int n, int tail, int below) {
  const int leaf_scale = n + tail;
  return DyadicTree::refined(0, {0}, leaf_scale, [below](const DyadicInterval& I) {
    if (I.position == 0) return true;
    return I.scale < thm34_block_index(I) + below;
  });
}

namespace {

struct Thm34Masses {
  std::vector<Rational> head;     // mu(I_k)
  std::vector<Rational> sibling;  // mu(I_k^s), index 0 unused
};

Thm34Masses thm34_masses(int n, int max_k) {
  Thm34Masses out;
  out.head.resize(static_cast<size_t>(max_k) + 1);
  out.sibling.resize(static_cast<size_t>(max_k) + 1);
  out.head[0] = 1;
  if (max_k >= 1) {
    out.head[1] = Rational(1, 2);
    out.sibling[1] = Rational(1, 2);
  }
  for (int k = 2; k <= max_k; ++k) {
    const long kk = k <= n ? k : n;
    const Rational b(1, kk * kk);
    out.sibling[k] = b * out.head[k - 1];
    out.head[k] = (1 - b) * out.head[k - 1];
  }
  return out;
}

Rational thm34_relative_mass(const Thm34Masses& t, const DyadicInterval& rel) {
  const int k = thm34_block_index(rel);
  if (k == 0) return t.head.at(static_cast<size_t>(rel.scale));
  return t.sibling.at(static_cast<size_t>(k)) * pow2(-(rel.scale - k));
}

}  // namespace

DyadicMeasure thm34_block(TreePtr tree, int n) {
  require_tree(tree);
  const DyadicTree& t = *tree;
  if (n < 2) throw DyadError(ErrorKind::InvalidArgument, "thm34Block needs n >= 2");
  if (t.root_scale() != 0 || t.root_positions() != std::vector<std::int64_t>{0})
    throw DyadError(ErrorKind::UnsupportedTree, "thm34Block lives on the single root [0,1)");
  if (t.max_leaf_scale() <= n) throw DyadError(ErrorKind::UnsupportedTree, "thm34Block needs leafScale > n");
  const Thm34Masses masses = thm34_masses(n, t.max_leaf_scale());
  std::vector<Rational> leaf;
  leaf.reserve(t.leaf_count());
  for (NodeId id : t.leaves()) leaf.push_back(thm34_relative_mass(masses, t.interval(id)));
  return DyadicMeasure(tree, std::move(leaf), true, "thm34Block(" + std::to_string(n) + ")");
}

std::optional<GluedLocation> thm34_glued_locate(const DyadicInterval& I) {
  if (I.position < 0) return std::nullopt;
  if (I.scale >= 0) {
    // Inside [0, 2^0) or some block [2^(n-1), 2^n) with n >= 1.
    const std::int64_t unit = I.position >> I.scale;  // integer part of the left endpoint
    if (unit == 0) return GluedLocation{0, I, Rational(1)};
    int n = 1;
    while ((unit >> n) != 0) ++n;
    // Block n starts at 2^(n-1) with length 2^(n-1).
    const int block_scale = -(n - 1);
    const int rel_scale = I.scale - block_scale;
    const std::int64_t rel_pos = I.position - (std::int64_t{1} << rel_scale);
    return GluedLocation{n, {rel_scale, rel_pos}, pow2(n - 1)};
  }
  // Scale below zero: I has length 2^(-scale) >= 2.
  if (I.position == 0) return std::nullopt;  // [0, 2^j) spans several blocks
  if (I.position != 1) return std::nullopt;
  const int n = 1 - I.scale;
  return GluedLocation{n, {0, 0}, pow2(n - 1)};
}

TreePtr thm34_glued_tree(int blocks, int tail, int below) {
  if (blocks < 0) throw DyadError(ErrorKind::InvalidArgument, "negative block count");
  int max_scale = 0;
  for (int n = 0; n <= blocks; ++n) max_scale = std::max(max_scale, 2 * (n + 1) + tail - (n >= 1 ? n - 1 : 0));
  return DyadicTree::refined(-blocks, {0}, max_scale, [=](const DyadicInterval& I) {
    auto loc = thm34_glued_locate(I);
    if (!loc) return true;
    const int param = 2 * (loc->block + 1);
    if (loc->relative.scale >= param + tail) return false;
    if (loc->relative.position == 0) return true;
    return loc->relative.scale < thm34_block_index(loc->relative) + below;
  });
}

DyadicMeasure thm34_glued(TreePtr tree, int blocks) {
  require_tree(tree);
  const DyadicTree& t = *tree;
  if (t.root_scale() != -blocks || t.root_positions() != std::vector<std::int64_t>{0})
    throw DyadError(ErrorKind::UnsupportedTree, "thm34Glued lives on the single root [0, 2^blocks)");
  std::vector<Thm34Masses> tables;
  for (int n = 0; n <= blocks; ++n) tables.push_back(thm34_masses(2 * (n + 1), t.max_leaf_scale() + blocks + 1));
  std::vector<Rational> leaf;
  leaf.reserve(t.leaf_count());
  for (NodeId id : t.leaves()) {
    auto loc = thm34_glued_locate(t.interval(id));
    if (!loc) throw DyadError(ErrorKind::UnsupportedTree, "leaf spans several blocks");
    leaf.push_back(loc->factor * thm34_relative_mass(tables[static_cast<size_t>(loc->block)], loc->relative));
  }
  return DyadicMeasure(tree, std::move(leaf), true, "thm34Glued(" + std::to_string(blocks) + ")");
}

DyadicMeasure random_sibling_balanced(TreePtr tree, std::uint64_t seed, double target_const, double split_ratio) {
  require_tree(tree);
  const DyadicTree& t = *tree;
  if (target_const < 1.5) throw DyadError(ErrorKind::InvalidArgument, "sibling target must be at least 3/2");
  const double c = std::max(1.0, target_const / 1.25);
  std::vector<Rational> mass(t.size());
  std::vector<bool> assigned(t.size(), false);
  auto split = [&](NodeId id, const Rational& left_fraction) {
    mass[t.left(id)] = mass[id] * left_fraction;
    mass[t.right(id)] = mass[id] - mass[t.left(id)];
    assigned[t.left(id)] = assigned[t.right(id)] = true;
  };
  for (NodeId r : t.roots()) {
    mass[r] = 1;
    assigned[r] = true;
    if (t.is_leaf(r)) continue;
    auto rng = interval_rng(seed, t.interval(r).parent());
    const double ratio = log_uniform(rng, 1.0, split_ratio);
    const double frac = coin(rng) ? 1.0 / (1.0 + ratio) : ratio / (1.0 + ratio);
    split(r, dyadic_fraction(frac));
  }
  for (NodeId p : t.internal_nodes()) {
    const NodeId a = t.left(p);
    const NodeId b = t.right(p);
    if (t.is_leaf(a) || t.is_leaf(b)) {
      // A lone internal child keeps a mild random split.
      for (NodeId child : {a, b}) {
        if (t.is_leaf(child)) continue;
        auto rng = interval_rng(seed, t.interval(child));
        split(child, dyadic_fraction(uniform(rng, 0.25, 0.75)));
      }
      continue;
    }
    auto rng = interval_rng(seed, t.interval(p));
    const bool a_light = mass[a] <= mass[b];
    const NodeId light = a_light ? a : b;
    const NodeId heavy = a_light ? b : a;
    const double r = log_uniform(rng, 1.0, split_ratio);
    const Rational t_light = dyadic_fraction(coin(rng) ? 1.0 / (1.0 + r) : r / (1.0 + r));
    split(light, t_light);
    const Rational m_light = mass[light] * t_light * (1 - t_light);
    const double rho = log_uniform(rng, 1.0 / c, c);
    const double x = rho * to_double(m_light / mass[heavy]);
    double t_heavy = 0.5;
    if (x < 0.25) t_heavy = 2.0 * x / (1.0 + std::sqrt(1.0 - 4.0 * x));
    if (coin(rng)) t_heavy = 1.0 - t_heavy;
    split(heavy, dyadic_fraction(t_heavy));
  }
  std::ostringstream label;
  label << "randomSiblingBalanced(" << seed << "," << target_const << ")";
  return DyadicMeasure(tree, leaf_masses_from_nodes(t, mass), true, label.str());
}

DyadicMeasure random_doubling(TreePtr tree, std::uint64_t seed, double ratio) {
  require_tree(tree);
  const DyadicTree& t = *tree;
  if (ratio < 1.0) throw DyadError(ErrorKind::InvalidArgument, "ratio must be at least 1");
  std::vector<Rational> mass(t.size());
  for (NodeId r : t.roots()) mass[r] = 1;
  for (NodeId p : t.internal_nodes()) {
    auto rng = interval_rng(seed, t.interval(p));
    const double r = log_uniform(rng, 1.0, ratio);
    const Rational frac = dyadic_fraction(coin(rng) ? 1.0 / (1.0 + r) : r / (1.0 + r));
    mass[t.left(p)] = mass[p] * frac;
    mass[t.right(p)] = mass[p] - mass[t.left(p)];
  }
  std::ostringstream label;
  label << "randomDoubling(" << seed << "," << ratio << ")";
  return DyadicMeasure(tree, leaf_masses_from_nodes(t, mass), true, label.str());
}

}  // namespace measures

void write_measure(std::ostream& out, const DyadicMeasure& mu) {
  const DyadicTree& t = mu.tree();
  out << "root_scale: " << t.root_scale() << "\n";
  out << "roots:";
  for (auto p : t.root_positions()) out << ' ' << p;
  out << "\n";
  out << "leaf_scale: " << t.max_leaf_scale() << "\n";
  out << "atomless: " << (mu.atomless() ? "yes" : "no") << "\n";
  if (!mu.label().empty()) out << "label: " << mu.label() << "\n";
  for (size_t i = 0; i < t.leaf_count(); ++i)
    out << t.interval(t.leaves()[i]).str() << ' ' << to_string(mu.leaf_masses()[i]) << "\n";
}

DyadicMeasure read_measure(std::istream& in) {
  std::optional<int> root_scale;
  std::vector<std::int64_t> roots;
  std::optional<bool> atomless;
  std::string label;
  std::vector<DyadicInterval> leaves;
  std::vector<Rational> masses;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto colon_space = line.find(": ");
    if (colon_space != std::string::npos && line.find(' ') == colon_space + 1) {
      const std::string key = line.substr(0, colon_space);
      const std::string value = line.substr(colon_space + 2);
      std::istringstream vs(value);
      if (key == "root_scale") {
        int r = 0;
        vs >> r;
        root_scale = r;
      } else if (key == "roots") {
        long long p = 0;
        while (vs >> p) roots.push_back(p);
      } else if (key == "atomless") {
        atomless = value == "yes";
      } else if (key == "label") {
        label = value;
      } else if (key != "leaf_scale") {
        throw DyadError(ErrorKind::ParseError, "unknown measure header '" + key + "'");
      }
      continue;
    }
    std::istringstream ls(line);
    std::string interval, value;
    if (!(ls >> interval >> value)) throw DyadError(ErrorKind::ParseError, "bad measure line '" + line + "'");
    leaves.push_back(DyadicInterval::parse(interval));
    masses.push_back(parse_rational(value));
  }
  if (!root_scale || roots.empty() || !atomless) throw DyadError(ErrorKind::ParseError, "measure header incomplete");
  auto tree = DyadicTree::from_leaves(*root_scale, roots, leaves);
  std::vector<Rational> ordered(leaves.size());
  for (size_t i = 0; i < leaves.size(); ++i) ordered[static_cast<size_t>(tree->leaf_index(tree->at(leaves[i])))] = masses[i];
  return DyadicMeasure(tree, std::move(ordered), *atomless, label);
}

}  // namespace dyadlab
