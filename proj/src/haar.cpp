#include "dyadlab/haar.hpp"

#include <istream>
#include <ostream>
#include <sstream>

namespace dyadlab {

ParaproductKind parse_paraproduct_kind(const std::string& name) {
  if (name == "piB") return ParaproductKind::piB;
  if (name == "piBStar") return ParaproductKind::piBStar;
  if (name == "deltaB") return ParaproductKind::deltaB;
  if (name == "lambda0") return ParaproductKind::lambda0;
  if (name == "lambda1") return ParaproductKind::lambda1;
  if (name == "lambdaFull") return ParaproductKind::lambdaFull;
  throw DyadError(ErrorKind::InvalidArgument, "unknown paraproduct '" + name + "'");
}

Rational cubed_haar_canonical(const DyadicMeasure& mu, NodeId id) {
  const DyadicTree& t = mu.tree();
  if (t.is_leaf(id)) throw DyadError(ErrorKind::OutOfTree, "leaves carry no Haar function");
  return (mu.mass(t.right(id)) - mu.mass(t.left(id))) / mu.mass(id);
}

void write_function(std::ostream& out, const FunctionRep<Rational>& f) {
  const DyadicTree& t = *f.tree;
  for (size_t i = 0; i < f.size(); ++i) out << t.interval(t.leaves()[i]).str() << ' ' << to_string(f.values[i]) << "\n";
}

FunctionRep<Rational> read_function(std::istream& in, const TreePtr& tree) {
  FunctionRep<Rational> f = FunctionRep<Rational>::constant(tree, Rational(0));
  std::vector<bool> seen(tree->leaf_count(), false);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string interval, value;
    if (!(ls >> interval >> value)) throw DyadError(ErrorKind::ParseError, "bad function line '" + line + "'");
    const NodeId id = tree->at(DyadicInterval::parse(interval));
    if (!tree->is_leaf(id)) throw DyadError(ErrorKind::ParseError, "function values live on leaves: " + interval);
    const auto idx = static_cast<size_t>(tree->leaf_index(id));
    f.values[idx] = parse_rational(value);
    seen[idx] = true;
  }
  for (bool s : seen)
    if (!s) throw DyadError(ErrorKind::ParseError, "function file misses a leaf");
  return f;
}

void write_coefficients(std::ostream& out, const HaarCoefficients<Rational>& c) {
  const DyadicTree& t = *c.tree;
  for (size_t r = 0; r < t.root_count(); ++r)
    out << "root " << t.interval(t.roots()[r]).str() << ' ' << to_string(c.root_average[r]) << "\n";
  for (NodeId id : t.internal_nodes()) out << t.interval(id).str() << ' ' << to_string(c.diff[id]) << "\n";
}

}  // namespace dyadlab
