#pragma once

#include "dyadlab/haar.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <vector>

namespace dyadlab {

/// One bad piece: f 1_I - c 1_{parent(I)} with c = <f 1_I>_{parent(I)}.
struct CzPiece {
  DyadicInterval stopping;
  Rational c;
  /// Values on the leaves of parent(I), starting at leaf index leaf_begin.
  std::int32_t leaf_begin = 0;
  std::vector<Rational> values;

  FunctionRep<Rational> function(const TreePtr& tree) const;
};

/// ||f||_{L^1(mu)}, exactly.
Rational integral_of_abs(const FunctionRep<Rational>& f, const DyadicMeasure& mu);

struct CzCertificate {
  bool reconstruction = false;   // f = g + sum of pieces, exactly
  bool zero_means = false;       // every piece integrates to 0
  Rational max_l1_ratio{0};      // max ||b_k||_1 / int_{I_k} f
  std::map<int, Rational> lp_ratio;  // ||g||_p^p / (lambda^(p-1) ||f||_1)
  std::optional<Rational> bmo_ratio; // ||g||_BMO / lambda (absent on shallow trees)
  bool passed = false;
  std::string failure;
};

struct CzOptions {
  Rational l1_constant{2};
  std::map<int, Rational> lp_constant{{2, Rational(4)}, {4, Rational(64)}};
  Rational bmo_constant{2};
  /// Raise CertificateFailure when a property fails.
  bool enforce = true;
};

struct CZResult {
  FunctionRep<Rational> good;
  std::vector<CzPiece> pieces;
  std::vector<DyadicInterval> stopping;
  Rational lambda;
  DyadicInterval base;
  CzCertificate certificate;
};

/// Calderon-Zygmund decomposition of f >= 0 on the tree interval I0 at height
/// lambda >= <f>_{I0}: stopping intervals are the maximal J in I0 with <f>_J > lambda.
CZResult cz_decompose(const FunctionRep<Rational>& f, const DyadicMeasure& mu, NodeId I0, const Rational& lambda,
                      const CzOptions& opts = {});
/// Same, with I0 the root whose interval contains the support of f.
CZResult cz_decompose(const FunctionRep<Rational>& f, const DyadicMeasure& mu, const Rational& lambda,
                      const CzOptions& opts = {});
/// Simultaneous decomposition of two functions over the common maximal stopping intervals.
std::pair<CZResult, CZResult> cz_decompose_pair(const FunctionRep<Rational>& f1, const FunctionRep<Rational>& f2,
                                                const DyadicMeasure& mu, NodeId I0, const Rational& lambda1,
                                                const Rational& lambda2, const CzOptions& opts = {});

inline constexpr int kStoppingHeight = 16;

struct StoppingChildren {
  std::vector<NodeId> bad;   // B(I), scale-then-position order
  std::vector<NodeId> good;  // G(I)
};

/// B(I): maximal J in I where some <f_i>_J exceeds height * <f_i>_I; G(I): the
/// intervals of I not inside any member of B(I).
StoppingChildren stopping_children(const FunctionRep<Rational>& f1, const FunctionRep<Rational>& f2,
                                   const DyadicMeasure& mu, NodeId I, int height = kStoppingHeight);

struct SparseFamily {
  std::vector<DyadicInterval> intervals;  // final family, sorted
  std::vector<DyadicInterval> base;       // before adding sibling-pair parents
  Rational eta{1};                        // 1 / max_I sum_{J in S, J in I} mu(J) / mu(I)
  Rational base_eta{1};
  std::optional<std::map<DyadicInterval, std::vector<NodeId>>> disjoint_sets;
};

/// Inclusive Carleson packing level of a family: 1 / max_I sum_{J subset I} mu(J)/mu(I).
Rational packing_eta(const std::vector<DyadicInterval>& family, const DyadicMeasure& mu);

SparseFamily build_sparse_family(const FunctionRep<Rational>& f1, const FunctionRep<Rational>& f2,
                                 const DyadicMeasure& mu, NodeId I0, int height = kStoppingHeight);

/// Greedy disjoint sets E_I (deepest first, free leaves left to right) with mu(E_I) >= eta mu(I).
std::optional<std::map<DyadicInterval, std::vector<NodeId>>> greedy_certificate(
    const std::vector<DyadicInterval>& family, const DyadicMeasure& mu, const Rational& eta);
bool verify_certificate(const std::vector<DyadicInterval>& family,
                        const std::map<DyadicInterval, std::vector<NodeId>>& sets, const DyadicMeasure& mu,
                        const Rational& eta);

struct SparseForms {
  double A = 0;
  double E1 = 0, E2 = 0, E3 = 0, E4 = 0;
};

SparseForms sparse_forms(const std::vector<DyadicInterval>& family, const FunctionRep<Rational>& f1,
                         const FunctionRep<Rational>& f2, const DyadicMeasure& mu);

/// sum over internal J inside I0 of <f1,h_{J+}><f2,h_{J-}> - <f1,h_{J-}><f2,h_{J+}>.
double hilbert_pairing(const FunctionRep<Rational>& f1, const FunctionRep<Rational>& f2, const DyadicMeasure& mu,
                       NodeId I0);

struct DominationResult {
  double lhs = 0;
  double rhs = 0;
  double ratio = 0;
  double sib = 0;
  SparseFamily family;
  SparseForms forms;
};

/// lhs = |<H f1, f2>| over I0; rhs = sib^(1/2) A_S + E1 + E2 + E3. Refuses atomic measures.
/// A precomputed sibling constant may be passed to skip recomputing it.
DominationResult domination_check(const FunctionRep<Rational>& f1, const FunctionRep<Rational>& f2,
                                  const DyadicMeasure& mu, NodeId I0, std::optional<double> sib = std::nullopt);

struct IterationStepTerms {
  double lhs = 0;
  double main = 0;      // sib^(1/2) <f1>_I <f2>_I mu(I)
  double parents = 0;   // S, T in B^1(I) with parents siblings
  double siblings = 0;  // S, T in B(I) siblings
  double mixed = 0;     // S the sibling of the parent of T
  double rhs() const { return main + parents + siblings + mixed; }
};

/// Term-by-term evaluation of the iteration-step estimate on one interval.
IterationStepTerms iteration_step_terms(const FunctionRep<Rational>& f1, const FunctionRep<Rational>& f2,
                                        const DyadicMeasure& mu, NodeId I, int height = kStoppingHeight);

/// "eta: r" followed by "k:p" lines and optional "E k:p: leaf ..." lines.
void write_sparse_family(std::ostream& out, const SparseFamily& s, const DyadicTree& tree);

}  // namespace dyadlab
