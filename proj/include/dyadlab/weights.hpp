#pragma once

#include "dyadlab/haar.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dyadlab {

/// A strictly positive leaf function with cached dual weights.
template <Scalar T>
class Weight {
 public:
  explicit Weight(FunctionRep<T> w);

  const FunctionRep<T>& values() const { return w_; }
  const TreePtr& tree() const { return w_.tree; }
  /// sigma_p = w^(-1/(p-1)). Exact in the rational backend when 1/(p-1) is an integer.
  const FunctionRep<T>& dual(const Rational& p) const;

 private:
  FunctionRep<T> w_;
  mutable std::map<Rational, FunctionRep<T>> dual_cache_;
};

/// p' = p/(p-1).
Rational dual_exponent(const Rational& p);
void require_exponent(const Rational& p);

template <Scalar T>
struct BmoReport {
  T norm;                          // sup_I mu(I)^-1 int_I |b - <b>_parent|
  DyadicInterval norm_witness;
  T D;                             // sup |<b>_{I+} - <b>_{I-}|
  DyadicInterval D_witness;
  std::map<int, T> kp_power;       // sup_I <|b - <b>_I|^p>_I
  std::map<int, double> kp;        // kp_power^(1/p)
  std::map<int, DyadicInterval> kp_witness;
};

template <Scalar T>
BmoReport<T> bmo_norm(const FunctionRep<T>& b, const DyadicMeasure& mu, const std::vector<int>& p_list);

struct JnPoint {
  double alpha;
  Rational fraction;  // mu{x in I : |b - c| > alpha} / mu(I)
};

struct JnProfile {
  std::vector<JnPoint> points;
  double delta_hat = 0;  // fitted decay rate
  double c_hat = 0;      // fitted prefactor
};

/// Level-set profile around the parent average (the interval's own average for roots).
template <Scalar T>
JnProfile jn_profile(const FunctionRep<T>& b, const DyadicMeasure& mu, NodeId I, const std::vector<double>& alpha_grid);

/// Dyadic maximal function; with a weight the averages are taken against w dmu.
template <Scalar T>
FunctionRep<T> dyadic_maximal(const FunctionRep<T>& f, const DyadicMeasure& mu, const FunctionRep<T>* weight = nullptr);

enum class WeightClass { Ap, ApHat, ApBal, ApSib, Ainf };

WeightClass parse_weight_class(const std::string& name);
std::string weight_class_name(WeightClass c);

template <Scalar T>
struct CharacteristicReport {
  WeightClass tag;
  Rational p;
  T value;
  DyadicInterval I;
  DyadicInterval J;
};

/// Tree-restricted supremum with a witness pair; ties keep the first pair in
/// scale-then-position order. The rational backend supports p = 2 only.
template <Scalar T>
CharacteristicReport<T> characteristic(const Weight<T>& w, const DyadicMeasure& mu, const Rational& p, WeightClass tag);

/// "classTag,p,value,witnessI,witnessJ,depth".
template <Scalar T>
std::string characteristic_csv_row(const CharacteristicReport<T>& r, int depth);
std::string characteristic_csv_header();

template <FloatScalar T>
Weight<T> exp_weight(const FunctionRep<T>& b, const T& delta);

struct AdmissibleDelta {
  double delta = 0;
  double characteristic = 0;
  /// (delta, characteristic) along the search.
  std::vector<std::pair<double, double>> path;
  /// False when some larger delta on the path had a smaller characteristic.
  bool monotone = true;
};

struct AdmissibilityOptions {
  double ceiling = 64;
  double min_delta = 1e-9;
  int refine_steps = 30;
};

/// Largest delta <= budget found with [e^(delta b)]_{ApHat} <= ceiling.
template <FloatScalar T>
AdmissibleDelta find_admissible_delta(const FunctionRep<T>& b, const DyadicMeasure& mu, const Rational& p, double budget,
                                      const AdmissibilityOptions& opts = {});

struct ReverseHolder {
  double gamma = 1;
  double constant = 1;
};

struct ReverseHolderOptions {
  double ceiling = 8;
  double min_step = 1e-3;
  int refine_steps = 40;
};

/// sup_I <w^gamma>_I^(1/gamma) / <w>_I.
template <FloatScalar T>
double reverse_holder_constant(const FunctionRep<T>& w, const DyadicMeasure& mu, double gamma);

/// Largest gamma in (1, gamma_max] whose reverse Hoelder constant stays under the ceiling.
template <FloatScalar T>
ReverseHolder reverse_holder_exponent(const Weight<T>& w, const DyadicMeasure& mu, double gamma_max,
                                      const ReverseHolderOptions& opts = {});

/// Maximal tree intervals with <w>_I > lambda, in scale-then-position order.
template <Scalar T>
std::vector<DyadicInterval> stopping_maximal_intervals(const FunctionRep<T>& w, const DyadicMeasure& mu, const T& lambda);

}  // namespace dyadlab
