#pragma once

#include "dyadlab/shifts.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace dyadlab {

using Vec = std::vector<double>;

/// A linear map on leaf functions. adjoint is the L^2(mu) adjoint and may be
/// absent, in which case dense transposition is used.
struct LinearOperator {
  TreePtr tree;
  std::string name;
  std::function<Vec(const Vec&)> apply;
  std::function<Vec(const Vec&)> adjoint;
};

LinearOperator identity_operator(const DyadicMeasure& mu);
LinearOperator shift_operator(const HaarShiftSpec& spec, const DyadicMeasure& mu);
/// f -> T(bf) - b T(f).
LinearOperator commutator_operator(const HaarShiftSpec& spec, const FunctionRep<double>& b, const DyadicMeasure& mu);
LinearOperator multiplication_operator(const FunctionRep<double>& b, const DyadicMeasure& mu);
/// The shift [T, Lambda_b^0] with coefficients alpha (<b>_J - <b>_K).
LinearOperator remainder_operator(const HaarShiftSpec& spec, const FunctionRep<Rational>& b, const DyadicMeasure& mu);
LinearOperator paraproduct_operator(ParaproductKind kind, const FunctionRep<double>& b, const DyadicMeasure& mu);

/// Matrix of the operator in the leaf-indicator basis: column j is T(1_{leaf j}).
struct OperatorMatrix {
  Eigen::MatrixXd matrix;
};
OperatorMatrix dense_matrix(const LinearOperator& op);

enum class NormMethod { exactSpectral, lanczos, pPowerIteration, randomLowerBound };
std::string norm_method_name(NormMethod m);

struct NormOptions {
  std::uint64_t seed = 1;
  double tol = 1e-10;
  int restarts = 16;
  int max_iterations = 500;
  /// Dense decompositions up to this many leaves; matrix-free beyond.
  size_t dense_cap = 512;
  int lanczos_steps = 300;
  /// Use the power iteration from random starts only, also at p = 2.
  bool force_power = false;
};

struct NormEstimate {
  double value = 0;
  NormMethod method = NormMethod::exactSpectral;
  Vec certificate;            // f realizing the value as a lower bound
  double certificate_ratio = 0;  // ||T f|| / ||f|| recomputed independently
  int iterations = 0;
  double tolerance = 0;
  bool converged = true;
};

/// L^p(w dmu) norm of a leaf vector; w = nullptr means w = 1.
double weighted_lp_norm(const Vec& f, const DyadicMeasure& mu, const Vec* w, double p);

/// Norm of T on L^p(w dmu): exact spectral at p = 2, power iteration otherwise.
NormEstimate operator_norm(const LinearOperator& op, const DyadicMeasure& mu, const Vec* w, double p,
                           const NormOptions& opts = {});

struct WeakTypeResult {
  double ratio = 0;
  double lambda = 0;
};

/// max over lambda of lambda mu{|Tf| > lambda} / ||f||_1. An empty grid
/// takes the supremum over all lambda (attained as lambda approaches a value of |Tf| from below).
WeakTypeResult weak_type_ratio(const LinearOperator& op, const DyadicMeasure& mu, const Vec& f,
                               const std::vector<double>& lambda_grid = {});

/// One row of a scan: named parameters and measured quantities, or an error.
struct ScanRow {
  std::vector<std::pair<std::string, std::string>> params;
  std::vector<std::pair<std::string, double>> values;
  std::string error;
};

/// Evaluate every job; a failing job yields a row with its error and the scan continues.
std::vector<ScanRow> norm_scan(const std::vector<std::function<ScanRow()>>& jobs);
std::string scan_csv(const std::vector<ScanRow>& rows);

}  // namespace dyadlab
