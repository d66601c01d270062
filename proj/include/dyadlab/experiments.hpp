#pragma once

#include "dyadlab/measures.hpp"
#include "dyadlab/normlab.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace dyadlab {

/// One measured quantity. depth and seed are 0 for grid aggregates.
struct Measurement {
  std::string quantity;
  double value = 0;
  int depth = 0;
  std::uint64_t seed = 0;
  std::string witness;
};

/// Parameters of an experiment: depth sweep, seeds and free-form keys.
struct ExperimentConfig {
  std::vector<int> depths;
  std::vector<std::uint64_t> seeds;
  std::map<std::string, std::string> params;

  std::string get(const std::string& key, const std::string& fallback) const;
  int get_int(const std::string& key, int fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::vector<int> get_ints(const std::string& key, const std::vector<int>& fallback) const;
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
  std::vector<std::string> get_list(const std::string& key, const std::vector<std::string>& fallback) const;
};

/// "1, 2, 5..8" -> {1, 2, 5, 6, 7, 8}.
std::vector<int> parse_int_list(const std::string& text);
std::vector<std::string> split_list(const std::string& text);

using Experiment = std::function<std::vector<Measurement>(const ExperimentConfig&)>;

/// Registered experiments by name.
const std::map<std::string, Experiment>& experiment_registry();
std::vector<Measurement> run_experiment(const std::string& name, const ExperimentConfig& cfg);

namespace experiments {

/// Named measure families used by the experiments:
/// lebesgue, muk, sibnotbal, sibling, doubling, glued, with an atomless flag where it applies.
struct MeasureRequest {
  std::string kind = "lebesgue";
  int depth = 8;
  std::uint64_t seed = 1;
  int k = 4;
  bool atomless = false;
  double target = 4;
};
DyadicMeasure make_measure(const MeasureRequest& req);

/// Largest singular value of [H, b] on L^2(mu) or on L^p(w dmu).
NormEstimate commutator_norm(const FunctionRep<double>& b, const DyadicMeasure& mu, double p, const Vec* w,
                             const NormOptions& opts);

/// max over internal I (above `max_level`) of int_I |b - <b>_I|^p / ||[H,b] 1_I||_p^p, with the witness.
std::pair<double, DyadicInterval> testing_ratio(const FunctionRep<Rational>& b, const DyadicMeasure& mu, double p,
                                                int max_level);

std::vector<Measurement> isometry(const ExperimentConfig& cfg);
std::vector<Measurement> properties_bmu(const ExperimentConfig& cfg);
std::vector<Measurement> theorem_a_failure(const ExperimentConfig& cfg);
std::vector<Measurement> theorem_a_upper(const ExperimentConfig& cfg);
std::vector<Measurement> theorem_b_rh(const ExperimentConfig& cfg);
std::vector<Measurement> theorem_c_weighted(const ExperimentConfig& cfg);
std::vector<Measurement> thm34(const ExperimentConfig& cfg);
std::vector<Measurement> sparse_domination(const ExperimentConfig& cfg);
std::vector<Measurement> czdecomp(const ExperimentConfig& cfg);
std::vector<Measurement> weight_containments(const ExperimentConfig& cfg);

}  // namespace experiments

}  // namespace dyadlab
