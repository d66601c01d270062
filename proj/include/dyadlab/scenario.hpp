#pragma once

#include "dyadlab/experiments.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dyadlab {

/// A named assertion on one measured quantity: value op ceiling.
struct Check {
  std::string name;
  std::string quantity;
  std::string op = "<=";  // "<=" or ">="
  /// A number, or "@name" for a calibrated constant.
  std::string ceiling;
  std::string anchor;
};

struct Scenario {
  std::string name;
  std::string anchor;
  std::string description;
  std::string experiment;
  std::string constants_path;
  ExperimentConfig config;
  std::vector<Check> checks;
};

/// Sections "[scenario]", "[params]" and "[check NAME]" with "key = value" lines;
/// '#' starts a comment. Raises ConfigError.
Scenario parse_scenario(std::istream& in, const std::string& source = "<config>");
/// A bundled name or a path to a config file.
Scenario load_scenario(const std::string& name_or_path);

std::vector<std::string> list_scenarios();
/// Raises UnknownScenario.
const std::string& bundled_scenario_text(const std::string& name);
std::string describe_scenario(const std::string& name);

/// Frozen constants referenced as "@name" by the bundled checks.
const std::map<std::string, double>& frozen_constants();
/// "[constants]" section of "name = value" lines.
std::map<std::string, double> read_constants(std::istream& in);
void write_constants(std::ostream& out, const std::map<std::string, double>& constants);

struct RunOverrides {
  std::optional<int> depth;
  std::optional<std::uint64_t> seed;
  std::optional<int> precision_bits;
  std::optional<std::string> constants_path;
};

struct ReportRow {
  std::string scenario;
  std::uint64_t seed = 0;
  int depth = 0;
  std::string quantity;
  double value = 0;
  std::string op;
  double ceiling = 0;
  bool pass = false;
  std::string witness;
  std::string anchor;
};

struct RunResult {
  std::vector<ReportRow> rows;
  bool passed = true;
};

RunResult run_scenario(const Scenario& s, const RunOverrides& overrides = {});
std::string report_csv(const std::vector<ReportRow>& rows);
std::string report_summary(const Scenario& s, const RunResult& r);

/// Re-measure the calibrated constants: the worst observed value times `margin`.
std::map<std::string, double> calibrate_constants(double margin = 1.25);

}  // namespace dyadlab
