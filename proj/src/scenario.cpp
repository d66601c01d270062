#include "dyadlab/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace dyadlab {

namespace {

const std::vector<std::pair<std::string, std::string>>& bundled() {
  static const std::vector<std::pair<std::string, std::string>> table{
      {"isometry", R"([scenario]
name = isometry
anchor = The dyadic Hilbert transform is an anti self-adjoint isometry on the sibling-complete span
description = Quad-precision checks of H^2 = -Id, isometry, anti-symmetry, H h_{I+} = h_{I-} and R_b = [H, Lambda_b^0] on random functions.
experiment = isometry
depths = 6, 8
seeds = 1, 2

[params]
measures = lebesgue, muk, sibling
trials = 10
precision_bits = 113

[check isometry]
quantity = isometry_error
op = <=
ceiling = 1e-20

[check square]
quantity = square_error
op = <=
ceiling = 1e-20

[check antisymmetry]
quantity = antisymmetry_error
op = <=
ceiling = 1e-20

[check haar-map]
quantity = haar_map_error
op = <=
ceiling = 1e-20

[check remainder]
quantity = remainder_error
op = <=
ceiling = 1e-20

[check norm]
quantity = hilbert_norm_error
op = <=
ceiling = 1e-10
)"},
      {"theoremA-upper", R"([scenario]
name = theoremA-upper
anchor = The commutator [H, b] is bounded by the martingale BMO norm on sibling balanced measures
description = Grid of random sibling balanced measures and BMO functions; commutator norm lower bounds over ||b||_BMO and the per-interval testing inequality, with depth stability.
experiment = theoremA-upper
depths = 6, 8, 10
seeds = 1

[params]
measures = 20
functions = 20
p = 2, 3
resolution_gap = 2
target = 4
restarts = 3
max_iterations = 100

[check comm-p2]
quantity = C_comm_p2
op = <=
ceiling = @C_comm_p2

[check comm-p3]
quantity = C_comm_p3
op = <=
ceiling = @C_comm_p3

[check stability-p2]
quantity = comm_variation_p2
op = <=
ceiling = 2

[check stability-p3]
quantity = comm_variation_p3
op = <=
ceiling = 2

[check testing-p2]
quantity = C_testing_p2
op = <=
ceiling = @C_testing_p2

[check testing-p3]
quantity = C_testing_p3
op = <=
ceiling = @C_testing_p3

[check testing-stability-p2]
quantity = testing_variation_p2
op = <=
ceiling = 2

[check testing-stability-p3]
quantity = testing_variation_p3
op = <=
ceiling = 2
)"},
      {"theoremA-failure", R"([scenario]
name = theoremA-failure
anchor = The lower commutator estimate fails for the measures mu_k and the functions b_k
description = ||[H, b_k]||_{L^2(mu_k)} grows like 2^(k/2) while D_{b_k} grows like 2^k; weak-type ratios of H stay bounded in k.
experiment = theoremA-failure
depths = 10, 12, 14
seeds = 1

[params]
k = 4..10
weak_k = 2..8
power = 1

[check scaled]
quantity = comm_over_2k2
op = <=
ceiling = @C_failure

[check certified]
quantity = certified_over_2k2
op = <=
ceiling = @C_failure

[check power]
quantity = power_over_2k2
op = <=
ceiling = @C_failure

[check decay]
quantity = decay_ratio
op = <=
ceiling = 0.125

[check monotone]
quantity = monotone_decay
op = >=
ceiling = 1

[check weak]
quantity = weak_ratio
op = <=
ceiling = @C_weak
)"},
      {"propertiesbmu", R"([scenario]
name = propertiesbmu
anchor = mu_k is uniformly sibling balanced while D_{b_k} is comparable to 2^k and K^2_{b_k} to 2^(k/2)
description = Sibling constant of mu_k, the sibling-difference oscillation D and the L^2 oscillation K^2 of b_k for k = 4..10.
experiment = propertiesbmu
depths = 10, 12, 14
seeds = 1

[params]
k = 4..10

[check sibling]
quantity = sib
op = <=
ceiling = 4

[check D-upper]
quantity = D_over_2k
op = <=
ceiling = 4

[check D-lower]
quantity = D_over_2k
op = >=
ceiling = 0.25

[check K2]
quantity = K2_over_2k2
op = <=
ceiling = 8
)"},
      {"theoremB-rh", R"([scenario]
name = theoremB-rh
anchor = Exponentials of small multiples of BMO functions are Ahat_p weights with a reverse Hoelder inequality
description = Admissible exponents delta for e^(delta b), the BMO norm of log w against log(2 [w]), and reverse Hoelder exponents over depths 6..12.
experiment = theoremB-rh
depths = 6, 8, 10, 12
seeds = 1

[params]
resolution_gap = 2
measures = 6
functions = 6
p = 2, 3
gamma_max = 4

[check delta]
quantity = delta_times_bmo
op = >=
ceiling = @c_delta

[check log-bmo]
quantity = log_bmo_excess
op = <=
ceiling = 1

[check gamma]
quantity = rh_gamma
op = >=
ceiling = 1.001

[check rh-constant]
quantity = rh_constant
op = <=
ceiling = 8

[check failures]
quantity = failures
op = <=
ceiling = 0

[check gamma-stability]
quantity = rh_gamma_variation
op = <=
ceiling = 2
)"},
      {"theoremC-weighted", R"([scenario]
name = theoremC-weighted
anchor = Weighted commutator bound on L^p(w) for Ahat_p weights on sibling balanced atomless measures
description = ||[H, b]||_{L^2(w)} lower bounds over ||b||_BMO across random measures, Ahat_2 weights and BMO functions.
experiment = theoremC-weighted
depths = 8
seeds = 1

[params]
measures = 4
weights = 4
functions = 4
p = 2

[check weighted]
quantity = weighted_ratio_p2
op = <=
ceiling = @C_weighted_p2
)"},
      {"thm34", R"([scenario]
name = thm34
anchor = A balanced atomless measure on which A_2^bal is strictly larger than Ahat_2
description = Block weights w_n with [w_n]_Ahat2 >= (1/2) sqrt(n/2) and bounded [w_n]_A2bal, and the glued measure over blocks.
experiment = thm34
seeds = 1

[params]
n = 4, 8, 16, 32
blocks = 1..4

[check separation]
quantity = ahat_over_bound
op = >=
ceiling = 1

[check witness-average]
quantity = sigma_avg_error
op = <=
ceiling = 1e-20

[check balanced]
quantity = bal_characteristic
op = <=
ceiling = @C_bal_block

[check balanced-measure]
quantity = bal_measure
op = <=
ceiling = @C_bal_block

[check glued-balanced]
quantity = glued_bal_measure
op = <=
ceiling = @C_bal_block

[check glued-separation]
quantity = glued_ahat_over_bound
op = >=
ceiling = 1

[check glued-growth]
quantity = glued_ahat_growth
op = >=
ceiling = 1.25
)"},
      {"sparse-domination", R"([scenario]
name = sparse-domination
anchor = Sparse Domination for the dyadic Hilbert transform on atomless sibling balanced measures
description = Sparse families from the stopping construction, exact packing levels, and |<H f1, f2>| against the sparse forms over several measure families.
experiment = sparse-domination
depths = 8, 12
seeds = 1

[params]
resolution = 6
trials = 100
families = lebesgue, sibnotbal, muk2, muk4, muk8, glued

[check domination]
quantity = domination_ratio
op = <=
ceiling = @C0_domination

[check packing]
quantity = eta
op = >=
ceiling = @eta0

[check drift]
quantity = depth_drift
op = <=
ceiling = 0.25

[check E4]
quantity = e4_max
op = <=
ceiling = 1
)"},
      {"czdecomp", R"([scenario]
name = czdecomp
anchor = Calderon-Zygmund decomposition on the tree with certified good and bad parts
description = Exact certificates for f = g + sum b_k: reconstruction, zero means, L^1 control of the pieces and L^p, BMO control of g.
experiment = czdecomp
depths = 8
seeds = 1

[params]
inputs = 1000

[check certificates]
quantity = cz_failures
op = <=
ceiling = 0
)"},
      {"weight-containments", R"([scenario]
name = weight-containments
anchor = Containments among A_p, Ahat_p, A_p^bal and A_p^sib
description = [w]_Apsib <= 2^max(1,p-1) [w]_Ahatp^3 on sibling balanced measures, A_p <= Ahat_p, and comparable A_p^sib and A_p^bal on balanced measures.
experiment = weight-containments
depths = 8
seeds = 1

[params]
measures = 6
weights = 6
p = 2, 3

[check cubic-p2]
quantity = sib_over_hat_cubed_p2
op = <=
ceiling = 1

[check cubic-p3]
quantity = sib_over_hat_cubed_p3
op = <=
ceiling = 1

[check ap-p2]
quantity = ap_over_hat_p2
op = <=
ceiling = 1.000000001

[check ap-p3]
quantity = ap_over_hat_p3
op = <=
ceiling = 1.000000001

[check sib-bal-p2]
quantity = sib_over_bal_p2
op = <=
ceiling = @C_sibbal

[check bal-sib-p2]
quantity = bal_over_sib_p2
op = <=
ceiling = @C_sibbal

[check sib-bal-p3]
quantity = sib_over_bal_p3
op = <=
ceiling = @C_sibbal

[check bal-sib-p3]
quantity = bal_over_sib_p3
op = <=
ceiling = @C_sibbal
)"},
  };
  return table;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void config_error(const std::string& source, int line, const std::string& what) {
  throw DyadError(ErrorKind::ConfigError, source + ":" + std::to_string(line) + ": " + what);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

std::string number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return to_string(x);
}

double resolve_ceiling(const Check& c, const std::map<std::string, double>& constants) {
  if (!c.ceiling.empty() && c.ceiling[0] == '@') {
    auto it = constants.find(c.ceiling.substr(1));
    if (it == constants.end()) throw DyadError(ErrorKind::ConfigError, "unknown constant " + c.ceiling);
    return it->second;
  }
  try {
    size_t used = 0;
    const double v = std::stod(c.ceiling, &used);
    if (used != c.ceiling.size()) throw std::invalid_argument(c.ceiling);
    return v;
  } catch (const std::logic_error&) {
    throw DyadError(ErrorKind::ConfigError, "check " + c.name + ": bad ceiling '" + c.ceiling + "'");
  }
}

}  // namespace

Scenario parse_scenario(std::istream& in, const std::string& source) {
  Scenario s;
  std::string section;
  std::string line;
  int lineno = 0;
  std::set<std::string> seen_checks;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') config_error(source, lineno, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.rfind("check", 0) == 0) {
        const std::string name = trim(section.substr(5));
        if (name.empty()) config_error(source, lineno, "check sections need a name");
        if (!seen_checks.insert(name).second) config_error(source, lineno, "duplicate check " + name);
        s.checks.push_back(Check{name, "", "<=", "", ""});
        section = "check";
      } else if (section != "scenario" && section != "params") {
        config_error(source, lineno, "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) config_error(source, lineno, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) config_error(source, lineno, "empty key");
    if (section == "scenario") {
      if (key == "name") s.name = value;
      else if (key == "anchor") s.anchor = value;
      else if (key == "description") s.description = value;
      else if (key == "experiment") s.experiment = value;
      else if (key == "constants") s.constants_path = value;
      else if (key == "depths") s.config.depths = parse_int_list(value);
      else if (key == "seeds") {
        for (int v : parse_int_list(value)) {
          if (v < 0) config_error(source, lineno, "seeds must be nonnegative");
          s.config.seeds.push_back(static_cast<std::uint64_t>(v));
        }
      } else config_error(source, lineno, "unknown scenario key " + key);
    } else if (section == "params") {
      s.config.params[key] = value;
    } else if (section == "check") {
      Check& c = s.checks.back();
      if (key == "quantity") c.quantity = value;
      else if (key == "op") {
        if (value != "<=" && value != ">=") config_error(source, lineno, "op must be <= or >=");
        c.op = value;
      } else if (key == "ceiling") c.ceiling = value;
      else if (key == "anchor") c.anchor = value;
      else config_error(source, lineno, "unknown check key " + key);
    } else {
      config_error(source, lineno, "key outside a section");
    }
  }
  if (s.name.empty()) throw DyadError(ErrorKind::ConfigError, source + ": scenario name missing");
  if (s.experiment.empty()) throw DyadError(ErrorKind::ConfigError, source + ": experiment missing");
  if (!experiment_registry().count(s.experiment))
    throw DyadError(ErrorKind::ConfigError, source + ": unknown experiment " + s.experiment);
  for (Check& c : s.checks) {
    if (c.quantity.empty() || c.ceiling.empty())
      throw DyadError(ErrorKind::ConfigError, source + ": check " + c.name + " needs quantity and ceiling");
    if (c.anchor.empty()) c.anchor = s.anchor;
  }
  return s;
}

std::vector<std::string> list_scenarios() {
  std::vector<std::string> out;
  for (const auto& [name, text] : bundled()) out.push_back(name);
  return out;
}

const std::string& bundled_scenario_text(const std::string& name) {
  for (const auto& [n, text] : bundled())
    if (n == name) return text;
  throw DyadError(ErrorKind::UnknownScenario, "no bundled scenario named " + name);
}

Scenario load_scenario(const std::string& name_or_path) {
  for (const auto& [n, text] : bundled()) {
    if (n != name_or_path) continue;
    std::istringstream in(text);
    return parse_scenario(in, n);
  }
  std::ifstream in(name_or_path);
  if (!in) throw DyadError(ErrorKind::ConfigError, "no bundled scenario or readable file named " + name_or_path);
  return parse_scenario(in, name_or_path);
}

std::string describe_scenario(const std::string& name) {
  std::istringstream in(bundled_scenario_text(name));
  const Scenario s = parse_scenario(in, name);
  std::ostringstream out;
  out << s.name << "\n  anchor: " << s.anchor << "\n  " << s.description << "\n  experiment: " << s.experiment
      << "\n  checks:";
  for (const Check& c : s.checks) out << "\n    " << c.name << ": " << c.quantity << " " << c.op << " " << c.ceiling;
  out << "\n";
  return out.str();
}

const std::map<std::string, double>& frozen_constants() {
  // Worst values of `dyadlab calibrate` times 1.25, rounded outward.
  static const std::map<std::string, double> table{
      {"C0_domination", 3.5},
      {"eta0", 0.73},
      {"C_comm_p2", 4.2},
      {"C_comm_p3", 6.0},
      {"C_testing_p2", 144.0},
      {"C_testing_p3", 157.0},
      {"C_weighted_p2", 250.0},
      {"C_failure", 1.9},
      {"C_weak", 1.5},
      {"c_delta", 1.78},
      {"C_bal_block", 5.0},
      {"C_sibbal", 73.0},
  };
  return table;
}

std::map<std::string, double> read_constants(std::istream& in) {
  std::map<std::string, double> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty() || line == "[constants]") continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) config_error("constants", lineno, "expected name = value");
    try {
      out[trim(line.substr(0, eq))] = std::stod(trim(line.substr(eq + 1)));
    } catch (const std::logic_error&) {
      config_error("constants", lineno, "not a number");
    }
  }
  return out;
}

void write_constants(std::ostream& out, const std::map<std::string, double>& constants) {
  out << "[constants]\n";
  for (const auto& [k, v] : constants) out << k << " = " << number(v) << "\n";
}

RunResult run_scenario(const Scenario& s, const RunOverrides& overrides) {
  std::map<std::string, double> constants = frozen_constants();
  const std::string path = overrides.constants_path ? *overrides.constants_path : s.constants_path;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw DyadError(ErrorKind::ConfigError, "cannot read constants file " + path);
    for (const auto& [k, v] : read_constants(in)) constants[k] = v;
  }
  std::vector<double> ceilings;
  for (const Check& c : s.checks) ceilings.push_back(resolve_ceiling(c, constants));

  RunResult result;
  if (s.checks.empty()) return result;
  ExperimentConfig cfg = s.config;
  if (overrides.depth) cfg.depths = {*overrides.depth};
  if (overrides.seed) cfg.seeds = {*overrides.seed};
  if (overrides.precision_bits) cfg.params["precision_bits"] = std::to_string(*overrides.precision_bits);
  const std::vector<Measurement> data = run_experiment(s.experiment, cfg);
  for (size_t i = 0; i < s.checks.size(); ++i) {
    const Check& c = s.checks[i];
    bool any = false;
    for (const Measurement& m : data) {
      if (m.quantity != c.quantity) continue;
      any = true;
      const bool pass = c.op == "<=" ? m.value <= ceilings[i] : m.value >= ceilings[i];
      result.rows.push_back({s.name, m.seed, m.depth, m.quantity, m.value, c.op, ceilings[i], pass, m.witness, c.anchor});
      result.passed = result.passed && pass;
    }
    if (!any) {
      result.rows.push_back({s.name, 0, 0, c.quantity, std::nan(""), c.op, ceilings[i], false, "no measurement", c.anchor});
      result.passed = false;
    }
  }
  return result;
}

std::string report_csv(const std::vector<ReportRow>& rows) {
  std::ostringstream out;
  out << "scenario,seed,depth,quantity,value,op,ceiling,pass,witness,anchor\n";
  for (const ReportRow& r : rows) {
    out << csv_field(r.scenario) << ',' << r.seed << ',' << r.depth << ',' << csv_field(r.quantity) << ','
        << number(r.value) << ',' << csv_field(r.op) << ',' << number(r.ceiling) << ',' << (r.pass ? "pass" : "fail")
        << ',' << csv_field(r.witness) << ',' << csv_field(r.anchor) << '\n';
  }
  return out.str();
}

std::string report_summary(const Scenario& s, const RunResult& r) {
  std::ostringstream out;
  const auto failed = std::count_if(r.rows.begin(), r.rows.end(), [](const ReportRow& x) { return !x.pass; });
  out << "scenario: " << s.name << "\n";
  out << "anchor: " << s.anchor << "\n";
  out << "rows: " << r.rows.size() << ", failed: " << failed << "\n";
  for (const Check& c : s.checks) {
    double worst = std::nan("");
    bool ok = true;
    size_t n = 0;
    for (const ReportRow& row : r.rows) {
      if (row.quantity != c.quantity || row.op != c.op) continue;
      ++n;
      ok = ok && row.pass;
      if (std::isnan(worst) || (c.op == "<=" ? row.value > worst : row.value < worst)) worst = row.value;
    }
    out << "  " << (ok ? "PASS" : "FAIL") << "  " << c.name << ": worst " << c.quantity << " = " << number(worst) << " "
        << c.op << " " << c.ceiling << " over " << n << " rows\n";
  }
  for (const ReportRow& row : r.rows)
    if (!row.pass)
      out << "  failed row: depth " << row.depth << " seed " << row.seed << " " << row.quantity << " = "
          << number(row.value) << " (" << row.witness << ")\n";
  out << (r.passed ? "result: PASS\n" : "result: FAIL\n");
  return out.str();
}

std::map<std::string, double> calibrate_constants(double margin) {
  auto worst = [](const std::vector<Measurement>& data, const std::string& q, bool largest = true) {
    double w = largest ? 0.0 : std::numeric_limits<double>::infinity();
    for (const Measurement& m : data)
      if (m.quantity == q) w = largest ? std::max(w, m.value) : std::min(w, m.value);
    return w;
  };
  std::map<std::string, double> out;
  auto load = [](const std::string& name) { return load_scenario(name).config; };

  const auto dom = run_experiment("sparse-domination", load("sparse-domination"));
  out["C0_domination"] = margin * worst(dom, "domination_ratio");
  out["eta0"] = worst(dom, "eta", false) / margin;

  const auto upper = run_experiment("theoremA-upper", load("theoremA-upper"));
  for (const char* q : {"C_comm_p2", "C_comm_p3", "C_testing_p2", "C_testing_p3"}) out[q] = margin * worst(upper, q);

  const auto weighted = run_experiment("theoremC-weighted", load("theoremC-weighted"));
  out["C_weighted_p2"] = margin * worst(weighted, "weighted_ratio_p2");

  const auto failure = run_experiment("theoremA-failure", load("theoremA-failure"));
  out["C_failure"] = margin * std::max({worst(failure, "comm_over_2k2"), worst(failure, "certified_over_2k2"),
                                        worst(failure, "power_over_2k2")});
  out["C_weak"] = margin * worst(failure, "weak_ratio");

  const auto rh = run_experiment("theoremB-rh", load("theoremB-rh"));
  out["c_delta"] = worst(rh, "delta_times_bmo", false) / margin;

  const auto block = run_experiment("thm34", load("thm34"));
  out["C_bal_block"] = margin * std::max({worst(block, "bal_characteristic"), worst(block, "bal_measure"),
                                          worst(block, "glued_bal_measure")});

  const auto cont = run_experiment("weight-containments", load("weight-containments"));
  out["C_sibbal"] = margin * std::max({worst(cont, "sib_over_bal_p2"), worst(cont, "bal_over_sib_p2"),
                                       worst(cont, "sib_over_bal_p3"), worst(cont, "bal_over_sib_p3")});
  return out;
}

}  // namespace dyadlab
