#include "dyadlab/scenario.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw dyadlab::DyadError(dyadlab::ErrorKind::ConfigError, "cannot write " + path.string());
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Experiments on dyadic harmonic analysis over finite trees"};
  app.require_subcommand(1);

  std::string scenario;
  std::optional<int> depth;
  std::optional<std::uint64_t> seed;
  std::optional<int> precision_bits;
  std::optional<std::string> constants;
  std::string out_dir;
  auto* run = app.add_subcommand("run", "Run a bundled scenario or a scenario config file");
  run->add_option("scenario", scenario, "Bundled name or config path")->required();
  run->add_option("--depth", depth, "Run a single depth instead of the configured sweep");
  run->add_option("--seed", seed, "Run a single seed instead of the configured seeds");
  run->add_option("--precision-bits", precision_bits, "53 for double, 113 for quad where the experiment supports both");
  run->add_option("--constants", constants, "Constants file written by calibrate");
  run->add_option("--out", out_dir, "Directory for <scenario>.csv and <scenario>.summary.txt");

  app.add_subcommand("list", "List bundled scenarios");

  std::string describe_name;
  auto* describe = app.add_subcommand("describe", "Describe a bundled scenario");
  describe->add_option("scenario", describe_name)->required();

  std::string constants_out = "constants.ini";
  double margin = 1.25;
  auto* calibrate = app.add_subcommand("calibrate", "Re-measure the calibrated constants and write them to a file");
  calibrate->add_option("--out", constants_out, "Constants file to write");
  calibrate->add_option("--margin", margin, "Factor applied to the worst observed value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (app.got_subcommand("list")) {
      for (const std::string& name : dyadlab::list_scenarios()) {
        const dyadlab::Scenario s = dyadlab::load_scenario(name);
        std::cout << name << "\t" << s.anchor << "\n";
      }
      return 0;
    }
    if (app.got_subcommand("describe")) {
      std::cout << dyadlab::describe_scenario(describe_name);
      return 0;
    }
    if (app.got_subcommand("calibrate")) {
      const auto c = dyadlab::calibrate_constants(margin);
      std::ofstream out(constants_out);
      if (!out) throw dyadlab::DyadError(dyadlab::ErrorKind::ConfigError, "cannot write " + constants_out);
      dyadlab::write_constants(out, c);
      dyadlab::write_constants(std::cout, c);
      return 0;
    }
    const dyadlab::Scenario s = dyadlab::load_scenario(scenario);
    dyadlab::RunOverrides ov{depth, seed, precision_bits, constants};
    const dyadlab::RunResult r = dyadlab::run_scenario(s, ov);
    const std::string csv = dyadlab::report_csv(r.rows);
    const std::string summary = dyadlab::report_summary(s, r);
    if (out_dir.empty()) {
      std::cout << csv;
      std::cerr << summary;
    } else {
      std::filesystem::create_directories(out_dir);
      write_file(std::filesystem::path(out_dir) / (s.name + ".csv"), csv);
      write_file(std::filesystem::path(out_dir) / (s.name + ".summary.txt"), summary);
      std::cout << summary;
    }
    return r.passed ? 0 : kExitFail;
  } catch (const dyadlab::DyadError& e) {
    std::cerr << "error: " << e.what() << "\n";
    using dyadlab::ErrorKind;
    return e.kind() == ErrorKind::ConfigError || e.kind() == ErrorKind::UnknownScenario || e.kind() == ErrorKind::ParseError
               ? kExitConfig
               : kExitFail;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFail;
  }
}
