// bellsim: run, validate and report CHSH scenarios from JSON configs.
//
// Exit status: 0 success, 2 configuration or usage error, 3 numerical fault.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "bellsim/config.hpp"
#include "bellsim/errors.hpp"
#include "bellsim/quantum_numeric.hpp"
#include "bellsim/report.hpp"
#include "bellsim/scenario.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

bellsim::Setting parse_setting(const std::string& s) {
  for (auto setting : bellsim::kAllSettings) {
    if (bellsim::to_string(setting) == s) return setting;
  }
  throw bellsim::ConfigError("unknown setting '" + s + "' (AB, A'B, AB', A'B')", "--setting");
}

std::ostream& open_or_stdout(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw bellsim::ConfigError("cannot open output file " + path, "--out");
  return file;
}

int dump_ledger(const bellsim::ScenarioConfig& config, const std::string& setting_name, const std::string& path) {
  using namespace bellsim;
  if (config.engine != Engine::QuantumNumeric) throw ConfigError("ledger needs engine quantum-numeric", "engine");
  const auto& n = *config.numeric;
  double lam_std = 0.0;
  double lam_eff = 0.0;
  if (n.lambda_standard) {
    lam_std = *n.lambda_standard;
    lam_eff = *n.lambda_efficient;
  } else {
    lam_std = calibrate_lambda(*n.detection_standard, n.packet, n.grid).lambda;
    lam_eff = calibrate_lambda(*n.detection_efficient, n.packet, n.grid).lambda;
  }
  const Setting s = parse_setting(setting_name);
  const bool alice_eff = s == Setting::APrimeB || s == Setting::APrimeBPrime;
  const bool bob_eff = s == Setting::ABPrime || s == Setting::APrimeBPrime;
  const ScreenRates rates{alice_eff ? lam_eff : lam_std, bob_eff ? lam_eff : lam_std};
  const JointMeasurement m =
      run_joint_measurement(rates, n.packet, n.grid, numeric_timing(n.grid, n.packet, n.bounce_count));
  std::ofstream file;
  m.ledger.write_csv(open_or_stdout(path, file));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-entity CHSH simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string json_path;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;

  auto* run = app.add_subcommand("run", "Run a scenario and write the CSV report");
  run->add_option("-c,--config", config_path, "Scenario JSON file")->required();
  run->add_option("-o,--out", out_path, "CSV output path (default stdout)");
  run->add_option("--json", json_path, "Also write a JSON mirror of the report");
  run->add_option("--seed", seed, "Override the Monte Carlo master seed");
  run->add_option("-t,--threads", threads, "Worker threads (default BELLSIM_THREADS or hardware)");

  std::string validate_path;
  auto* val = app.add_subcommand("validate", "Check a scenario file without running it");
  val->add_option("-c,--config", validate_path, "Scenario JSON file")->required();

  auto* vessels = app.add_subcommand("vessels", "Print the connected-vessels report");

  std::string ledger_config;
  std::string ledger_setting = "AB";
  std::string ledger_out;
  auto* ledger = app.add_subcommand("ledger", "Write the absorption ledger of one numeric setting");
  ledger->add_option("-c,--config", ledger_config, "Scenario JSON file (quantum-numeric)")->required();
  ledger->add_option("-s,--setting", ledger_setting, "AB, A'B, AB' or A'B'");
  ledger->add_option("-o,--out", ledger_out, "CSV output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) {
      const bellsim::ScenarioConfig config = bellsim::load_config(config_path);
      bellsim::RunOptions options;
      options.threads = threads > 0 ? threads : bellsim::default_threads();
      options.seed_override = seed;
      if (seed && !config.mc) throw bellsim::ConfigError("--seed needs a Monte Carlo scenario", "--seed");
      const auto rows = bellsim::run_scenario(config, options);
      std::ofstream file;
      bellsim::write_csv(open_or_stdout(out_path, file), config, rows);
      if (!json_path.empty()) {
        std::ofstream js(json_path);
        if (!js) throw bellsim::ConfigError("cannot open output file " + json_path, "--json");
        bellsim::write_json(js, config, rows);
      }
      for (const auto& row : rows) {
        if (!row.regime_consistent) std::cerr << "warning: row " << row.index << ": " << row.diagnostics << '\n';
      }
    } else if (*val) {
      const bellsim::ScenarioConfig config = bellsim::load_config(validate_path);
      std::size_t points = 1;
      for (const auto& a : config.sweep) points *= a.points;
      std::cout << "ok: engine " << bellsim::to_string(config.engine) << ", " << points << " point"
                << (points == 1 ? "" : "s") << '\n';
    } else if (*vessels) {
      bellsim::write_vessels_report(std::cout);
    } else if (*ledger) {
      return dump_ledger(bellsim::load_config(ledger_config), ledger_setting, ledger_out);
    }
  } catch (const bellsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const bellsim::NumericalFault& e) {
    std::cerr << "numerical fault: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const bellsim::InvalidDistribution& e) {
    std::cerr << "invalid distribution: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
