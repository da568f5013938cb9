#pragma once

// Scenario files: one JSON document with an explicit schema_version. Unknown keys, and
// blocks the selected engine does not use, are errors.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bellsim/classical_analytic.hpp"
#include "bellsim/quantum_numeric.hpp"
#include "bellsim/quantum_semiclassical.hpp"

namespace bellsim {

inline constexpr int kSchemaVersion = 1;

enum class Engine : std::uint8_t { ClassicalAnalytic, ClassicalMc, QuantumSemiclassical, QuantumNumeric, Vessels };

std::string_view to_string(Engine e);

struct ClassicalParams {
  double reflectivity_standard = 0.0;   // "R"
  double reflectivity_efficient = 0.0;  // "R_prime"
};

struct TimingParams {
  double distance = 1.0;
  double speed = 1.0;
  int bounce_count = 1;
  WindowMode window = WindowMode::Long;
  double short_length = 0.5;  ///< in units of d/v, Short mode only
  double start = 1.0;         ///< in units of d/(2v), Custom mode only
  double end = 3.0;

  TimingConfig to_timing() const;
};

struct McParams {
  std::uint64_t trials = 100000;
  std::uint64_t seed = 1;
};

struct SemiclassicalParams {
  double standard_modulus = 0.0;
  double standard_phase = 0.0;
  double efficient_modulus = 0.0;
  double efficient_phase = 0.0;
  Emission emission = Emission::Mixture;
};

struct NumericParams {
  std::optional<double> lambda_standard;
  std::optional<double> lambda_efficient;
  /// Single-pass detection targets; when set, lambdas are found by calibration.
  std::optional<double> detection_standard;
  std::optional<double> detection_efficient;
  int bounce_count = 2;
  GridConfig grid;
  PacketSpec packet;
};

struct SweepAxis {
  std::string parameter;
  double min = 0.0;
  double max = 0.0;
  std::size_t points = 1;

  double value(std::size_t i) const;
};

struct ScenarioConfig {
  int schema_version = kSchemaVersion;
  Engine engine = Engine::Vessels;
  std::optional<ClassicalParams> classical;
  std::optional<TimingParams> timing;
  std::optional<McParams> mc;
  std::optional<SemiclassicalParams> semiclassical;
  std::optional<NumericParams> numeric;
  std::vector<SweepAxis> sweep;
};

/// Parses and validates. Throws ConfigError naming the offending field.
ScenarioConfig parse_config(std::string_view json_text);
ScenarioConfig load_config(const std::string& path);

/// Full validation, including every sweep point. Throws ConfigError.
void validate(const ScenarioConfig& config);

/// Parameter names a sweep axis may reference for this engine.
std::vector<std::string> sweepable_parameters(Engine engine);

/// Returns a copy with `parameter` set to `value`. Throws ConfigError for unknown names.
ScenarioConfig with_parameter(const ScenarioConfig& config, const std::string& parameter, double value);

}  // namespace bellsim
