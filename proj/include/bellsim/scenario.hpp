#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "bellsim/config.hpp"
#include "bellsim/core.hpp"

namespace bellsim {

enum class Regime : std::uint8_t { GeometricMean, ArithmeticMean, Other };

std::string_view to_string(Regime r);

/// Tolerance for the mean-law tests on closed-form rows.
inline constexpr double kRegimeTolerance = 1e-9;
/// Width, in propagated standard errors, of the mean-law tests on Monte Carlo rows.
inline constexpr double kRegimeSigma = 4.0;

struct ReportRow {
  std::size_t index = 0;
  std::vector<double> sweep_values;
  /// Absent for the vessels scenario, which is not a single-entity experiment.
  std::optional<NonDetectionTriple> triple;
  /// Standard errors of p, p', p'' (Monte Carlo only).
  std::optional<std::array<double, 3>> std_errors;
  double chsh = 0.0;
  Verdict violation = Verdict::NoViolation;
  double marginal_aggregate = 0.0;
  Regime regime = Regime::Other;
  bool regime_consistent = true;
  /// Semiclassical only: raw triple inside [0,1].
  std::optional<bool> physical;
  /// Semicolon-separated key=value pairs.
  std::string diagnostics;
  std::optional<SettingTable> distributions;
};

struct RegimeCheck {
  Regime regime = Regime::Other;
  bool consistent = true;
  std::string detail;
};

/// Tags a row by testing p'^2 = p p'' and 2p' = p + p'' (within 1e-9, or within kRegimeSigma
/// propagated errors when the row carries error bars). When both hold the row is
/// ArithmeticMean. Cross-checks: a GeometricMean row with p > p'' and 2p' < p - p'' must show
/// |CHSH| > 2; an ArithmeticMean row must show |CHSH| <= 2 and a zero marginal aggregate.
RegimeCheck classify_regime(const ReportRow& row);

struct Calibration {
  double lambda = 0.0;
  double achieved = 0.0;
  /// Highest detection met during the scan; the scan runs to the turnover only when the
  /// target is out of reach.
  double peak_lambda = 0.0;
  double peak_detection = 0.0;
};

/// Finds lambda on the rising (weak-coupling) branch whose single-pass detection equals
/// `target` to 1e-9. Throws ConfigError if the target exceeds the peak detection.
Calibration calibrate_lambda(double target, const PacketSpec& packet, const GridConfig& grid);

struct RunOptions {
  unsigned threads = 1;
  std::optional<std::uint64_t> seed_override;
};

/// Validates completely, then computes one row per sweep point in declared order
/// (first axis outermost). Throws ConfigError before any computation on a bad config.
std::vector<ReportRow> run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

/// Single-row evaluation of one fully specified point (no sweep applied).
ReportRow evaluate_point(const ScenarioConfig& point, std::size_t index, unsigned threads);

/// Per-point Monte Carlo seed derived from the master seed and the point index.
std::uint64_t point_seed(std::uint64_t master_seed, std::size_t index);

/// Thread count from BELLSIM_THREADS, else hardware concurrency (at least 1).
unsigned default_threads();

}  // namespace bellsim
