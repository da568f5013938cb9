#pragma once

// Event-driven simulation of one classical particle per trial. Serves as the brute-force
// check on the closed forms in classical_analytic.hpp.

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "bellsim/classical_analytic.hpp"
#include "bellsim/core.hpp"
#include "bellsim/rng.hpp"

namespace bellsim {

enum class Direction : std::uint8_t { TowardAlice, TowardBob };
enum class ScreenSide : std::uint8_t { Alice, Bob };
enum class Interaction : std::uint8_t { Detected, Reflected };
enum class TrialOutcome : std::uint8_t { AliceDetected, BobDetected, NeitherDetected };

struct InteractionEvent {
  std::int64_t half_flights = 0;  ///< contact time in units of d/(2v); always odd
  double time = 0.0;
  ScreenSide side = ScreenSide::Alice;
  Interaction kind = Interaction::Reflected;
  bool in_window = true;
};

struct TrialRecord {
  Direction emission_direction = Direction::TowardAlice;
  std::vector<InteractionEvent> interaction_log;
  TrialOutcome outcome = TrialOutcome::NeitherDetected;
  std::optional<double> outcome_time;
};

struct McEstimate {
  OutcomeDistribution distribution;
  std::uint64_t trial_count = 0;
  /// Hits per cell in p11, p12, p21, p22 order.
  std::array<std::uint64_t, 4> counts{};
  /// sqrt(p(1-p)/N) per cell.
  std::array<double, 4> std_errors{};
};

struct McTriple {
  NonDetectionTriple triple;
  /// Standard errors of p, p', p''.
  std::array<double, 3> std_errors{};
  /// Per-setting estimates, indexed by Setting.
  std::array<McEstimate, 4> settings{};
  /// A'B and AB' non-detection rates agree within kSymmetrySigma joint standard errors.
  bool symmetry_ok = true;
  double symmetry_z = 0.0;
};

/// One emission: direction drawn 1/2-1/2, then alternating Bernoulli contacts until the
/// particle is absorbed or the next contact would fall after t2. An absorption before t1
/// leaves no trace inside the window and counts as NeitherDetected.
TrialRecord simulate_trial(const ClassicalScreen& alice, const ClassicalScreen& bob,
                           const TimingConfig& timing, SplitMix64& rng);

/// Frequencies over `trials` trials. Trial i of stream `setting` draws from
/// substream_seed(master_seed, index_of(setting), i), so the result does not depend on `threads`.
McEstimate estimate_distribution(const ClassicalScreen& alice, const ClassicalScreen& bob,
                                 const TimingConfig& timing, std::uint64_t trials, std::uint64_t master_seed,
                                 Setting setting = Setting::AB, unsigned threads = 1);

McTriple estimate_triple(const ClassicalScreen& standard, const ClassicalScreen& efficient,
                         const TimingConfig& timing, std::uint64_t trials_per_setting,
                         std::uint64_t master_seed, unsigned threads = 1);

}  // namespace bellsim
