#pragma once

// Closed-form detection statistics for a classical particle bouncing between two
// partially absorbing screens.

#include <cstdint>

#include "bellsim/core.hpp"

namespace bellsim {

/// Memoryless screen: each contact absorbs with probability 1 - reflectivity.
class ClassicalScreen {
 public:
  /// Throws ConfigError unless reflectivity is in [0,1].
  explicit ClassicalScreen(double reflectivity);

  double reflectivity() const { return reflectivity_; }
  double detection() const { return 1.0 - reflectivity_; }

 private:
  double reflectivity_;
};

enum class WindowMode : std::uint8_t { Long, Short, Custom };

/// Exact rational number with positive denominator; used for window endpoints.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Source at the midpoint of two screens a distance d apart; particle speed v.
///
/// Window endpoints are kept in units of the half flight time d/(2v), where the k-th
/// screen contact happens at the odd multiple 2k-1. Both endpoints are inclusive.
struct TimingConfig {
  double distance = 1.0;
  double speed = 1.0;
  int bounce_count = 1;
  WindowMode mode = WindowMode::Long;
  Rational window_start{1, 1};
  Rational window_end{3, 1};

  /// t1 = d/2v, t2 = t1 + (2n-1) d/v: each screen gets n contacts.
  static TimingConfig long_window(double distance, double speed, int bounce_count);
  /// t1 = d/2v, t2 = t1 + length * d/v with 0 <= length < 1.
  static TimingConfig short_window(double distance, double speed, Rational length_in_flights);
  /// Arbitrary [start, end] in half-flight units.
  static TimingConfig custom(double distance, double speed, Rational start, Rational end);

  double half_flight() const { return distance / (2.0 * speed); }
  double flight() const { return distance / speed; }
  double t1() const { return window_start.value() * half_flight(); }
  double t2() const { return window_end.value() * half_flight(); }
  double window_length() const { return t2() - t1(); }

  /// Whether the contact at half-flight multiple `m` lies in [t1, t2].
  bool contains(std::int64_t m) const;
  /// Whether the contact at `m` is no later than t2.
  bool not_after_end(std::int64_t m) const;

  /// Throws ConfigError on non-positive d or v, n < 1, or an inconsistent window.
  void validate() const;
};

/// (1 - x^n)/(1 - x), equal to n at x = 1; accurate near the removable singularity.
double geometric_prefactor(double x, int n);

/// Long-window table for Alice's and Bob's screens, labeled `setting`.
OutcomeDistribution joint_probs_long(const ClassicalScreen& alice, const ClassicalScreen& bob, int n,
                                     Setting setting = Setting::AB);

/// Short-window table: each screen sees at most one contact.
OutcomeDistribution joint_probs_short(const ClassicalScreen& alice, const ClassicalScreen& bob,
                                      Setting setting = Setting::AB);

/// All four settings; `standard` is used for A and B, `efficient` for A' and B'.
SettingTable setting_table_long(double reflectivity_standard, double reflectivity_efficient, int n);
SettingTable setting_table_short(double reflectivity_standard, double reflectivity_efficient);

/// p = R^2n, p' = (R'R)^n, p'' = R'^2n.
NonDetectionTriple triple_long(double reflectivity_standard, double reflectivity_efficient, int n);

/// p = R, p' = (R + R')/2, p'' = R'.
NonDetectionTriple triple_short(double reflectivity_standard, double reflectivity_efficient);

}  // namespace bellsim
