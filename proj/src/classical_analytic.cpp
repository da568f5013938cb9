#include "bellsim/classical_analytic.hpp"

#include <cmath>
#include <string>

#include "bellsim/errors.hpp"

namespace bellsim {

namespace {

void require_reflectivity(double r, const char* field) {
  if (!(r >= 0.0 && r <= 1.0)) {
    throw ConfigError("reflectivity " + std::to_string(r) + " outside [0,1]", field);
  }
}

void require_bounces(int n) {
  if (n < 1) throw ConfigError("bounce count must be >= 1, got " + std::to_string(n), "n");
}

}  // namespace

ClassicalScreen::ClassicalScreen(double reflectivity) : reflectivity_(reflectivity) {
  require_reflectivity(reflectivity, "reflectivity");
}

TimingConfig TimingConfig::long_window(double distance, double speed, int bounce_count) {
  require_bounces(bounce_count);
  TimingConfig t;
  t.distance = distance;
  t.speed = speed;
  t.bounce_count = bounce_count;
  t.mode = WindowMode::Long;
  t.window_start = {1, 1};
  t.window_end = {4 * static_cast<std::int64_t>(bounce_count) - 1, 1};
  t.validate();
  return t;
}

TimingConfig TimingConfig::short_window(double distance, double speed, Rational length_in_flights) {
  if (length_in_flights.den <= 0 || length_in_flights.num < 0 ||
      length_in_flights.num >= length_in_flights.den) {
    throw ConfigError("short window length must satisfy 0 <= length < d/v", "timing.short_length");
  }
  TimingConfig t;
  t.distance = distance;
  t.speed = speed;
  t.bounce_count = 1;
  t.mode = WindowMode::Short;
  t.window_start = {1, 1};
  t.window_end = {length_in_flights.den + 2 * length_in_flights.num, length_in_flights.den};
  t.validate();
  return t;
}

TimingConfig TimingConfig::custom(double distance, double speed, Rational start, Rational end) {
  TimingConfig t;
  t.distance = distance;
  t.speed = speed;
  t.mode = WindowMode::Custom;
  t.window_start = start;
  t.window_end = end;
  t.bounce_count = 1;
  t.validate();
  return t;
}

bool TimingConfig::contains(std::int64_t m) const {
  return m * window_start.den >= window_start.num && not_after_end(m);
}

bool TimingConfig::not_after_end(std::int64_t m) const { return m * window_end.den <= window_end.num; }

void TimingConfig::validate() const {
  if (!(distance > 0.0) || !std::isfinite(distance)) throw ConfigError("distance must be > 0", "timing.distance");
  if (!(speed > 0.0) || !std::isfinite(speed)) throw ConfigError("speed must be > 0", "timing.speed");
  require_bounces(bounce_count);
  if (window_start.den <= 0 || window_end.den <= 0) {
    throw ConfigError("window endpoints need positive denominators", "timing.window");
  }
  if (window_start.num < 0) throw ConfigError("window cannot start before emission", "timing.window");
  // end >= start, compared exactly
  if (window_end.num * window_start.den < window_start.num * window_end.den) {
    throw ConfigError("window ends before it starts", "timing.window");
  }
  if (mode == WindowMode::Long && (window_start.num != window_start.den ||
                                   window_end.num != (4 * bounce_count - 1) * window_end.den)) {
    throw ConfigError("long window must span [d/2v, d/2v + (2n-1)d/v]", "timing.window");
  }
  if (mode == WindowMode::Short &&
      (window_start.num != window_start.den || window_end.num >= 3 * window_end.den)) {
    throw ConfigError("short window must start at d/2v and last less than d/v", "timing.window");
  }
}

double geometric_prefactor(double x, int n) {
  require_bounces(n);
  if (x == 1.0) return static_cast<double>(n);
  if (x == 0.0) return 1.0;
  const double u = 1.0 - x;
  if (u < 0.5) return -std::expm1(static_cast<double>(n) * std::log1p(-u)) / u;
  return (1.0 - std::pow(x, n)) / u;
}

OutcomeDistribution joint_probs_long(const ClassicalScreen& alice, const ClassicalScreen& bob, int n,
                                     Setting setting) {
  const double ra = alice.reflectivity();
  const double rb = bob.reflectivity();
  const double x = ra * rb;
  const double g = geometric_prefactor(x, n);
  const double alice_detects = 0.5 * g * (1.0 + rb) * alice.detection();
  const double bob_detects = 0.5 * g * (1.0 + ra) * bob.detection();
  return OutcomeDistribution::single_entity(setting, alice_detects, bob_detects, std::pow(x, n));
}

OutcomeDistribution joint_probs_short(const ClassicalScreen& alice, const ClassicalScreen& bob,
                                      Setting setting) {
  return OutcomeDistribution::single_entity(setting, 0.5 * alice.detection(), 0.5 * bob.detection(),
                                            0.5 * (alice.reflectivity() + bob.reflectivity()));
}

namespace {

template <typename F>
SettingTable table_for(double r_std, double r_eff, F&& joint) {
  const ClassicalScreen standard(r_std);
  const ClassicalScreen efficient(r_eff);
  SettingTable t{};
  t[index_of(Setting::AB)] = joint(standard, standard, Setting::AB);
  t[index_of(Setting::APrimeB)] = joint(efficient, standard, Setting::APrimeB);
  t[index_of(Setting::ABPrime)] = joint(standard, efficient, Setting::ABPrime);
  t[index_of(Setting::APrimeBPrime)] = joint(efficient, efficient, Setting::APrimeBPrime);
  return t;
}

}  // namespace

SettingTable setting_table_long(double reflectivity_standard, double reflectivity_efficient, int n) {
  require_bounces(n);
  return table_for(reflectivity_standard, reflectivity_efficient,
                   [n](const ClassicalScreen& a, const ClassicalScreen& b, Setting s) {
                     return joint_probs_long(a, b, n, s);
                   });
}

SettingTable setting_table_short(double reflectivity_standard, double reflectivity_efficient) {
  return table_for(reflectivity_standard, reflectivity_efficient,
                   [](const ClassicalScreen& a, const ClassicalScreen& b, Setting s) {
                     return joint_probs_short(a, b, s);
                   });
}

NonDetectionTriple triple_long(double reflectivity_standard, double reflectivity_efficient, int n) {
  require_reflectivity(reflectivity_standard, "R");
  require_reflectivity(reflectivity_efficient, "R_prime");
  require_bounces(n);
  const double r = reflectivity_standard;
  const double rp = reflectivity_efficient;
  return NonDetectionTriple{std::pow(r, 2 * n), std::pow(rp * r, n), std::pow(rp, 2 * n)};
}

NonDetectionTriple triple_short(double reflectivity_standard, double reflectivity_efficient) {
  require_reflectivity(reflectivity_standard, "R");
  require_reflectivity(reflectivity_efficient, "R_prime");
  return NonDetectionTriple{reflectivity_standard, 0.5 * (reflectivity_standard + reflectivity_efficient),
                            reflectivity_efficient};
}

}  // namespace bellsim
