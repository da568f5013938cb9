#include "bellsim/quantum_semiclassical.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "bellsim/errors.hpp"

namespace bellsim {

AmplitudeScreen::AmplitudeScreen(Complex reflection, Complex detection) : r_(reflection), d_(detection) {
  const double total = std::norm(r_) + std::norm(d_);
  if (!(std::abs(total - 1.0) <= 1e-12)) {
    throw ConfigError("|r|^2 + |d|^2 = " + std::to_string(total) + ", expected 1", "screen");
  }
}

AmplitudeScreen AmplitudeScreen::from_reflection(Complex reflection) {
  const double r2 = std::norm(reflection);
  if (!(r2 <= 1.0 + 1e-12)) throw ConfigError("|r| exceeds 1", "screen.modulus");
  return AmplitudeScreen(reflection, Complex(std::sqrt(std::max(0.0, 1.0 - r2)), 0.0));
}

AmplitudeScreen AmplitudeScreen::from_polar(double modulus, double phase) {
  if (!(modulus >= 0.0 && modulus <= 1.0)) throw ConfigError("modulus outside [0,1]", "screen.modulus");
  return from_reflection(std::polar(modulus, phase));
}

namespace {

JointDetection mixture(const AmplitudeScreen& alice, const AmplitudeScreen& bob) {
  const Complex ra = alice.reflection();
  const Complex rb = bob.reflection();
  const double loop = std::norm(1.0 + ra * rb);
  JointDetection j;
  j.alice = 0.5 * std::norm(alice.detection()) * (loop + std::norm(rb));
  j.bob = 0.5 * std::norm(bob.detection()) * (loop + std::norm(ra));
  j.neither = 1.0 - j.alice - j.bob;
  return j;
}

// Each half of the packet carries amplitude 1/sqrt(2). Paths within a half interfere;
// the halves do not, since they reach a given screen at different times.
JointDetection superposition(const AmplitudeScreen& alice, const AmplitudeScreen& bob) {
  const Complex w(std::numbers::sqrt2 / 2.0, 0.0);
  const Complex ra = alice.reflection();
  const Complex rb = bob.reflection();
  const Complex da = alice.detection();
  const Complex db = bob.detection();

  // Half moving toward Alice: contacts Alice, Bob, Alice.
  const Complex left_at_alice = w * (da + ra * rb * da);
  const Complex left_at_bob = w * ra * db;
  // Half moving toward Bob: contacts Bob, Alice, Bob.
  const Complex right_at_bob = w * (db + rb * ra * db);
  const Complex right_at_alice = w * rb * da;

  JointDetection j;
  j.alice = std::norm(left_at_alice) + std::norm(right_at_alice);
  j.bob = std::norm(right_at_bob) + std::norm(left_at_bob);
  j.neither = 1.0 - j.alice - j.bob;
  return j;
}

bool within_unit(double x) { return x >= -1e-12 && x <= 1.0 + 1e-12; }

}  // namespace

JointDetection joint_detection_probs(const AmplitudeScreen& alice, const AmplitudeScreen& bob,
                                     Emission emission) {
  return emission == Emission::Mixture ? mixture(alice, bob) : superposition(alice, bob);
}

SemiclassicalResult triple_semiclassical(const AmplitudeScreen& standard, const AmplitudeScreen& efficient,
                                         Emission emission) {
  SemiclassicalResult res;
  res.p = joint_detection_probs(standard, standard, emission).neither;
  res.p_prime = joint_detection_probs(efficient, standard, emission).neither;
  res.p_double_prime = joint_detection_probs(efficient, efficient, emission).neither;
  res.physical = within_unit(res.p) && within_unit(res.p_prime) && within_unit(res.p_double_prime);
  const auto clamp = [](double x) { return std::clamp(x, 0.0, 1.0); };
  res.clamped_triple = NonDetectionTriple{clamp(res.p), clamp(res.p_prime), clamp(res.p_double_prime)};
  res.phase_standard = std::arg(standard.reflection());
  res.phase_efficient = std::arg(efficient.reflection());
  return res;
}

std::vector<double> uniform_phases(std::size_t count) {
  std::vector<double> phases(count);
  for (std::size_t i = 0; i < count; ++i) {
    phases[i] = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(count);
  }
  return phases;
}

std::vector<SemiclassicalResult> phase_sweep(double standard_modulus, double efficient_modulus,
                                             const PhaseGrid& grid) {
  if (grid.standard_phases.empty() || grid.efficient_phases.empty()) {
    throw ConfigError("phase grid is empty", "sweep.phases");
  }
  std::vector<SemiclassicalResult> out;
  out.reserve(grid.standard_phases.size() * grid.efficient_phases.size());
  for (double ps : grid.standard_phases) {
    const AmplitudeScreen standard = AmplitudeScreen::from_polar(standard_modulus, ps);
    for (double pe : grid.efficient_phases) {
      SemiclassicalResult r = triple_semiclassical(standard, AmplitudeScreen::from_polar(efficient_modulus, pe));
      r.phase_standard = ps;
      r.phase_efficient = pe;
      out.push_back(r);
    }
  }
  return out;
}

double same_screen_non_detection(double modulus, double phase) {
  const Complex r = std::polar(modulus, phase);
  const double r2 = modulus * modulus;
  return 1.0 - (1.0 - r2) * (std::norm(1.0 + r * r) + r2);
}

std::optional<double> locate_physical_boundary(double phase, double lo, double hi, double tolerance) {
  double f_lo = same_screen_non_detection(lo, phase);
  const double f_hi = same_screen_non_detection(hi, phase);
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if ((f_lo < 0.0) == (f_hi < 0.0)) return std::nullopt;
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = same_screen_non_detection(mid, phase);
    if (f_mid == 0.0) return mid;
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace bellsim
