#pragma once

// Amplitude-level double-screen model over an observation window of 3d/v: the packet
// heading toward a screen accumulates the direct detection amplitude plus one
// reflect-reflect-detect path, and these interfere.

#include <complex>
#include <optional>
#include <vector>

#include "bellsim/core.hpp"

namespace bellsim {

using Complex = std::complex<double>;

/// Complex reflection amplitude r and detection amplitude d with |r|^2 + |d|^2 = 1.
class AmplitudeScreen {
 public:
  /// Throws ConfigError if |r|^2 + |d|^2 misses 1 by more than 1e-12.
  AmplitudeScreen(Complex reflection, Complex detection);

  /// d = sqrt(1 - |r|^2), real and non-negative.
  static AmplitudeScreen from_reflection(Complex reflection);
  static AmplitudeScreen from_polar(double modulus, double phase);

  Complex reflection() const { return r_; }
  Complex detection() const { return d_; }

 private:
  Complex r_;
  Complex d_;
};

struct JointDetection {
  double alice = 0.0;
  double bob = 0.0;
  double neither = 0.0;
};

/// Mixture: the source sends the particle left or right with probability 1/2.
/// Superposition: one packet (|left> + |right>)/sqrt(2); the two halves reach each screen
/// at different times and are summed incoherently.
enum class Emission : std::uint8_t { Mixture, Superposition };

JointDetection joint_detection_probs(const AmplitudeScreen& alice, const AmplitudeScreen& bob,
                                     Emission emission = Emission::Mixture);

struct SemiclassicalResult {
  /// Raw values; the truncated path sum can leave [0,1].
  double p = 0.0;
  double p_prime = 0.0;
  double p_double_prime = 0.0;
  bool physical = true;
  /// Raw values clamped to [0,1]; only for downstream CHSH analysis, marked by `physical`.
  NonDetectionTriple clamped_triple;
  double phase_standard = 0.0;
  double phase_efficient = 0.0;
};

SemiclassicalResult triple_semiclassical(const AmplitudeScreen& standard, const AmplitudeScreen& efficient,
                                         Emission emission = Emission::Mixture);

struct PhaseGrid {
  std::vector<double> standard_phases;
  std::vector<double> efficient_phases;
};

/// Evenly spaced phases on [0, 2pi).
std::vector<double> uniform_phases(std::size_t count);

/// Row-major over (standard phase, efficient phase). Throws ConfigError on an empty grid
/// or a modulus outside [0,1].
std::vector<SemiclassicalResult> phase_sweep(double standard_modulus, double efficient_modulus,
                                             const PhaseGrid& grid);

/// Non-detection probability of the standard-standard setting for r = modulus * e^{i phase}.
double same_screen_non_detection(double modulus, double phase);

/// Bisects for the modulus in (lo, hi) where same_screen_non_detection changes sign at
/// fixed phase. Returns nullopt if the endpoints do not bracket a sign change.
std::optional<double> locate_physical_boundary(double phase, double lo = 1e-6, double hi = 1.0,
                                               double tolerance = 1e-14);

}  // namespace bellsim
