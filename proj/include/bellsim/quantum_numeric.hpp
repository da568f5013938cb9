#pragma once

// One-dimensional time-dependent Schrodinger propagation (hbar = m = 1) between hard walls,
// with the two screens modeled as absorbing slabs:
//
//   H(lambda_a, lambda_b) = -1/2 d^2/dx^2 - i lambda_a P_alice - i lambda_b P_bob
//
// Alice's screen sits at -d/2, Bob's at +d/2. The surviving norm is the probability that
// neither screen has absorbed the particle; absorbed norm is attributed to a screen by
// splitting the flux identity dN/dt = -2 <psi|(lambda_a P_alice + lambda_b P_bob)|psi>.

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <vector>

#include "bellsim/classical_analytic.hpp"
#include "bellsim/core.hpp"

namespace bellsim {

using Complex = std::complex<double>;
using WaveFunction = std::vector<Complex>;

struct GridConfig {
  double half_length = 30.5;  ///< hard walls at +-half_length
  std::size_t points = 4096;  ///< including the two wall nodes
  double dt = 0.005;
  double screen_center = 30.0;  ///< screens centered at +-screen_center
  double screen_width = 0.0;    ///< slab width; 0 selects 4 dx

  double dx() const { return 2.0 * half_length / static_cast<double>(points - 1); }
  double x(std::size_t j) const { return -half_length + static_cast<double>(j) * dx(); }
  double width() const { return screen_width > 0.0 ? screen_width : 4.0 * dx(); }
  double screen_distance() const { return 2.0 * screen_center; }

  /// Halves dx and dt; the slab width stays fixed in physical units.
  GridConfig refined() const;

  /// Throws ConfigError if the slabs overlap, touch the walls, or the grid is degenerate.
  void validate() const;
};

enum class PacketKind : std::uint8_t { TowardAlice, TowardBob, Superposition, Mixture };

/// Gaussian packet exp(-(x-x0)^2 / (4 sigma^2)) e^{ikx}; |psi|^2 has standard deviation sigma.
struct PacketSpec {
  double center = 0.0;
  double width = 4.0;      ///< sigma
  double wavenumber = 4.0;  ///< |k0|; the group speed is |k0|
  PacketKind kind = PacketKind::Mixture;

  double speed() const { return wavenumber; }
};

/// Resolution and initial-overlap checks: dx <= sigma/8, dx <= 1/(8k0), initial weight in
/// either slab < 1e-8. Throws ConfigError.
void validate_resolution(const GridConfig& grid, const PacketSpec& packet);

/// Normalized initial state. Mixture has no single wavefunction and is rejected.
WaveFunction make_packet(const PacketSpec& packet, const GridConfig& grid, PacketKind kind);

/// Mirror image psi(x) -> psi(-x).
WaveFunction reflect(const WaveFunction& psi);

double norm(const WaveFunction& psi, const GridConfig& grid);
/// Kinetic energy expectation <psi|-1/2 d^2/dx^2|psi> (not normalized by the norm).
double kinetic_energy(const WaveFunction& psi, const GridConfig& grid);

struct ScreenRates {
  double alice = 0.0;
  double bob = 0.0;
};

/// Slab weight per node: overlap of the cell [x - dx/2, x + dx/2] with the slab, over dx.
std::vector<double> slab_weights(const GridConfig& grid, double center);

struct StepFlux {
  double alice = 0.0;
  double bob = 0.0;
};

/// Crank-Nicolson propagator. The tridiagonal factorization is computed once.
class Propagator {
 public:
  Propagator(const GridConfig& grid, ScreenRates rates, double dt);
  Propagator(const GridConfig& grid, ScreenRates rates) : Propagator(grid, rates, grid.dt) {}

  /// Advances psi by one step in place; returns norm absorbed by each slab over the step,
  /// 2 dt sum lambda w |(psi_old + psi_new)/2|^2 dx, which equals the norm drop exactly
  /// up to rounding. Throws NumericalFault if the norm grows by more than 1e-9.
  StepFlux step(WaveFunction& psi);

  double dt() const { return dt_; }
  const GridConfig& grid() const { return grid_; }

 private:
  GridConfig grid_;
  ScreenRates rates_;
  double dt_;
  std::vector<double> w_alice_;
  std::vector<double> w_bob_;
  std::vector<double> gamma_;
  std::vector<Complex> inv_denom_;
  std::vector<Complex> c_prime_;
  std::vector<Complex> b_diag_;
  Complex off_a_;
  Complex off_b_;
  WaveFunction old_;
  WaveFunction scratch_;
};

/// One step with a freshly built propagator.
WaveFunction evolve_step(const WaveFunction& psi, const GridConfig& grid, ScreenRates rates);

struct AbsorptionLedger {
  std::vector<double> time;
  std::vector<double> surviving_norm;
  std::vector<double> absorbed_alice;
  std::vector<double> absorbed_bob;
  double t1 = 0.0;
  double t2 = 0.0;

  /// max over steps of |norm + absorbed_alice + absorbed_bob - 1|.
  double max_conservation_error() const;
  /// Columns: t, surviving_norm, absorbed_alice, absorbed_bob.
  void write_csv(std::ostream& out) const;
};

struct JointMeasurement {
  double alice = 0.0;    ///< absorbed by Alice's slab over [t0, t2]
  double bob = 0.0;      ///< absorbed by Bob's slab over [t0, t2]
  double neither = 1.0;  ///< surviving norm at t2
  double pre_window_alice = 0.0;  ///< part of `alice` absorbed before t1
  double pre_window_bob = 0.0;
  double energy_drift = 0.0;  ///< relative change of kinetic energy; meaningful at zero rates
  AbsorptionLedger ledger;
};

/// Long-window timing for this geometry: d = 2 screen_center, v = |k0|.
TimingConfig numeric_timing(const GridConfig& grid, const PacketSpec& packet, int bounce_count);

/// Evolves from t0 = 0 to t2 with steps of t2/ceil(t2/dt). For PacketKind::Mixture the two
/// directed packets are run and averaged. Throws NumericalFault if the ledger drifts by more
/// than 1e-5.
JointMeasurement run_joint_measurement(ScreenRates rates, const PacketSpec& packet, const GridConfig& grid,
                                       const TimingConfig& timing);

struct NumericTriple {
  NonDetectionTriple triple;
  SettingTable table{};
  double p_prime_aprime_b = 0.0;
  double p_prime_a_bprime = 0.0;
  double geometric_ratio = 0.0;  ///< p'^2 / (p p''); NaN when p p'' = 0
  double max_pre_window = 0.0;
  double max_conservation_error = 0.0;
};

/// Runs AB, A'B, AB', A'B' with lambda_standard for A, B and lambda_efficient for A', B'.
/// p' is the mean of the A'B and AB' values.
NumericTriple run_all_settings(double lambda_standard, double lambda_efficient, const PacketSpec& packet,
                               const GridConfig& grid, const TimingConfig& timing, unsigned threads = 1);

/// Fraction a single slab (Alice's) absorbs from a packet sent toward it, integrated until the
/// reflected part is back at the source (t = d/v).
double single_pass_detection(double lambda, const PacketSpec& packet, const GridConfig& grid);

struct ConvergenceLevel {
  std::size_t points = 0;
  double dx = 0.0;
  double dt = 0.0;
  double p_neither = 0.0;
};

struct ConvergenceReport {
  std::vector<ConvergenceLevel> levels;
  std::vector<double> differences;  ///< |p_k - p_{k+1}|
  double richardson_error = 0.0;    ///< error estimate of the finest level, second-order extrapolation
  double observed_order = 0.0;      ///< log2 of the last difference ratio; 0 with fewer than 3 levels
  bool converged = true;            ///< successive differences shrink
};

/// Each level halves dx and dt. Throws ConfigError with fewer than two levels.
ConvergenceReport convergence_study(ScreenRates rates, const PacketSpec& packet, const GridConfig& base,
                                    const TimingConfig& timing, int levels);

}  // namespace bellsim
