#include "bellsim/quantum_numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>
#include <thread>

#include "bellsim/errors.hpp"

namespace bellsim {

GridConfig GridConfig::refined() const {
  GridConfig g = *this;
  g.screen_width = width();
  g.points = 2 * (points - 1) + 1;
  g.dt = 0.5 * dt;
  return g;
}

void GridConfig::validate() const {
  if (points < 8) throw ConfigError("grid needs at least 8 points", "grid.points");
  if (!(half_length > 0.0)) throw ConfigError("half length must be > 0", "grid.half_length");
  if (!(dt > 0.0)) throw ConfigError("time step must be > 0", "grid.dt");
  if (!(screen_center > 0.0)) throw ConfigError("screen center must be > 0", "grid.screen_center");
  if (screen_width < 0.0) throw ConfigError("screen width must be >= 0", "grid.screen_width");
  const double w = width();
  if (screen_center - 0.5 * w <= 0.0) throw ConfigError("screens overlap", "grid.screen_width");
  if (screen_center + 0.5 * w >= half_length - dx()) {
    throw ConfigError("screen slab reaches the wall", "grid.half_length");
  }
}

namespace {

Complex gaussian(double x, double x0, double sigma, double k) {
  const double s = (x - x0) / (2.0 * sigma);
  return std::exp(-s * s) * std::polar(1.0, k * x);
}

void normalize(WaveFunction& psi, const GridConfig& grid) {
  const double n = norm(psi, grid);
  if (!(n > 0.0)) throw ConfigError("packet has zero norm on the grid", "packet");
  const double scale = 1.0 / std::sqrt(n);
  for (auto& z : psi) z *= scale;
}

double slab_weight_of(const WaveFunction& psi, const std::vector<double>& w, double dx) {
  double s = 0.0;
  for (std::size_t j = 0; j < psi.size(); ++j) s += w[j] * std::norm(psi[j]);
  return s * dx;
}

}  // namespace

std::vector<double> slab_weights(const GridConfig& grid, double center) {
  const double dx = grid.dx();
  const double lo = center - 0.5 * grid.width();
  const double hi = center + 0.5 * grid.width();
  std::vector<double> w(grid.points, 0.0);
  for (std::size_t j = 1; j + 1 < grid.points; ++j) {
    const double x = grid.x(j);
    const double overlap = std::min(hi, x + 0.5 * dx) - std::max(lo, x - 0.5 * dx);
    if (overlap > 0.0) w[j] = std::min(1.0, overlap / dx);
  }
  return w;
}

void validate_resolution(const GridConfig& grid, const PacketSpec& packet) {
  grid.validate();
  if (!(packet.width > 0.0)) throw ConfigError("packet width must be > 0", "packet.width");
  if (!(packet.wavenumber > 0.0)) throw ConfigError("packet wavenumber must be > 0", "packet.wavenumber");
  const double dx = grid.dx();
  if (dx > packet.width / 8.0) throw ConfigError("dx exceeds sigma/8", "grid.points");
  if (dx > 1.0 / (8.0 * packet.wavenumber)) throw ConfigError("dx exceeds 1/(8 k0)", "grid.points");
  const auto wa = slab_weights(grid, -grid.screen_center);
  const auto wb = slab_weights(grid, grid.screen_center);
  for (PacketKind kind : {PacketKind::TowardAlice, PacketKind::TowardBob}) {
    const WaveFunction psi = make_packet(packet, grid, kind);
    const double inside = slab_weight_of(psi, wa, dx) + slab_weight_of(psi, wb, dx);
    if (!(inside < 1e-8)) {
      throw ConfigError("initial packet overlaps a screen (weight " + std::to_string(inside) + ")", "packet.center");
    }
  }
}

WaveFunction make_packet(const PacketSpec& packet, const GridConfig& grid, PacketKind kind) {
  WaveFunction psi(grid.points, Complex{});
  const double k = packet.wavenumber;
  for (std::size_t j = 1; j + 1 < grid.points; ++j) {
    const double x = grid.x(j);
    switch (kind) {
      case PacketKind::TowardAlice:
        psi[j] = gaussian(x, packet.center, packet.width, -k);
        break;
      case PacketKind::TowardBob:
        psi[j] = gaussian(x, packet.center, packet.width, k);
        break;
      case PacketKind::Superposition:
        psi[j] = (gaussian(x, packet.center, packet.width, -k) + gaussian(x, packet.center, packet.width, k)) *
                 (std::numbers::sqrt2 / 2.0);
        break;
      case PacketKind::Mixture:
        throw ConfigError("a mixture has no single wavefunction", "packet.kind");
    }
  }
  normalize(psi, grid);
  return psi;
}

WaveFunction reflect(const WaveFunction& psi) { return WaveFunction(psi.rbegin(), psi.rend()); }

double norm(const WaveFunction& psi, const GridConfig& grid) {
  double s = 0.0;
  for (const auto& z : psi) s += std::norm(z);
  return s * grid.dx();
}

double kinetic_energy(const WaveFunction& psi, const GridConfig& grid) {
  const double dx = grid.dx();
  double s = 0.0;
  for (std::size_t j = 1; j + 1 < psi.size(); ++j) {
    const Complex lap = (psi[j + 1] - 2.0 * psi[j] + psi[j - 1]) / (dx * dx);
    s += (std::conj(psi[j]) * (-0.5 * lap)).real();
  }
  return s * dx;
}

Propagator::Propagator(const GridConfig& grid, ScreenRates rates, double dt)
    : grid_(grid), rates_(rates), dt_(dt) {
  grid_.validate();
  if (rates.alice < 0.0 || rates.bob < 0.0) throw ConfigError("absorption rates must be >= 0", "lambda");
  if (!(dt > 0.0)) throw ConfigError("time step must be > 0", "grid.dt");
  w_alice_ = slab_weights(grid_, -grid_.screen_center);
  w_bob_ = slab_weights(grid_, grid_.screen_center);
  const std::size_t m = grid_.points;
  gamma_.resize(m);
  for (std::size_t j = 0; j < m; ++j) gamma_[j] = rates.alice * w_alice_[j] + rates.bob * w_bob_[j];

  // (1 + i dt/2 H) psi_new = (1 - i dt/2 H) psi_old on interior nodes 1..m-2.
  const double dx = grid_.dx();
  const double kin = 1.0 / (dx * dx);
  const Complex I(0.0, 1.0);
  off_a_ = -I * (0.25 * dt * kin);
  off_b_ = I * (0.25 * dt * kin);
  inv_denom_.assign(m, Complex{});
  c_prime_.assign(m, Complex{});
  b_diag_.assign(m, Complex{});
  Complex prev_c{};
  for (std::size_t j = 1; j + 1 < m; ++j) {
    const Complex a_diag = 1.0 + I * (0.5 * dt * kin) + 0.5 * dt * gamma_[j];
    b_diag_[j] = 1.0 - I * (0.5 * dt * kin) - 0.5 * dt * gamma_[j];
    const Complex denom = (j == 1) ? a_diag : a_diag - off_a_ * prev_c;
    inv_denom_[j] = 1.0 / denom;
    c_prime_[j] = off_a_ * inv_denom_[j];
    prev_c = c_prime_[j];
  }
  old_.resize(m);
  scratch_.resize(m);
}

StepFlux Propagator::step(WaveFunction& psi) {
  const std::size_t m = grid_.points;
  if (psi.size() != m) throw ConfigError("wavefunction size does not match grid", "state");
  old_ = psi;

  // Forward sweep on the right-hand side.
  Complex prev{};
  for (std::size_t j = 1; j + 1 < m; ++j) {
    const Complex rhs = b_diag_[j] * old_[j] + off_b_ * (old_[j - 1] + old_[j + 1]);
    const Complex d = (j == 1) ? rhs * inv_denom_[j] : (rhs - off_a_ * prev) * inv_denom_[j];
    scratch_[j] = d;
    prev = d;
  }
  psi[m - 1] = Complex{};
  psi[0] = Complex{};
  psi[m - 2] = scratch_[m - 2];
  for (std::size_t j = m - 2; j-- > 1;) psi[j] = scratch_[j] - c_prime_[j] * psi[j + 1];

  const double dx = grid_.dx();
  StepFlux flux;
  double old_norm = 0.0;
  double new_norm = 0.0;
  for (std::size_t j = 1; j + 1 < m; ++j) {
    old_norm += std::norm(old_[j]);
    new_norm += std::norm(psi[j]);
    if (gamma_[j] != 0.0) {
      const double mid = std::norm(0.5 * (old_[j] + psi[j]));
      flux.alice += rates_.alice * w_alice_[j] * mid;
      flux.bob += rates_.bob * w_bob_[j] * mid;
    }
  }
  flux.alice *= 2.0 * dt_ * dx;
  flux.bob *= 2.0 * dt_ * dx;
  if (!std::isfinite(new_norm) || (new_norm - old_norm) * dx > 1e-9) {
    throw NumericalFault("norm grew by " + std::to_string((new_norm - old_norm) * dx) + " in one step");
  }
  return flux;
}

WaveFunction evolve_step(const WaveFunction& psi, const GridConfig& grid, ScreenRates rates) {
  Propagator prop(grid, rates);
  WaveFunction out = psi;
  prop.step(out);
  return out;
}

double AbsorptionLedger::max_conservation_error() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < time.size(); ++i) {
    worst = std::max(worst, std::abs(surviving_norm[i] + absorbed_alice[i] + absorbed_bob[i] - 1.0));
  }
  return worst;
}

void AbsorptionLedger::write_csv(std::ostream& out) const {
  out << "t,surviving_norm,absorbed_alice,absorbed_bob\n";
  const auto old_precision = out.precision(17);
  for (std::size_t i = 0; i < time.size(); ++i) {
    out << time[i] << ',' << surviving_norm[i] << ',' << absorbed_alice[i] << ',' << absorbed_bob[i] << '\n';
  }
  out.precision(old_precision);
}

TimingConfig numeric_timing(const GridConfig& grid, const PacketSpec& packet, int bounce_count) {
  return TimingConfig::long_window(grid.screen_distance(), packet.speed(), bounce_count);
}

namespace {

JointMeasurement run_single(ScreenRates rates, const PacketSpec& packet, const GridConfig& grid,
                            const TimingConfig& timing, PacketKind kind) {
  const double t1 = timing.t1();
  const double t2 = timing.t2();
  const auto steps = static_cast<std::size_t>(std::ceil(t2 / grid.dt - 1e-9));
  const double dt = t2 / static_cast<double>(steps);
  const auto t1_step = static_cast<std::size_t>(std::floor(t1 / dt + 1e-9));

  Propagator prop(grid, rates, dt);
  WaveFunction psi = make_packet(packet, grid, kind);
  const double n0 = norm(psi, grid);
  const double e0 = kinetic_energy(psi, grid);

  JointMeasurement out;
  AbsorptionLedger& ledger = out.ledger;
  ledger.t1 = t1;
  ledger.t2 = t2;
  ledger.time.reserve(steps + 1);
  ledger.surviving_norm.reserve(steps + 1);
  ledger.absorbed_alice.reserve(steps + 1);
  ledger.absorbed_bob.reserve(steps + 1);
  ledger.time.push_back(0.0);
  ledger.surviving_norm.push_back(n0);
  ledger.absorbed_alice.push_back(0.0);
  ledger.absorbed_bob.push_back(0.0);

  double cum_a = 0.0;
  double cum_b = 0.0;
  for (std::size_t s = 1; s <= steps; ++s) {
    const StepFlux f = prop.step(psi);
    cum_a += f.alice;
    cum_b += f.bob;
    const double n = norm(psi, grid);
    if (!(std::abs(n + cum_a + cum_b - 1.0) <= 1e-5)) {
      throw NumericalFault("absorption ledger breached at step " + std::to_string(s));
    }
    if (s == t1_step) {
      out.pre_window_alice = cum_a;
      out.pre_window_bob = cum_b;
    }
    ledger.time.push_back(static_cast<double>(s) * dt);
    ledger.surviving_norm.push_back(n);
    ledger.absorbed_alice.push_back(cum_a);
    ledger.absorbed_bob.push_back(cum_b);
  }
  out.alice = cum_a;
  out.bob = cum_b;
  out.neither = ledger.surviving_norm.back();
  const double e1 = kinetic_energy(psi, grid);
  out.energy_drift = e0 != 0.0 ? (e1 - e0) / e0 : 0.0;
  return out;
}

JointMeasurement average(const JointMeasurement& a, const JointMeasurement& b) {
  JointMeasurement out;
  out.alice = 0.5 * (a.alice + b.alice);
  out.bob = 0.5 * (a.bob + b.bob);
  out.neither = 0.5 * (a.neither + b.neither);
  out.pre_window_alice = 0.5 * (a.pre_window_alice + b.pre_window_alice);
  out.pre_window_bob = 0.5 * (a.pre_window_bob + b.pre_window_bob);
  out.energy_drift = std::max(std::abs(a.energy_drift), std::abs(b.energy_drift));
  out.ledger = a.ledger;
  for (std::size_t i = 0; i < out.ledger.time.size(); ++i) {
    out.ledger.surviving_norm[i] = 0.5 * (a.ledger.surviving_norm[i] + b.ledger.surviving_norm[i]);
    out.ledger.absorbed_alice[i] = 0.5 * (a.ledger.absorbed_alice[i] + b.ledger.absorbed_alice[i]);
    out.ledger.absorbed_bob[i] = 0.5 * (a.ledger.absorbed_bob[i] + b.ledger.absorbed_bob[i]);
  }
  return out;
}

}  // namespace

JointMeasurement run_joint_measurement(ScreenRates rates, const PacketSpec& packet, const GridConfig& grid,
                                       const TimingConfig& timing) {
  validate_resolution(grid, packet);
  timing.validate();
  if (packet.kind == PacketKind::Mixture) {
    return average(run_single(rates, packet, grid, timing, PacketKind::TowardAlice),
                   run_single(rates, packet, grid, timing, PacketKind::TowardBob));
  }
  return run_single(rates, packet, grid, timing, packet.kind);
}

NumericTriple run_all_settings(double lambda_standard, double lambda_efficient, const PacketSpec& packet,
                               const GridConfig& grid, const TimingConfig& timing, unsigned threads) {
  const std::array<ScreenRates, 4> rates{
      ScreenRates{lambda_standard, lambda_standard},    // AB
      ScreenRates{lambda_efficient, lambda_standard},   // A'B
      ScreenRates{lambda_standard, lambda_efficient},   // AB'
      ScreenRates{lambda_efficient, lambda_efficient},  // A'B'
  };
  std::array<JointMeasurement, 4> runs;
  if (threads <= 1) {
    for (std::size_t i = 0; i < 4; ++i) runs[i] = run_joint_measurement(rates[i], packet, grid, timing);
  } else {
    std::vector<std::thread> pool;
    std::array<std::exception_ptr, 4> errors{};
    for (std::size_t i = 0; i < 4; ++i) {
      pool.emplace_back([&, i] {
        try {
          runs[i] = run_joint_measurement(rates[i], packet, grid, timing);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  NumericTriple out;
  for (auto s : kAllSettings) {
    const auto& r = runs[index_of(s)];
    out.table[index_of(s)] = OutcomeDistribution::single_entity(s, r.alice, r.bob, r.neither);
    out.max_pre_window = std::max(out.max_pre_window, r.pre_window_alice + r.pre_window_bob);
    out.max_conservation_error = std::max(out.max_conservation_error, r.ledger.max_conservation_error());
  }
  const auto clamp01 = [](double x) { return std::clamp(x, 0.0, 1.0); };
  out.p_prime_aprime_b = runs[index_of(Setting::APrimeB)].neither;
  out.p_prime_a_bprime = runs[index_of(Setting::ABPrime)].neither;
  out.triple = NonDetectionTriple{clamp01(runs[index_of(Setting::AB)].neither),
                                  clamp01(0.5 * (out.p_prime_aprime_b + out.p_prime_a_bprime)),
                                  clamp01(runs[index_of(Setting::APrimeBPrime)].neither)};
  const double denom = out.triple.p * out.triple.p_double_prime;
  out.geometric_ratio = denom > 0.0 ? out.triple.p_prime * out.triple.p_prime / denom
                                    : std::numeric_limits<double>::quiet_NaN();
  return out;
}

double single_pass_detection(double lambda, const PacketSpec& packet, const GridConfig& grid) {
  PacketSpec toward = packet;
  toward.kind = PacketKind::TowardAlice;
  validate_resolution(grid, toward);
  const double t_end = grid.screen_distance() / packet.speed();
  const auto steps = static_cast<std::size_t>(std::ceil(t_end / grid.dt - 1e-9));
  Propagator prop(grid, ScreenRates{lambda, 0.0}, t_end / static_cast<double>(steps));
  WaveFunction psi = make_packet(toward, grid, PacketKind::TowardAlice);
  double absorbed = 0.0;
  for (std::size_t s = 0; s < steps; ++s) absorbed += prop.step(psi).alice;
  return absorbed;
}

ConvergenceReport convergence_study(ScreenRates rates, const PacketSpec& packet, const GridConfig& base,
                                    const TimingConfig& timing, int levels) {
  if (levels < 2) throw ConfigError("convergence study needs at least two levels", "levels");
  ConvergenceReport report;
  GridConfig g = base;
  g.screen_width = base.width();
  for (int k = 0; k < levels; ++k) {
    const JointMeasurement m = run_joint_measurement(rates, packet, g, timing);
    report.levels.push_back(ConvergenceLevel{g.points, g.dx(), g.dt, m.neither});
    g = g.refined();
  }
  for (std::size_t k = 0; k + 1 < report.levels.size(); ++k) {
    report.differences.push_back(std::abs(report.levels[k].p_neither - report.levels[k + 1].p_neither));
  }
  for (std::size_t k = 0; k + 1 < report.differences.size(); ++k) {
    if (report.differences[k + 1] >= report.differences[k] && report.differences[k] > 0.0) {
      report.converged = false;
    }
  }
  report.richardson_error = report.differences.back() / 3.0;
  if (report.differences.size() >= 2) {
    const double prev = report.differences[report.differences.size() - 2];
    const double last = report.differences.back();
    report.observed_order = (prev > 0.0 && last > 0.0) ? std::log2(prev / last) : 0.0;
  }
  return report;
}

}  // namespace bellsim
