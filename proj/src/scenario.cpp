#include "bellsim/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <sstream>
#include <thread>

#include "bellsim/classical_analytic.hpp"
#include "bellsim/classical_montecarlo.hpp"
#include "bellsim/errors.hpp"
#include "bellsim/quantum_numeric.hpp"
#include "bellsim/quantum_semiclassical.hpp"
#include "bellsim/report.hpp"
#include "bellsim/rng.hpp"

namespace bellsim {

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::GeometricMean:
      return "GeometricMean";
    case Regime::ArithmeticMean:
      return "ArithmeticMean";
    case Regime::Other:
      return "Other";
  }
  return "?";
}

namespace {

class Diagnostics {
 public:
  Diagnostics& add(const std::string& key, double value) { return add(key, format_double(value)); }
  Diagnostics& add(const std::string& key, const std::string& value) {
    if (!text_.empty()) text_ += ';';
    text_ += key + '=' + value;
    return *this;
  }
  std::string str() const { return text_; }

 private:
  std::string text_;
};

void fill_from_triple(ReportRow& row, const NonDetectionTriple& t) {
  row.triple = t;
  row.chsh = chsh_from_triple(t);
  row.violation = classify_violation(t).verdict;
  row.marginal_aggregate = marginal_aggregate(t);
}

ReportRow vessels_row() {
  ReportRow row;
  const SettingTable table = vessels_scenario();
  const ChshReport report = analyze(table);
  row.chsh = report.chsh_value;
  row.violation = report.violates_chsh ? Verdict::ViolatesChsh : Verdict::NoViolation;
  row.marginal_aggregate = report.signaling_aggregate;
  row.distributions = table;
  row.diagnostics = Diagnostics()
                        .add("max_abs_chsh", max_abs_chsh(report.expectations))
                        .add("residual_A1", report.marginal_residuals[0])
                        .str();
  return row;
}

ReportRow classical_analytic_row(const ScenarioConfig& c) {
  ReportRow row;
  const double r = c.classical->reflectivity_standard;
  const double rp = c.classical->reflectivity_efficient;
  const TimingConfig timing = c.timing->to_timing();
  SettingTable table{};
  if (timing.mode == WindowMode::Long) {
    fill_from_triple(row, triple_long(r, rp, timing.bounce_count));
    table = setting_table_long(r, rp, timing.bounce_count);
  } else {
    fill_from_triple(row, triple_short(r, rp));
    table = setting_table_short(r, rp);
  }
  const MarginalReport m = marginal_report(table);
  row.distributions = table;
  row.diagnostics = Diagnostics()
                        .add("window", timing.mode == WindowMode::Long ? "long" : "short")
                        .add("table_aggregate", m.aggregate)
                        .str();
  return row;
}

ReportRow classical_mc_row(const ScenarioConfig& c, std::size_t index, unsigned threads) {
  ReportRow row;
  const TimingConfig timing = c.timing->to_timing();
  const McTriple est =
      estimate_triple(ClassicalScreen(c.classical->reflectivity_standard),
                      ClassicalScreen(c.classical->reflectivity_efficient), timing, c.mc->trials,
                      point_seed(c.mc->seed, index), threads);
  fill_from_triple(row, est.triple);
  row.std_errors = est.std_errors;
  row.violation = classify_violation(est.triple, est.std_errors, kRegimeSigma).verdict;
  SettingTable table{};
  for (auto s : kAllSettings) table[index_of(s)] = est.settings[index_of(s)].distribution;
  row.distributions = table;
  row.marginal_aggregate = marginal_report(table).aggregate;
  row.diagnostics = Diagnostics()
                        .add("trials_per_setting", std::to_string(c.mc->trials))
                        .add("symmetry_z", est.symmetry_z)
                        .add("symmetry_ok", est.symmetry_ok ? "true" : "false")
                        .str();
  return row;
}

ReportRow semiclassical_row(const ScenarioConfig& c) {
  ReportRow row;
  const auto& s = *c.semiclassical;
  const SemiclassicalResult res =
      triple_semiclassical(AmplitudeScreen::from_polar(s.standard_modulus, s.standard_phase),
                           AmplitudeScreen::from_polar(s.efficient_modulus, s.efficient_phase), s.emission);
  fill_from_triple(row, res.clamped_triple);
  row.physical = res.physical;
  Diagnostics d;
  d.add("raw_p", res.p).add("raw_p_prime", res.p_prime).add("raw_p_double_prime", res.p_double_prime);
  if (!res.physical) d.add("warning", "clamped");
  const double denom = res.clamped_triple.p * res.clamped_triple.p_double_prime;
  if (denom > 0.0) d.add("geometric_ratio", res.clamped_triple.p_prime * res.clamped_triple.p_prime / denom);
  row.diagnostics = d.str();
  return row;
}

ReportRow numeric_row(const ScenarioConfig& c, unsigned threads) {
  ReportRow row;
  const auto& n = *c.numeric;
  double lam_std = 0.0;
  double lam_eff = 0.0;
  Diagnostics d;
  if (n.lambda_standard) {
    lam_std = *n.lambda_standard;
    lam_eff = *n.lambda_efficient;
  } else {
    const Calibration cs = calibrate_lambda(*n.detection_standard, n.packet, n.grid);
    const Calibration ce = calibrate_lambda(*n.detection_efficient, n.packet, n.grid);
    lam_std = cs.lambda;
    lam_eff = ce.lambda;
    d.add("calibrated_detection_standard", cs.achieved).add("calibrated_detection_efficient", ce.achieved);
  }
  const TimingConfig timing = numeric_timing(n.grid, n.packet, n.bounce_count);
  const NumericTriple nt = run_all_settings(lam_std, lam_eff, n.packet, n.grid, timing, threads);
  fill_from_triple(row, nt.triple);
  row.distributions = nt.table;
  row.marginal_aggregate = marginal_report(nt.table).aggregate;
  d.add("lambda_standard", lam_std)
      .add("lambda_efficient", lam_eff)
      .add("p_prime_asymmetry", nt.p_prime_aprime_b - nt.p_prime_a_bprime)
      .add("geometric_ratio", nt.geometric_ratio)
      .add("pre_window_flux", nt.max_pre_window)
      .add("ledger_error", nt.max_conservation_error);
  row.diagnostics = d.str();
  return row;
}

bool near(double x, double target, double tol) { return std::abs(x - target) <= tol; }

}  // namespace

RegimeCheck classify_regime(const ReportRow& row) {
  RegimeCheck out;
  if (!row.triple) {
    out.detail = "no single-entity triple";
    return out;
  }
  const auto& t = *row.triple;
  double gm_tol = kRegimeTolerance;
  double am_tol = kRegimeTolerance;
  double violation_band = 0.0;
  if (row.std_errors) {
    const auto [s, sp, spp] = *row.std_errors;
    const double gm_sigma = std::sqrt(std::pow(2.0 * t.p_prime * sp, 2) + std::pow(t.p_double_prime * s, 2) +
                                      std::pow(t.p * spp, 2));
    const double am_sigma = std::sqrt(4.0 * sp * sp + s * s + spp * spp);
    gm_tol = std::max(gm_tol, kRegimeSigma * gm_sigma);
    am_tol = std::max(am_tol, kRegimeSigma * am_sigma);
    violation_band = kRegimeSigma * am_sigma;
  }
  const bool geometric = near(t.p_prime * t.p_prime, t.p * t.p_double_prime, gm_tol);
  const bool arithmetic = near(2.0 * t.p_prime, t.p + t.p_double_prime, am_tol);
  out.regime = arithmetic ? Regime::ArithmeticMean : geometric ? Regime::GeometricMean : Regime::Other;

  const double margin = t.p - t.p_double_prime - 2.0 * t.p_prime;
  if (out.regime == Regime::GeometricMean && t.p > t.p_double_prime && margin > violation_band) {
    const bool verdict_ok = row.violation == Verdict::ViolatesChsh;
    // Below ~1e-12 the margin is lost when CHSH is rounded.
    const bool value_ok = margin <= 1e-12 || std::abs(row.chsh) > 2.0;
    if (!verdict_ok || !value_ok) {
      out.consistent = false;
      out.detail = "geometric-mean row satisfies 2p' < p - p'' but is not a CHSH violation";
    }
  }
  if (out.regime == Regime::ArithmeticMean) {
    if (margin > am_tol || std::abs(row.chsh) > 2.0 + 2.0 * am_tol) {
      out.consistent = false;
      out.detail = "arithmetic-mean row violates CHSH";
    } else if (!near(row.marginal_aggregate, 0.0, am_tol)) {
      out.consistent = false;
      out.detail = "arithmetic-mean row has a nonzero marginal aggregate";
    }
  }
  return out;
}

Calibration calibrate_lambda(double target, const PacketSpec& packet, const GridConfig& grid) {
  if (!(target > 0.0 && target < 1.0)) throw ConfigError("calibration target must be in (0,1)", "numeric.calibrate");
  // Half-decade scan up the weak-coupling branch until the target is bracketed.
  Calibration out;
  double lo = 0.0;
  double d_lo = 0.0;
  double hi = 0.0;
  double d_hi = 0.0;
  for (int i = 0; i <= 12; ++i) {
    const double lam = std::pow(10.0, -2.0 + 0.5 * i);
    const double d = single_pass_detection(lam, packet, grid);
    if (d > out.peak_detection) {
      out.peak_detection = d;
      out.peak_lambda = lam;
    }
    if (d >= target) {
      hi = lam;
      d_hi = d;
      break;
    }
    if (d < out.peak_detection) break;  // past the turnover
    lo = lam;
    d_lo = d;
  }
  if (hi == 0.0) {
    throw ConfigError("target detection " + format_double(target) + " exceeds the reachable maximum " +
                          format_double(out.peak_detection),
                      "numeric.calibrate");
  }
  // Illinois regula falsi on the bracket.
  int side = 0;
  double lam = hi;
  double d = d_hi;
  for (int it = 0; it < 60 && std::abs(d - target) > 1e-9 && hi - lo > 1e-12 * hi; ++it) {
    lam = lo + (target - d_lo) * (hi - lo) / (d_hi - d_lo);
    d = single_pass_detection(lam, packet, grid);
    if (d < target) {
      lo = lam;
      d_lo = d;
      if (side == -1) d_hi = target + 0.5 * (d_hi - target);
      side = -1;
    } else {
      hi = lam;
      d_hi = d;
      if (side == 1) d_lo = target - 0.5 * (target - d_lo);
      side = 1;
    }
  }
  out.lambda = lam;
  out.achieved = d;
  return out;
}

std::uint64_t point_seed(std::uint64_t master_seed, std::size_t index) {
  return substream_seed(master_seed, 0x5EEDULL, index);
}

unsigned default_threads() {
  if (const char* env = std::getenv("BELLSIM_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

ReportRow evaluate_point(const ScenarioConfig& point, std::size_t index, unsigned threads) {
  ReportRow row;
  switch (point.engine) {
    case Engine::Vessels:
      row = vessels_row();
      break;
    case Engine::ClassicalAnalytic:
      row = classical_analytic_row(point);
      break;
    case Engine::ClassicalMc:
      row = classical_mc_row(point, index, threads);
      break;
    case Engine::QuantumSemiclassical:
      row = semiclassical_row(point);
      break;
    case Engine::QuantumNumeric:
      row = numeric_row(point, threads);
      break;
  }
  row.index = index;
  const RegimeCheck regime = classify_regime(row);
  row.regime = regime.regime;
  row.regime_consistent = regime.consistent;
  if (!regime.consistent) row.diagnostics += (row.diagnostics.empty() ? "" : ";") + std::string("inconsistent=") + regime.detail;
  return row;
}

std::vector<ReportRow> run_scenario(const ScenarioConfig& config, const RunOptions& options) {
  ScenarioConfig base = config;
  if (options.seed_override && base.mc) base.mc->seed = *options.seed_override;
  validate(base);

  std::size_t total = 1;
  for (const auto& a : base.sweep) total *= a.points;
  std::vector<ScenarioConfig> points;
  std::vector<std::vector<double>> values;
  points.reserve(total);
  std::vector<std::size_t> idx(base.sweep.size(), 0);
  for (std::size_t k = 0; k < total; ++k) {
    ScenarioConfig p = base;
    std::vector<double> v;
    for (std::size_t a = 0; a < base.sweep.size(); ++a) {
      v.push_back(base.sweep[a].value(idx[a]));
      p = with_parameter(p, base.sweep[a].parameter, v.back());
    }
    points.push_back(std::move(p));
    values.push_back(std::move(v));
    for (std::size_t a = base.sweep.size(); a-- > 0;) {
      if (++idx[a] < base.sweep[a].points) break;
      idx[a] = 0;
    }
  }

  std::vector<ReportRow> rows(total);
  const unsigned threads = std::max(1u, options.threads);
  if (total == 1 || threads == 1) {
    const unsigned engine_threads = total == 1 ? threads : 1;
    for (std::size_t k = 0; k < total; ++k) rows[k] = evaluate_point(points[k], k, engine_threads);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(total);
    std::vector<std::thread> pool;
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, total));
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < total; k = next++) {
          try {
            rows[k] = evaluate_point(points[k], k, 1);
          } catch (...) {
            errors[k] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  for (std::size_t k = 0; k < total; ++k) rows[k].sweep_values = values[k];
  return rows;
}

}  // namespace bellsim
