// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bellsim/classical_analytic.hpp"
#include "bellsim/classical_montecarlo.hpp"
#include "bellsim/config.hpp"
#include "bellsim/core.hpp"
#include "bellsim/quantum_numeric.hpp"
#include "bellsim/quantum_semiclassical.hpp"
#include "bellsim/scenario.hpp"

using namespace bellsim;

namespace {

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) detail << what;
    ok = ok && cond;
  }
};

int failures = 0;

void criterion(int id, const char* title, const std::function<void(Check&)>& body) {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.ok = false;
    c.detail << "exception: " << e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%s  %d  %s  (%.2f s)%s%s\n", c.ok ? "PASS" : "FAIL", id, title, secs,
              c.ok ? "" : "  ", c.detail.str().c_str());
  std::fflush(stdout);
  if (!c.ok) ++failures;
}

std::string num(double x) {
  char b[40];
  std::snprintf(b, sizeof b, "%.17g", x);
  return b;
}

// Exact rationals for the vessels table: quarters.
void vessels(Check& c) {
  const SettingTable t = vessels_scenario();
  int quarters[4][4];
  for (auto s : kAllSettings) {
    const auto& d = t[index_of(s)];
    const double cells[4] = {d.p11, d.p12, d.p21, d.p22};
    for (int k = 0; k < 4; ++k) quarters[index_of(s)][k] = static_cast<int>(std::lround(cells[k] * 4));
  }
  int e4[4];
  for (int s = 0; s < 4; ++s) e4[s] = quarters[s][0] + quarters[s][3] - quarters[s][1] - quarters[s][2];
  const int chsh4 = e4[1] + e4[2] + e4[3] - e4[0];
  c.require(chsh4 == 16, "integer CHSH*4 = " + std::to_string(chsh4));
  const ChshReport r = analyze(t);
  c.require(r.chsh_value == 4.0, "chsh = " + num(r.chsh_value));
  const MarginalReport m = marginal_report(t);
  c.require(m[Residual::A1] == -0.5, "P_B(A1) - P_B'(A1) = " + num(m[Residual::A1]));
  c.require(m.violates && r.violates_marginals, "marginal residuals all zero");
}

void closed_forms(Check& c) {
  std::mt19937_64 rng(2718281828);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> nd(1, 20);
  double worst_sum = 0.0;
  double worst_gm = 0.0;
  double worst_series = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double r = u(rng);
    const double rp = u(rng);
    const int n = nd(rng);
    const SettingTable tab = setting_table_long(r, rp, n);
    for (const auto& d : tab) {
      worst_sum = std::max(worst_sum, std::abs(d.total() - 1.0));
      const double ra = d.setting == Setting::APrimeB || d.setting == Setting::APrimeBPrime ? rp : r;
      const double rb = d.setting == Setting::ABPrime || d.setting == Setting::APrimeBPrime ? rp : r;
      double alice = 0.0;
      double bob = 0.0;
      for (int k = 0; k < n; ++k) {
        const double x = std::pow(ra * rb, k);
        alice += 0.5 * x * (1.0 - ra) * (1.0 + rb);
        bob += 0.5 * x * (1.0 - rb) * (1.0 + ra);
      }
      worst_series = std::max({worst_series, std::abs(d.p12 - alice), std::abs(d.p21 - bob)});
    }
    const auto t = triple_long(r, rp, n);
    worst_gm = std::max(worst_gm, std::abs(t.p_prime * t.p_prime - t.p * t.p_double_prime));
  }
  c.require(worst_sum <= 1e-12, "sum-to-one error " + num(worst_sum));
  c.require(worst_gm <= 1e-12, "geometric-mean error " + num(worst_gm));
  c.require(worst_series <= 1e-12, "series error " + num(worst_series));
}

void corner(Check& c) {
  const double a = chsh_from_triple(triple_long(1, 0, 1));
  c.require(a == -4.0, "corner chsh " + num(a));
  const auto t = triple_long(0.8, 0.2, 3);
  const double b = chsh_from_triple(t);
  c.require(std::abs(b - -2.507776) <= 1e-9, "chsh(0.8,0.2,3) = " + num(b));
  c.require(classify_violation(t).verdict == Verdict::ViolatesChsh, "no violation reported");
}

// 75 grid points x 4 settings x 3 stochastic cells. With a 4-sigma two-sided band the
// per-cell false alarm rate is about 6.3e-5; only the cells with 0 < p < 1 can fail, and
// the three cells of one table share one multinomial, so at most 2 are independent. That
// gives at most 75 * 4 * 2 * 6.3e-5 = 0.038 expected false alarms per full run, under the
// 1-in-20 budget. Fixed seeds make the outcome reproducible.
void mc_vs_analytic(Check& c) {
  const double grid[5] = {0.0, 0.25, 0.5, 0.75, 1.0};
  const std::uint64_t trials = 100000;
  const TimingConfig base = TimingConfig::long_window(1.0, 1.0, 1);
  int cells = 0;
  double worst_z = 0.0;
  std::uint64_t seed = 1;
  for (double r : grid) {
    for (double rp : grid) {
      for (int n = 1; n <= 3; ++n) {
        TimingConfig timing = TimingConfig::long_window(base.distance, base.speed, n);
        const SettingTable exact = setting_table_long(r, rp, n);
        for (auto s : kAllSettings) {
          const bool alice_eff = s == Setting::APrimeB || s == Setting::APrimeBPrime;
          const bool bob_eff = s == Setting::ABPrime || s == Setting::APrimeBPrime;
          const McEstimate e =
              estimate_distribution(ClassicalScreen(alice_eff ? rp : r), ClassicalScreen(bob_eff ? rp : r), timing,
                                    trials, seed, s, 1);
          const auto& d = exact[index_of(s)];
          const double want[4] = {d.p11, d.p12, d.p21, d.p22};
          for (int k = 0; k < 4; ++k) {
            const double got = static_cast<double>(e.counts[k]) / static_cast<double>(trials);
            const double sigma = std::sqrt(want[k] * (1.0 - want[k]) / static_cast<double>(trials));
            ++cells;
            if (sigma == 0.0) {
              c.require(std::abs(got - want[k]) <= 1e-12,
                        "degenerate cell off: R=" + num(r) + " R'=" + num(rp) + " n=" + std::to_string(n));
            } else {
              const double z = std::abs(got - want[k]) / sigma;
              worst_z = std::max(worst_z, z);
              c.require(z <= 4.0, "cell beyond 4 sigma: R=" + num(r) + " R'=" + num(rp) +
                                      " n=" + std::to_string(n) + " z=" + num(z));
            }
          }
          if (r == 0.75 && rp == 0.25 && n == 2) {
            const McEstimate again = estimate_distribution(ClassicalScreen(alice_eff ? rp : r),
                                                           ClassicalScreen(bob_eff ? rp : r), timing, trials,
                                                           seed, s, 4);
            c.require(again.counts == e.counts, "thread count changed counts");
            const McEstimate rerun = estimate_distribution(ClassicalScreen(alice_eff ? rp : r),
                                                           ClassicalScreen(bob_eff ? rp : r), timing, trials,
                                                           seed, s, 1);
            c.require(rerun.counts == e.counts, "rerun changed counts");
          }
        }
        ++seed;
      }
    }
  }
  if (c.ok) std::printf("      %d cells, worst |z| = %.3f\n", cells, worst_z);
}

void short_window(Check& c) {
  const double grid[5] = {0.0, 0.25, 0.5, 0.8, 1.0};
  const std::uint64_t trials = 100000;
  const TimingConfig timing = TimingConfig::short_window(1.0, 1.0, Rational{1, 2});
  std::uint64_t seed = 500;
  for (double r : grid) {
    for (double rp : grid) {
      const auto t = triple_short(r, rp);
      c.require(2.0 * t.p_prime == t.p + t.p_double_prime, "analytic arithmetic mean broken");
      c.require(marginal_aggregate(t) == 0.0, "analytic aggregate nonzero");
      const MarginalReport mr = marginal_report(setting_table_short(r, rp));
      c.require(std::abs(mr.aggregate) <= 1e-12, "analytic table aggregate nonzero");
      c.require(classify_violation(t).verdict == Verdict::NoViolation, "analytic violation");

      const McTriple m = estimate_triple(ClassicalScreen(r), ClassicalScreen(rp), timing, trials, seed++, 1);
      const auto [s, sp, spp] = m.std_errors;
      const double band = std::max(4.0 * std::sqrt(4.0 * sp * sp + s * s + spp * spp), 1e-12);
      const double gap = 2.0 * m.triple.p_prime - m.triple.p - m.triple.p_double_prime;
      c.require(std::abs(gap) <= band, "MC 2p' - p - p'' = " + num(gap) + " R=" + num(r) + " R'=" + num(rp));
      SettingTable tab{};
      for (auto st : kAllSettings) tab[index_of(st)] = m.settings[index_of(st)].distribution;
      const double agg = marginal_report(tab).aggregate;
      c.require(std::abs(agg) <= band, "MC aggregate " + num(agg));
      c.require(classify_violation(m.triple, m.std_errors, 4.0).verdict == Verdict::NoViolation,
                "MC violation at R=" + num(r) + " R'=" + num(rp));
    }
  }
}

void semiclassical(Check& c) {
  const auto efficient = AmplitudeScreen::from_reflection(0.0);  // |d'| = 1
  for (double r : {0.0, 0.3, 0.6, 0.9, 0.99}) {
    const auto res = triple_semiclassical(AmplitudeScreen::from_reflection(r), efficient);
    c.require(std::abs(res.p_prime) <= 1e-12 && std::abs(res.p_double_prime) <= 1e-12,
              "p', p'' not zero at |d'| = 1, r = " + num(r));
  }
  double prev = 0.0;
  for (double d : {1e-1, 1e-2, 1e-4, 1e-8}) {
    const auto res = triple_semiclassical(AmplitudeScreen::from_reflection(std::sqrt(1.0 - d * d)), efficient);
    const double x = chsh_from_triple(res.clamped_triple);
    c.require(x < prev, "CHSH not decreasing toward -4");
    prev = x;
  }
  c.require(std::abs(prev + 4.0) <= 1e-12, "CHSH at |d| = 1e-8 is " + num(prev));
  const auto breakdown = triple_semiclassical(AmplitudeScreen::from_reflection(0.5), efficient);
  c.require(std::abs(breakdown.p + 0.359375) <= 1e-15, "p = " + num(breakdown.p));
  c.require(!breakdown.physical, "breakdown not flagged");
}

void numeric(Check& c) {
  const GridConfig grid;
  PacketSpec packet;

  {
    packet.kind = PacketKind::Superposition;
    WaveFunction psi = make_packet(packet, grid, PacketKind::Superposition);
    Propagator prop(grid, ScreenRates{});
    for (int s = 0; s < 10000; ++s) prop.step(psi);
    const double drift = std::abs(norm(psi, grid) - 1.0);
    c.require(drift <= 1e-10, "free norm drift " + num(drift));
  }

  packet.kind = PacketKind::Mixture;
  const TimingConfig timing = numeric_timing(grid, packet, 2);
  const NumericTriple nt = run_all_settings(2.3, 17.0, packet, grid, timing, default_threads());
  c.require(nt.max_conservation_error <= 1e-6, "ledger error " + num(nt.max_conservation_error));

  packet.kind = PacketKind::TowardAlice;
  const auto a = run_joint_measurement(ScreenRates{2.3, 17.0}, packet, grid, timing);
  c.require(a.ledger.max_conservation_error() <= 1e-6, "directed ledger error");
  packet.kind = PacketKind::TowardBob;
  const auto b = run_joint_measurement(ScreenRates{17.0, 2.3}, packet, grid, timing);
  const double mirror = std::max({std::abs(a.alice - b.bob), std::abs(a.bob - b.alice), std::abs(a.neither - b.neither)});
  c.require(mirror <= 1e-10, "mirror asymmetry " + num(mirror));

  packet.kind = PacketKind::TowardAlice;
  const ConvergenceReport conv = convergence_study(ScreenRates{2.3, 17.0}, packet, grid, timing, 3);
  for (std::size_t k = 0; k < conv.differences.size(); ++k) {
    c.require(conv.differences[k] < 1e-3, "refinement difference " + num(conv.differences[k]));
  }
  c.require(conv.converged, "differences did not shrink");
  if (c.ok) {
    std::printf("      triple (%.6f, %.6f, %.6f), p'^2/(p p'') = %.4f, refinement diffs %.2e %.2e\n", nt.triple.p,
                nt.triple.p_prime, nt.triple.p_double_prime, nt.geometric_ratio, conv.differences[0],
                conv.differences[1]);
  }
}

void regime_coupling(Check& c) {
  const auto rows = run_scenario(parse_config(R"({
    "schema_version": 1, "engine": "classical-analytic",
    "classical": {"R": 0, "R_prime": 0}, "timing": {"n": 1},
    "sweep": [{"parameter": "classical.R", "min": 0, "max": 1, "points": 41},
              {"parameter": "classical.R_prime", "min": 0, "max": 1, "points": 41},
              {"parameter": "timing.n", "min": 1, "max": 10, "points": 10}]})"),
                                 RunOptions{default_threads(), std::nullopt});
  auto short_rows = run_scenario(parse_config(R"({
    "schema_version": 1, "engine": "classical-analytic",
    "classical": {"R": 0, "R_prime": 0}, "timing": {"n": 1, "window": "short"},
    "sweep": [{"parameter": "classical.R", "min": 0, "max": 1, "points": 41},
              {"parameter": "classical.R_prime", "min": 0, "max": 1, "points": 41}]})"));
  std::vector<ReportRow> all = rows;
  all.insert(all.end(), short_rows.begin(), short_rows.end());
  int am = 0;
  int gm_violating = 0;
  int boundary = 0;
  for (const auto& r : all) {
    c.require(r.triple.has_value(), "row without triple");
    c.require(std::abs(r.chsh - chsh_from_triple(*r.triple)) <= 1e-9, "CHSH round trip");
    c.require(r.regime_consistent, "inconsistent row " + std::to_string(r.index) + ": " + r.diagnostics);
    const auto& t = *r.triple;
    if (r.regime == Regime::ArithmeticMean) {
      ++am;
      const bool zero_aggregate = std::abs(r.marginal_aggregate) <= kRegimeTolerance;
      // A row inside the tolerance band can carry an exact verdict of ViolatesChsh with a
      // margin below the tolerance; it counts as non-violating at that tolerance.
      const double margin = t.p - t.p_double_prime - 2.0 * t.p_prime;
      const bool violates = r.violation == Verdict::ViolatesChsh && margin > kRegimeTolerance;
      if (r.violation == Verdict::ViolatesChsh) ++boundary;
      c.require(zero_aggregate == !violates, "aggregate/violation mismatch at row " + std::to_string(r.index));
      c.require(zero_aggregate, "arithmetic-mean row with nonzero aggregate");
    } else if (r.regime == Regime::GeometricMean && 2.0 * t.p_prime < t.p - t.p_double_prime) {
      ++gm_violating;
      c.require(r.violation == Verdict::ViolatesChsh, "geometric-mean row not flagged");
    }
    c.require(r.regime != Regime::Other, "closed-form row tagged Other");
  }
  c.require(am > 0 && gm_violating > 0, "grid missed a regime");
  if (c.ok) std::printf("      %zu rows, %d arithmetic-mean (%d inside the tolerance band), %d violating geometric-mean\n",
                         all.size(), am, boundary, gm_violating);
}

}  // namespace

int main() {
  criterion(1, "vessels: CHSH = 4 and P_B(A1) - P_B'(A1) = -1/2", vessels);
  criterion(2, "classical closed forms: sum to one, geometric mean, series (1e-12)", closed_forms);
  criterion(3, "maximal-violation corner and (0.8, 0.2, 3) CHSH = -2.507776", corner);
  criterion(4, "Monte Carlo vs closed forms on 5x5x3 grid, 4 sigma, deterministic", mc_vs_analytic);
  criterion(5, "short window: arithmetic mean, zero aggregate, no violation", short_window);
  criterion(6, "semiclassical limits and breakdown flag", semiclassical);
  criterion(7, "numeric propagator: unitarity, ledger, mirror, self-convergence", numeric);
  criterion(8, "regime coupling across the classical sweep grid", regime_coupling);
  std::printf("%s: %d of 8 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
