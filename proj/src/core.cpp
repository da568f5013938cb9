#include "bellsim/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bellsim/errors.hpp"

namespace bellsim {

namespace {

bool in_unit_interval(double x, double tolerance) {
  return x >= -tolerance && x <= 1.0 + tolerance;
}

}  // namespace

std::string_view to_string(Setting s) {
  switch (s) {
    case Setting::AB:
      return "AB";
    case Setting::APrimeB:
      return "A'B";
    case Setting::ABPrime:
      return "AB'";
    case Setting::APrimeBPrime:
      return "A'B'";
  }
  return "?";
}

std::string_view to_string(SignConvention c) {
  switch (c) {
    case SignConvention::MinusOnAB:
      return "minus-on-AB";
    case SignConvention::MinusOnABPrime:
      return "minus-on-AB'";
    case SignConvention::MinusOnAPrimeB:
      return "minus-on-A'B";
    case SignConvention::MinusOnAPrimeBPrime:
      return "minus-on-A'B'";
  }
  return "?";
}

std::string_view to_string(Verdict v) {
  return v == Verdict::ViolatesChsh ? "ViolatesChsh" : "NoViolation";
}

void OutcomeDistribution::validate(double tolerance) const {
  for (double x : {p11, p12, p21, p22}) {
    if (!std::isfinite(x) || !in_unit_interval(x, tolerance)) {
      throw InvalidDistribution("outcome probability " + std::to_string(x) + " outside [0,1] for setting " +
                                std::string(to_string(setting)));
    }
  }
  if (std::abs(total() - 1.0) > tolerance) {
    throw InvalidDistribution("outcome distribution for setting " + std::string(to_string(setting)) +
                              " sums to " + std::to_string(total()));
  }
}

OutcomeDistribution OutcomeDistribution::single_entity(Setting setting, double alice_detects,
                                                       double bob_detects, double neither) {
  return OutcomeDistribution{0.0, alice_detects, bob_detects, neither, setting};
}

void NonDetectionTriple::validate() const {
  for (double x : {p, p_prime, p_double_prime}) {
    if (!std::isfinite(x) || x < 0.0 || x > 1.0) {
      throw InvalidDistribution("non-detection probability " + std::to_string(x) + " outside [0,1]");
    }
  }
}

double expectation(const OutcomeDistribution& dist) {
  dist.validate(kBoundaryTolerance);
  return dist.p11 + dist.p22 - dist.p12 - dist.p21;
}

ExpectationQuad expectations(const SettingTable& table) {
  return ExpectationQuad{
      expectation(table[index_of(Setting::AB)]),
      expectation(table[index_of(Setting::ABPrime)]),
      expectation(table[index_of(Setting::APrimeB)]),
      expectation(table[index_of(Setting::APrimeBPrime)]),
  };
}

double chsh(const ExpectationQuad& e, SignConvention convention) {
  switch (convention) {
    case SignConvention::MinusOnAB:
      return e.e_aprime_bprime + e.e_ab_prime + e.e_aprime_b - e.e_ab;
    case SignConvention::MinusOnABPrime:
      return e.e_aprime_bprime + e.e_ab + e.e_aprime_b - e.e_ab_prime;
    case SignConvention::MinusOnAPrimeB:
      return e.e_aprime_bprime + e.e_ab + e.e_ab_prime - e.e_aprime_b;
    case SignConvention::MinusOnAPrimeBPrime:
      return e.e_ab + e.e_ab_prime + e.e_aprime_b - e.e_aprime_bprime;
  }
  return 0.0;
}

double max_abs_chsh(const ExpectationQuad& e) {
  double best = 0.0;
  for (auto c : kAllConventions) best = std::max(best, std::abs(chsh(e, c)));
  return best;
}

double chsh_from_triple(const NonDetectionTriple& t) {
  t.validate();
  return 2.0 * (2.0 * t.p_prime + t.p_double_prime - t.p - 1.0);
}

ViolationCheck classify_violation(const NonDetectionTriple& t) {
  t.validate();
  ViolationCheck out;
  const bool first_branch = 2.0 * t.p_prime < t.p - t.p_double_prime;
  out.second_branch = t.p - t.p_double_prime - 2.0 * t.p_prime < -2.0;
  out.verdict = (first_branch || out.second_branch) ? Verdict::ViolatesChsh : Verdict::NoViolation;
  return out;
}

ViolationCheck classify_violation(const NonDetectionTriple& t, const std::array<double, 3>& std_errors,
                                  double max_sigma) {
  t.validate();
  const auto [s, sp, spp] = std_errors;
  const double band = max_sigma * std::sqrt(s * s + 4.0 * sp * sp + spp * spp);
  const double margin = t.p - t.p_double_prime - 2.0 * t.p_prime;
  ViolationCheck out;
  out.second_branch = margin + 2.0 < -band;
  out.verdict = (margin > band || out.second_branch) ? Verdict::ViolatesChsh : Verdict::NoViolation;
  return out;
}

double marginal_aggregate(const NonDetectionTriple& t) {
  t.validate();
  return 2.0 * t.p_prime - (t.p + t.p_double_prime);
}

Marginals marginals(const OutcomeDistribution& dist) {
  dist.validate(kBoundaryTolerance);
  return Marginals{dist.p11 + dist.p12, dist.p21 + dist.p22, dist.p11 + dist.p21, dist.p12 + dist.p22};
}

SettingTable order_by_setting(std::span<const OutcomeDistribution> dists) {
  if (dists.size() != 4) {
    throw ConfigError("expected four outcome distributions, got " + std::to_string(dists.size()));
  }
  SettingTable table{};
  std::array<bool, 4> seen{};
  for (const auto& d : dists) {
    const auto i = index_of(d.setting);
    if (i >= 4) throw ConfigError("unknown setting label");
    if (seen[i]) throw ConfigError("setting " + std::string(to_string(d.setting)) + " appears twice");
    seen[i] = true;
    table[i] = d;
  }
  return table;
}

MarginalReport marginal_report(std::span<const OutcomeDistribution> dists) {
  const SettingTable table = order_by_setting(dists);
  const Marginals ab = marginals(table[index_of(Setting::AB)]);
  const Marginals apb = marginals(table[index_of(Setting::APrimeB)]);
  const Marginals abp = marginals(table[index_of(Setting::ABPrime)]);
  const Marginals apbp = marginals(table[index_of(Setting::APrimeBPrime)]);

  MarginalReport r;
  // Alice's marginals compared across Bob's choice, then Bob's across Alice's.
  r.residuals = {
      ab.alice_1 - abp.alice_1, ab.alice_2 - abp.alice_2,
      apb.alice_1 - apbp.alice_1, apb.alice_2 - apbp.alice_2,
      ab.bob_1 - apb.bob_1, ab.bob_2 - apb.bob_2,
      abp.bob_1 - apbp.bob_1, abp.bob_2 - apbp.bob_2,
  };
  r.aggregate = r[Residual::A1] - r[Residual::APrime1] + r[Residual::B1] - r[Residual::BPrime1];
  r.violates = std::any_of(r.residuals.begin(), r.residuals.end(),
                           [](double x) { return std::abs(x) > kBoundaryTolerance; });
  return r;
}

ChshReport analyze(std::span<const OutcomeDistribution> dists, SignConvention convention) {
  const SettingTable table = order_by_setting(dists);
  ChshReport report;
  report.expectations = expectations(table);
  report.chsh_value = chsh(report.expectations, convention);
  report.sign_convention = convention;
  report.violates_chsh = std::abs(report.chsh_value) > 2.0;
  const MarginalReport m = marginal_report(table);
  report.marginal_residuals = m.residuals;
  report.signaling_aggregate = m.aggregate;
  report.violates_marginals = m.violates;
  return report;
}

SettingTable distributions_from_triple(const NonDetectionTriple& t, const std::array<double, 4>& alice_share) {
  t.validate();
  const std::array<double, 4> neither{t.p, t.p_prime, t.p_prime, t.p_double_prime};
  SettingTable table{};
  for (auto s : kAllSettings) {
    const auto i = index_of(s);
    const double share = alice_share[i];
    if (!(share >= 0.0 && share <= 1.0)) throw ConfigError("alice share outside [0,1]");
    const double detected = 1.0 - neither[i];
    const double alice = share * detected;
    table[i] = OutcomeDistribution::single_entity(s, alice, detected - alice, neither[i]);
  }
  return table;
}

SettingTable vessels_scenario() {
  SettingTable table{};
  table[index_of(Setting::AB)] = {0.0, 0.5, 0.5, 0.0, Setting::AB};
  table[index_of(Setting::ABPrime)] = {1.0, 0.0, 0.0, 0.0, Setting::ABPrime};
  table[index_of(Setting::APrimeB)] = {1.0, 0.0, 0.0, 0.0, Setting::APrimeB};
  table[index_of(Setting::APrimeBPrime)] = {1.0, 0.0, 0.0, 0.0, Setting::APrimeBPrime};
  return table;
}

}  // namespace bellsim
