#pragma once

// Measurement-statistics algebra for two parties, two settings, two outcomes.
//
// Outcome index 1 means "detected within the window", index 2 "not detected".
// Alice's settings are A (standard screen) and A' (efficient screen); Bob's are B and B'.

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

namespace bellsim {

/// Normalization tolerance for values crossing an API boundary (Monte Carlo estimates included).
inline constexpr double kBoundaryTolerance = 1e-9;
/// Normalization tolerance for internally generated closed-form values.
inline constexpr double kInternalTolerance = 1e-12;

enum class Setting : std::uint8_t { AB = 0, APrimeB = 1, ABPrime = 2, APrimeBPrime = 3 };

inline constexpr std::array<Setting, 4> kAllSettings{Setting::AB, Setting::APrimeB,
                                                     Setting::ABPrime, Setting::APrimeBPrime};

std::string_view to_string(Setting s);
constexpr std::size_t index_of(Setting s) { return static_cast<std::size_t>(s); }

/// Joint probabilities P(x_i, y_j) of one coincidence measurement.
struct OutcomeDistribution {
  double p11 = 0.0;  ///< both detect
  double p12 = 0.0;  ///< Alice detects, Bob does not
  double p21 = 0.0;  ///< Bob detects, Alice does not
  double p22 = 0.0;  ///< neither detects
  Setting setting = Setting::AB;

  double total() const { return p11 + p12 + p21 + p22; }

  /// Throws InvalidDistribution if an entry leaves [0,1] or the total misses 1 by more than `tolerance`.
  void validate(double tolerance = kBoundaryTolerance) const;

  /// Single-entity table: p11 is zero by construction.
  static OutcomeDistribution single_entity(Setting setting, double alice_detects,
                                           double bob_detects, double neither);
};

using SettingTable = std::array<OutcomeDistribution, 4>;

/// Non-detection probabilities (p, p', p'') for settings AB, {A'B, AB'}, A'B'.
struct NonDetectionTriple {
  double p = 0.0;
  double p_prime = 0.0;
  double p_double_prime = 0.0;

  /// Advisory only; the standard-screen setting is usually the least absorbing.
  bool ordering_ok() const { return p >= p_double_prime; }
  void validate() const;
};

struct ExpectationQuad {
  double e_ab = 0.0;
  double e_ab_prime = 0.0;
  double e_aprime_b = 0.0;
  double e_aprime_bprime = 0.0;
};

/// Which expectation value carries the minus sign in the CHSH combination.
enum class SignConvention : std::uint8_t { MinusOnAB, MinusOnABPrime, MinusOnAPrimeB, MinusOnAPrimeBPrime };

inline constexpr std::array<SignConvention, 4> kAllConventions{
    SignConvention::MinusOnAB, SignConvention::MinusOnABPrime, SignConvention::MinusOnAPrimeB,
    SignConvention::MinusOnAPrimeBPrime};

std::string_view to_string(SignConvention c);

enum class Verdict : std::uint8_t { NoViolation, ViolatesChsh };

std::string_view to_string(Verdict v);

struct ViolationCheck {
  Verdict verdict = Verdict::NoViolation;
  /// p - p'' - 2p' < -2. Cannot hold when p >= p''; reported so callers can see it.
  bool second_branch = false;
};

struct Marginals {
  double alice_1 = 0.0;
  double alice_2 = 0.0;
  double bob_1 = 0.0;
  double bob_2 = 0.0;
};

/// Residual slots, one per marginal-law equality.
enum class Residual : std::uint8_t {
  A1,        ///< P_B(A1)  - P_B'(A1)
  A2,        ///< P_B(A2)  - P_B'(A2)
  APrime1,   ///< P_B(A'1) - P_B'(A'1)
  APrime2,   ///< P_B(A'2) - P_B'(A'2)
  B1,        ///< P_A(B1)  - P_A'(B1)
  B2,        ///< P_A(B2)  - P_A'(B2)
  BPrime1,   ///< P_A(B'1) - P_A'(B'1)
  BPrime2,   ///< P_A(B'2) - P_A'(B'2)
};

struct MarginalReport {
  std::array<double, 8> residuals{};
  /// [P_B(A1)-P_B'(A1)] + [P_B'(A'1)-P_B(A'1)] + [P_A(B1)-P_A'(B1)] + [P_A'(B'1)-P_A(B'1)]
  double aggregate = 0.0;
  bool violates = false;

  double operator[](Residual r) const { return residuals[static_cast<std::size_t>(r)]; }
};

struct ChshReport {
  ExpectationQuad expectations;
  double chsh_value = 0.0;
  SignConvention sign_convention = SignConvention::MinusOnAB;
  bool violates_chsh = false;
  std::array<double, 8> marginal_residuals{};
  double signaling_aggregate = 0.0;
  bool violates_marginals = false;
};

/// E = p11 + p22 - p12 - p21. Rejects tables off normalization by more than 1e-9.
double expectation(const OutcomeDistribution& dist);

ExpectationQuad expectations(const SettingTable& table);

double chsh(const ExpectationQuad& e, SignConvention convention = SignConvention::MinusOnAB);
double max_abs_chsh(const ExpectationQuad& e);

/// 2(2p' + p'' - p - 1), the CHSH value for a single-entity experiment (minus on E(A,B)).
double chsh_from_triple(const NonDetectionTriple& t);

/// ViolatesChsh iff 2p' < p - p'' (or, only possible when p < p'', the second branch).
ViolationCheck classify_violation(const NonDetectionTriple& t);

/// For estimated triples: a branch counts only if it clears max_sigma propagated standard
/// errors of p - p'' - 2p'.
ViolationCheck classify_violation(const NonDetectionTriple& t, const std::array<double, 3>& std_errors,
                                  double max_sigma);

/// 2p' - (p + p''); zero is necessary for the marginal laws to hold.
double marginal_aggregate(const NonDetectionTriple& t);

Marginals marginals(const OutcomeDistribution& dist);

/// Reorders four labeled tables by setting. Throws ConfigError on a missing or duplicated label.
SettingTable order_by_setting(std::span<const OutcomeDistribution> dists);

MarginalReport marginal_report(std::span<const OutcomeDistribution> dists);

ChshReport analyze(std::span<const OutcomeDistribution> dists,
                   SignConvention convention = SignConvention::MinusOnAB);

/// Builds the four single-entity tables of a triple. `alice_share[s]` is the fraction of the
/// detection mass 1 - p_s that goes to Alice in setting s.
SettingTable distributions_from_triple(const NonDetectionTriple& t,
                                       const std::array<double, 4>& alice_share);

/// The connected-vessels reference experiment: sixteen fixed probabilities.
SettingTable vessels_scenario();

}  // namespace bellsim
