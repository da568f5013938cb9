#include "bellsim/core.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "bellsim/errors.hpp"

using namespace bellsim;

namespace {

OutcomeDistribution dist(double p11, double p12, double p21, double p22, Setting s = Setting::AB) {
  OutcomeDistribution d;
  d.p11 = p11;
  d.p12 = p12;
  d.p21 = p21;
  d.p22 = p22;
  d.setting = s;
  return d;
}

// Independent expectation-path oracle: E = p11 + p22 - p12 - p21 with p11 = 0.
double oracle_chsh(const NonDetectionTriple& t, const std::array<double, 4>& share) {
  const double ps[4] = {t.p, t.p_prime, t.p_prime, t.p_double_prime};
  double e[4];
  for (int i = 0; i < 4; ++i) {
    const double mass = 1.0 - ps[i];
    const double p12 = share[i] * mass;
    const double p21 = mass - p12;
    e[i] = ps[i] - p12 - p21;
  }
  // e[0] = E(A,B), e[1] = E(A',B), e[2] = E(A,B'), e[3] = E(A',B')
  return e[1] + e[2] + e[3] - e[0];
}

NonDetectionTriple random_triple(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double p = u(rng);
  double pp = u(rng);
  if (p < pp) std::swap(p, pp);
  return NonDetectionTriple{p, u(rng), pp};
}

}  // namespace

TEST(expectation, examples) {
  EXPECT_EQ(expectation(dist(0, 0.5, 0.5, 0)), -1.0);
  EXPECT_EQ(expectation(dist(1, 0, 0, 0)), 1.0);
  EXPECT_EQ(expectation(dist(0.25, 0.25, 0.25, 0.25)), 0.0);
}

TEST(expectation, rejects_unnormalized) {
  EXPECT_THROW(expectation(dist(0, 0.5, 0.5, 0.1)), InvalidDistribution);
  EXPECT_THROW(expectation(dist(-0.1, 0.6, 0.5, 0)), InvalidDistribution);
  EXPECT_NO_THROW(expectation(dist(0, 0.5, 0.5, 5e-10)));
}

TEST(chsh_from_triple, examples) {
  EXPECT_EQ(chsh_from_triple({1, 0, 0}), -4.0);
  EXPECT_EQ(chsh_from_triple({0, 0, 0}), -2.0);
  EXPECT_NEAR(chsh_from_triple({0.262144, 0.004096, 0.000064}), -2.507776, 1e-12);
}

TEST(classify_violation, examples) {
  EXPECT_EQ(classify_violation({1, 0, 0}).verdict, Verdict::ViolatesChsh);
  EXPECT_EQ(classify_violation({0.262144, 0.004096, 0.000064}).verdict, Verdict::ViolatesChsh);
  for (double p : {0.0, 0.3, 0.9, 1.0}) {
    for (double pp : {0.0, 0.1, 0.3}) {
      if (pp > p) continue;
      EXPECT_EQ(classify_violation({p, 0.5 * (p + pp), pp}).verdict, Verdict::NoViolation);
    }
  }
}

TEST(classify_violation, error_aware) {
  const NonDetectionTriple edge{0.0, 0.5012, 1.0};
  EXPECT_EQ(classify_violation(edge).verdict, Verdict::ViolatesChsh);
  EXPECT_TRUE(classify_violation(edge).second_branch);
  EXPECT_EQ(classify_violation(edge, {0.0, 0.0011, 0.0}, 4.0).verdict, Verdict::NoViolation);
  EXPECT_EQ(classify_violation(edge, {0.0, 0.0, 0.0}, 4.0).verdict, Verdict::ViolatesChsh);
  const NonDetectionTriple clear{0.262144, 0.004096, 0.000064};
  EXPECT_EQ(classify_violation(clear, {0.001, 0.001, 0.001}, 4.0).verdict, Verdict::ViolatesChsh);
}

TEST(classify_violation, matches_chsh_bound_on_random_triples) {
  std::mt19937_64 rng(20240611);
  for (int i = 0; i < 10000; ++i) {
    const NonDetectionTriple t = random_triple(rng);
    const bool violated = std::abs(chsh_from_triple(t)) > 2.0;
    EXPECT_EQ(classify_violation(t).verdict == Verdict::ViolatesChsh, violated)
        << t.p << " " << t.p_prime << " " << t.p_double_prime;
  }
}

TEST(chsh_from_triple, agrees_with_expectation_path_for_any_split) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const NonDetectionTriple t = random_triple(rng);
    const std::array<double, 4> share{u(rng), u(rng), u(rng), u(rng)};
    const double direct = chsh_from_triple(t);
    ASSERT_NEAR(direct, oracle_chsh(t, share), 1e-12);
    const ChshReport r = analyze(distributions_from_triple(t, share));
    ASSERT_NEAR(r.chsh_value, direct, 1e-12);
    ASSERT_NEAR(r.signaling_aggregate, marginal_aggregate(t), 1e-12);
  }
}

TEST(marginal_aggregate, arithmetic_mean_law) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 10000; ++i) {
    NonDetectionTriple t = random_triple(rng);
    t.p_prime = 0.5 * (t.p + t.p_double_prime);
    ASSERT_NEAR(marginal_aggregate(t), 0.0, 1e-15);
    ASSERT_NEAR(std::abs(chsh_from_triple(t)), 2.0 * std::abs(2.0 * t.p_double_prime - 1.0), 1e-12);
    ASSERT_LE(std::abs(chsh_from_triple(t)), 2.0 + 1e-12);
  }
}

TEST(marginal_aggregate, geometric_mean_law) {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 10000; ++i) {
    NonDetectionTriple t = random_triple(rng);
    t.p_prime = std::sqrt(t.p * t.p_double_prime);
    const double expected = -std::pow(std::sqrt(t.p) - std::sqrt(t.p_double_prime), 2);
    ASSERT_NEAR(marginal_aggregate(t), expected, 1e-12);
    ASSERT_LE(marginal_aggregate(t), 1e-15);
  }
  EXPECT_EQ(marginal_aggregate({0.25, 0.25, 0.25}), 0.0);
}

TEST(marginal_aggregate, example) {
  EXPECT_NEAR(marginal_aggregate({0.262144, 0.004096, 0.000064}), -0.254016, 1e-12);
}

TEST(marginals, examples) {
  const Marginals ab = marginals(dist(0, 0.5, 0.5, 0));
  EXPECT_EQ(ab.alice_1, 0.5);
  EXPECT_EQ(ab.alice_2, 0.5);
  EXPECT_EQ(ab.bob_1, 0.5);
  EXPECT_EQ(ab.bob_2, 0.5);
  const Marginals abp = marginals(dist(1, 0, 0, 0));
  EXPECT_EQ(abp.alice_1, 1.0);
  EXPECT_EQ(abp.alice_2, 0.0);
  EXPECT_EQ(abp.bob_1, 1.0);
  EXPECT_EQ(abp.bob_2, 0.0);
  const Marginals u = marginals(dist(0.25, 0.25, 0.25, 0.25));
  EXPECT_EQ(u.alice_1, 0.5);
  EXPECT_EQ(u.bob_2, 0.5);
}

TEST(marginal_report, vessels) {
  const SettingTable t = vessels_scenario();
  const MarginalReport r = marginal_report(t);
  EXPECT_EQ(r[Residual::A1], -0.5);
  EXPECT_TRUE(r.violates);
  EXPECT_EQ(r.aggregate, -1.0);
}

TEST(marginal_report, identical_tables_have_no_residuals) {
  std::vector<OutcomeDistribution> ds;
  for (auto s : kAllSettings) ds.push_back(dist(0.1, 0.2, 0.3, 0.4, s));
  const MarginalReport r = marginal_report(ds);
  for (double x : r.residuals) EXPECT_EQ(x, 0.0);
  EXPECT_EQ(r.aggregate, 0.0);
  EXPECT_FALSE(r.violates);
}

TEST(marginal_report, label_errors) {
  std::vector<OutcomeDistribution> ds;
  for (auto s : kAllSettings) ds.push_back(dist(0.1, 0.2, 0.3, 0.4, s));
  ds[3].setting = Setting::AB;
  EXPECT_THROW(marginal_report(ds), ConfigError);
  ds.pop_back();
  EXPECT_THROW(marginal_report(ds), ConfigError);
}

TEST(order_by_setting, accepts_any_order) {
  std::vector<OutcomeDistribution> ds;
  for (int i = 3; i >= 0; --i) ds.push_back(dist(0, 0.5, 0.5, 0, kAllSettings[i]));
  const SettingTable t = order_by_setting(ds);
  for (auto s : kAllSettings) EXPECT_EQ(t[index_of(s)].setting, s);
}

TEST(analyze, vessels) {
  const SettingTable t = vessels_scenario();
  EXPECT_EQ(t[index_of(Setting::AB)].p12, 0.5);
  EXPECT_EQ(t[index_of(Setting::AB)].p21, 0.5);
  EXPECT_EQ(t[index_of(Setting::APrimeBPrime)].p11, 1.0);
  const ChshReport r = analyze(t);
  EXPECT_EQ(r.chsh_value, 4.0);
  EXPECT_TRUE(r.violates_chsh);
  EXPECT_TRUE(r.violates_marginals);
  EXPECT_EQ(r.sign_convention, SignConvention::MinusOnAB);
}

TEST(chsh, bounded_and_strict) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const ExpectationQuad e{u(rng), u(rng), u(rng), u(rng)};
    for (auto c : kAllConventions) ASSERT_LE(std::abs(chsh(e, c)), 4.0);
  }
  // |CHSH| = 2 is not a violation.
  const NonDetectionTriple edge{1.0, 0.5, 0.0};
  EXPECT_EQ(chsh_from_triple(edge), -2.0);
  EXPECT_EQ(classify_violation(edge).verdict, Verdict::NoViolation);
}

TEST(chsh, conventions_move_the_minus_sign) {
  const ExpectationQuad e{0.1, 0.2, 0.3, 0.4};
  EXPECT_NEAR(chsh(e, SignConvention::MinusOnAB), -0.1 + 0.2 + 0.3 + 0.4, 1e-15);
  EXPECT_NEAR(chsh(e, SignConvention::MinusOnABPrime), 0.1 - 0.2 + 0.3 + 0.4, 1e-15);
  EXPECT_NEAR(chsh(e, SignConvention::MinusOnAPrimeB), 0.1 + 0.2 - 0.3 + 0.4, 1e-15);
  EXPECT_NEAR(chsh(e, SignConvention::MinusOnAPrimeBPrime), 0.1 + 0.2 + 0.3 - 0.4, 1e-15);
}

TEST(chsh, max_abs_invariant_under_relabeling) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const ExpectationQuad e{u(rng), u(rng), u(rng), u(rng)};
    // A <-> A': E(A,B) <-> E(A',B), E(A,B') <-> E(A',B')
    const ExpectationQuad swap_a{e.e_aprime_b, e.e_aprime_bprime, e.e_ab, e.e_ab_prime};
    // B <-> B': E(A,B) <-> E(A,B'), E(A',B) <-> E(A',B')
    const ExpectationQuad swap_b{e.e_ab_prime, e.e_ab, e.e_aprime_bprime, e.e_aprime_b};
    ASSERT_NEAR(max_abs_chsh(e), max_abs_chsh(swap_a), 1e-15);
    ASSERT_NEAR(max_abs_chsh(e), max_abs_chsh(swap_b), 1e-15);
  }
}

TEST(non_detection_triple, ordering_is_advisory) {
  const NonDetectionTriple t{0.1, 0.2, 0.3};
  EXPECT_FALSE(t.ordering_ok());
  EXPECT_NO_THROW(t.validate());
  EXPECT_THROW((NonDetectionTriple{1.1, 0, 0}.validate()), InvalidDistribution);
}

TEST(outcome_distribution, single_entity_has_no_coincidences) {
  const auto d = OutcomeDistribution::single_entity(Setting::APrimeB, 0.3, 0.5, 0.2);
  EXPECT_EQ(d.p11, 0.0);
  EXPECT_EQ(d.p12, 0.3);
  EXPECT_EQ(d.p21, 0.5);
  EXPECT_EQ(d.p22, 0.2);
  EXPECT_EQ(d.setting, Setting::APrimeB);
}
