#pragma once

#include <cmath>
#include <cstdint>

namespace bellsim {

/// Threshold, in joint standard errors, beyond which the A'B and AB' estimates are
/// reported as asymmetric.
inline constexpr double kSymmetrySigma = 5.0;

struct PooledEstimate {
  double value = 0.0;
  double std_error = 0.0;
  /// |p_a - p_b| / sqrt(se_a^2 + se_b^2); zero when both errors vanish and the values agree.
  double z = 0.0;
  bool symmetric = true;
};

/// Pools two binomial counts that estimate the same probability (the A'B and AB' settings).
inline PooledEstimate pool_symmetric(std::uint64_t hits_a, std::uint64_t trials_a, std::uint64_t hits_b,
                                     std::uint64_t trials_b, double max_sigma = kSymmetrySigma) {
  const auto na = static_cast<double>(trials_a);
  const auto nb = static_cast<double>(trials_b);
  const double pa = static_cast<double>(hits_a) / na;
  const double pb = static_cast<double>(hits_b) / nb;
  const double joint = std::sqrt(pa * (1.0 - pa) / na + pb * (1.0 - pb) / nb);

  PooledEstimate out;
  const double n = na + nb;
  out.value = static_cast<double>(hits_a + hits_b) / n;
  out.std_error = std::sqrt(out.value * (1.0 - out.value) / n);
  const double diff = std::abs(pa - pb);
  if (joint > 0.0) {
    out.z = diff / joint;
    out.symmetric = out.z <= max_sigma;
  } else {
    out.z = 0.0;
    out.symmetric = diff == 0.0;
  }
  return out;
}

}  // namespace bellsim
