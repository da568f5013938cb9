#include "bellsim/classical_montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "bellsim/errors.hpp"
#include "bellsim/pooling.hpp"

namespace bellsim {

namespace {

struct NoLog {
  void push(const InteractionEvent&) {}
};

struct VectorLog {
  std::vector<InteractionEvent>* events;
  void push(const InteractionEvent& e) { events->push_back(e); }
};

template <typename Log>
TrialOutcome run_trial(const ClassicalScreen& alice, const ClassicalScreen& bob, const TimingConfig& timing,
                       SplitMix64& rng, Direction& direction, std::int64_t& absorbed_at, Log log) {
  direction = rng.uniform() < 0.5 ? Direction::TowardAlice : Direction::TowardBob;
  ScreenSide side = direction == Direction::TowardAlice ? ScreenSide::Alice : ScreenSide::Bob;
  const double half_flight = timing.half_flight();
  const double d_alice = alice.detection();
  const double d_bob = bob.detection();
  absorbed_at = -1;

  for (std::int64_t m = 1; timing.not_after_end(m); m += 2) {
    const double detection = side == ScreenSide::Alice ? d_alice : d_bob;
    const bool detected = rng.uniform() < detection;
    const bool in_window = timing.contains(m);
    log.push(InteractionEvent{m, static_cast<double>(m) * half_flight, side,
                              detected ? Interaction::Detected : Interaction::Reflected, in_window});
    if (detected) {
      absorbed_at = m;
      if (!in_window) return TrialOutcome::NeitherDetected;
      return side == ScreenSide::Alice ? TrialOutcome::AliceDetected : TrialOutcome::BobDetected;
    }
    side = side == ScreenSide::Alice ? ScreenSide::Bob : ScreenSide::Alice;
  }
  return TrialOutcome::NeitherDetected;
}

// Cell index in p11, p12, p21, p22 order.
std::size_t cell_of(TrialOutcome o) {
  switch (o) {
    case TrialOutcome::AliceDetected:
      return 1;
    case TrialOutcome::BobDetected:
      return 2;
    case TrialOutcome::NeitherDetected:
      return 3;
  }
  return 3;
}

std::array<std::uint64_t, 4> count_range(const ClassicalScreen& alice, const ClassicalScreen& bob,
                                         const TimingConfig& timing, std::uint64_t master_seed,
                                         std::uint64_t stream, std::uint64_t begin, std::uint64_t end) {
  std::array<std::uint64_t, 4> counts{};
  Direction dir{};
  std::int64_t absorbed_at = 0;
  for (std::uint64_t i = begin; i < end; ++i) {
    SplitMix64 rng(substream_seed(master_seed, stream, i));
    ++counts[cell_of(run_trial(alice, bob, timing, rng, dir, absorbed_at, NoLog{}))];
  }
  return counts;
}

McEstimate finish(Setting setting, std::uint64_t trials, const std::array<std::uint64_t, 4>& counts) {
  McEstimate est;
  est.trial_count = trials;
  est.counts = counts;
  const auto n = static_cast<double>(trials);
  std::array<double, 4> p{};
  for (std::size_t k = 0; k < 4; ++k) {
    p[k] = static_cast<double>(counts[k]) / n;
    est.std_errors[k] = std::sqrt(p[k] * (1.0 - p[k]) / n);
  }
  est.distribution = OutcomeDistribution{p[0], p[1], p[2], p[3], setting};
  return est;
}

}  // namespace

TrialRecord simulate_trial(const ClassicalScreen& alice, const ClassicalScreen& bob,
                           const TimingConfig& timing, SplitMix64& rng) {
  timing.validate();
  TrialRecord rec;
  std::int64_t absorbed_at = -1;
  rec.outcome = run_trial(alice, bob, timing, rng, rec.emission_direction, absorbed_at,
                          VectorLog{&rec.interaction_log});
  if (rec.outcome != TrialOutcome::NeitherDetected) {
    rec.outcome_time = static_cast<double>(absorbed_at) * timing.half_flight();
  }
  return rec;
}

McEstimate estimate_distribution(const ClassicalScreen& alice, const ClassicalScreen& bob,
                                 const TimingConfig& timing, std::uint64_t trials, std::uint64_t master_seed,
                                 Setting setting, unsigned threads) {
  if (trials == 0) throw ConfigError("trial count must be >= 1", "mc.trials");
  timing.validate();
  const std::uint64_t stream = index_of(setting);
  const unsigned workers = static_cast<unsigned>(std::clamp<std::uint64_t>(threads, 1, trials));

  std::array<std::uint64_t, 4> total{};
  if (workers == 1) {
    total = count_range(alice, bob, timing, master_seed, stream, 0, trials);
  } else {
    std::vector<std::array<std::uint64_t, 4>> partial(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      const std::uint64_t begin = trials * w / workers;
      const std::uint64_t end = trials * (w + 1) / workers;
      pool.emplace_back([&, w, begin, end] {
        partial[w] = count_range(alice, bob, timing, master_seed, stream, begin, end);
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& c : partial) {
      for (std::size_t k = 0; k < 4; ++k) total[k] += c[k];
    }
  }
  return finish(setting, trials, total);
}

McTriple estimate_triple(const ClassicalScreen& standard, const ClassicalScreen& efficient,
                         const TimingConfig& timing, std::uint64_t trials_per_setting,
                         std::uint64_t master_seed, unsigned threads) {
  McTriple out;
  const auto run = [&](const ClassicalScreen& a, const ClassicalScreen& b, Setting s) {
    out.settings[index_of(s)] = estimate_distribution(a, b, timing, trials_per_setting, master_seed, s, threads);
  };
  run(standard, standard, Setting::AB);
  run(efficient, standard, Setting::APrimeB);
  run(standard, efficient, Setting::ABPrime);
  run(efficient, efficient, Setting::APrimeBPrime);

  const auto& ab = out.settings[index_of(Setting::AB)];
  const auto& apb = out.settings[index_of(Setting::APrimeB)];
  const auto& abp = out.settings[index_of(Setting::ABPrime)];
  const auto& apbp = out.settings[index_of(Setting::APrimeBPrime)];

  const PooledEstimate pooled =
      pool_symmetric(apb.counts[3], apb.trial_count, abp.counts[3], abp.trial_count);
  out.triple = NonDetectionTriple{ab.distribution.p22, pooled.value, apbp.distribution.p22};
  out.std_errors = {ab.std_errors[3], pooled.std_error, apbp.std_errors[3]};
  out.symmetry_ok = pooled.symmetric;
  out.symmetry_z = pooled.z;
  return out;
}

}  // namespace bellsim
