#include <bit>
#include <cmath>

#include <gtest/gtest.h>

#include "flare/attacker.hpp"
#include "flare/campaign.hpp"
#include "flare/scenario.hpp"

namespace {

using namespace flare;
using namespace std::chrono_literals;

TEST(FlipProbability, FormulaPoints) {
  PowerWasterConfig cfg;
  cfg.p_max = 0.1;
  EXPECT_DOUBLE_EQ(bit_flip_probability(cfg), 0.05);
  cfg.count = 0;
  EXPECT_EQ(bit_flip_probability(cfg), 0.0);
  cfg.count = 16000;
  cfg.toggle_freq_hz = 5e4;
  EXPECT_EQ(bit_flip_probability(cfg), 0.0);
  cfg.toggle_freq_hz = 1e5;
  EXPECT_DOUBLE_EQ(bit_flip_probability(cfg), 0.05);
  cfg.toggle_freq_hz = 1e6;
  EXPECT_DOUBLE_EQ(bit_flip_probability(cfg), 0.05);
  cfg.toggle_freq_hz = 1.000001e6;
  EXPECT_EQ(bit_flip_probability(cfg), 0.0);
}

TEST(FlipProbability, KindDoesNotMatter) {
  PowerWasterConfig a, b;
  b.kind = WasterKind::SelfClockedRo;
  EXPECT_EQ(bit_flip_probability(a), bit_flip_probability(b));
}

TEST(FlipProbability, DefaultCeilingIsLowered) {
  EXPECT_DOUBLE_EQ(bit_flip_probability(PowerWasterConfig{}), 0.0025);
}

TEST(PowerWasterConfig, Validation) {
  PowerWasterConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.count = 16001;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.duty = 1.5;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.p_max = -0.1;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.toggle_freq_hz = -1;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(PlanActivation, DefaultTiming) {
  const auto plan = plan_activation({3, 4}, 10ns, 4, 200000ns);
  EXPECT_EQ(plan.target_word_span, (WordRange{0, 8}));
  EXPECT_EQ(plan.glitch_start, 0ns);
  EXPECT_EQ(plan.glitch_end, 90ns);
  EXPECT_EQ(plan.exposure, 200000ns);
  EXPECT_EQ(plan.activation_start, 0ns);
  EXPECT_EQ(plan.activation_end(), 200000ns);
}

TEST(PlanActivation, NoGuard) {
  const auto plan = plan_activation({3, 4}, 10ns, 0, 200000ns);
  EXPECT_EQ(plan.target_word_span, (WordRange{3, 4}));
  EXPECT_EQ(plan.glitch_start, 30ns);
  EXPECT_EQ(plan.glitch_end, 50ns);
}

TEST(PlanActivation, ExposureEqualToGlitch) {
  const auto plan = plan_activation({10, 11}, 10ns, 2, 60ns);
  EXPECT_EQ(plan.glitch_start, 80ns);
  EXPECT_EQ(plan.glitch_end, 140ns);
  EXPECT_EQ(plan.activation_start, plan.glitch_start);
  EXPECT_EQ(plan.activation_end(), plan.glitch_end);
}

TEST(PlanActivation, ShortExposureRejected) {
  EXPECT_THROW(plan_activation({3, 4}, 10ns, 4, 89ns), ConfigError);
}

TEST(PlanActivation, GlitchInsideActivationProperty) {
  std::mt19937 rng(1);
  for (int i = 0; i < 20000; ++i) {
    const std::size_t first = rng() % 200;
    const WordRange span{first, first + rng() % 4};
    const Nanos period{1 + rng() % 50};
    const std::size_t guard = rng() % 10;
    const Nanos glitch = period * static_cast<std::int64_t>(span.size() + 2 * guard);
    const Nanos exposure = glitch + Nanos{rng() % 100000};
    const auto p = plan_activation(span, period, guard, exposure);
    ASSERT_EQ(p.exposure, exposure);
    ASSERT_GE(p.glitch_start, p.activation_start);
    ASSERT_LE(p.glitch_end, p.activation_end());
    ASSERT_GE(p.activation_start, 0ns);
  }
}

TEST(Inject, IdentityOutsideGlitch) {
  const auto plan = plan_activation({3, 4}, 10ns, 0, 1000ns);
  FaultRng rng(1);
  EXPECT_EQ(inject(0x12345678u, 29ns, plan, 1.0, rng), 0x12345678u);
  EXPECT_EQ(inject(0x12345678u, 50ns, plan, 1.0, rng), 0x12345678u);
}

TEST(Inject, CertainFlipComplements) {
  const auto plan = plan_activation({3, 4}, 10ns, 0, 1000ns);
  FaultRng rng(1);
  EXPECT_EQ(inject(0x12345678u, 30ns, plan, 1.0, rng), ~0x12345678u);
  EXPECT_EQ(inject(0u, 49ns, plan, 1.0, rng), 0xFFFFFFFFu);
}

TEST(Inject, ZeroProbabilityIsIdentity) {
  const auto plan = plan_activation({3, 4}, 10ns, 0, 1000ns);
  FaultRng rng(5);
  for (Word w = 0; w < 1000; ++w) ASSERT_EQ(inject(w * 0x9E3779B9u, 30ns, plan, 0.0, rng), w * 0x9E3779B9u);
}

TEST(Inject, SeedFortyTwoRegression) {
  const auto plan = plan_activation({3, 4}, 10ns, 4, 200000ns);
  FaultRng a(42), b(42);
  const Word first = inject(0x01000000u, 40ns, plan, 0.05, a);
  EXPECT_EQ(first, inject(0x01000000u, 40ns, plan, 0.05, b));
  EXPECT_EQ(first, 0x01202000u);  // pinned: bits 21 and 13 flip
}

TEST(Inject, LocalityMean) {
  const auto plan = plan_activation({3, 4}, 10ns, 4, 200000ns);
  constexpr double p = 0.05;
  constexpr int trials = 20000;
  std::uint64_t flips = 0;
  for (int t = 0; t < trials; ++t) {
    FaultRng rng(trial_seed(7, static_cast<std::uint64_t>(t)));
    for (std::size_t i = 0; i < 20; ++i) {
      const Nanos at = 10ns * static_cast<std::int64_t>(i);
      flips += static_cast<std::uint64_t>(std::popcount(inject(0u, at, plan, p, rng)));
    }
  }
  const double expected = p * 32 * static_cast<double>(plan.target_word_span.size());
  const double mean = static_cast<double>(flips) / trials;
  EXPECT_NEAR(mean, expected, 0.05 * expected);
}

// Misroute rate against the waster count and duty, everything else at defaults.
// Neighbouring grid points differ by about 0.005 in misroute rate, so 20000
// trials keep sampling noise well below that gap.
constexpr std::uint64_t kGridTrials = 20000;

double misroute_rate(std::uint32_t count, double duty) {
  auto cfg = default_scenario();
  cfg.waster.count = count;
  cfg.waster.duty = duty;
  const PreparedScenario sc(cfg);
  return summarize(run_campaign(sc, 2024, kGridTrials, 1)).misroute_rate();
}

TEST(Effectiveness, MonotonicInCount) {
  const double r1 = misroute_rate(4000, 0.5), r2 = misroute_rate(8000, 0.5), r3 = misroute_rate(16000, 0.5);
  EXPECT_LE(r1, r2);
  EXPECT_LE(r2, r3);
  EXPECT_GT(r1, 0.0);
}

TEST(Effectiveness, MonotonicInDuty) {
  const double r1 = misroute_rate(16000, 0.125), r2 = misroute_rate(16000, 0.25), r3 = misroute_rate(16000, 0.5);
  EXPECT_LE(r1, r2);
  EXPECT_LE(r2, r3);
}

// With FAR 0x01000000 on 8 PRRs x 1024 frames, a trial misroutes exactly when
// no bit flips in the other 8 target words or in FAR bits 10..23 and 27..31,
// and at least one of the 13 remaining FAR bits flips.
TEST(Effectiveness, MisrouteRateMatchesClosedForm) {
  const PreparedScenario sc(default_scenario());
  ASSERT_EQ(sc.plan().target_word_span.size(), 9u);
  const double p = sc.p_bit();
  const double expected = std::pow(1 - p, 8 * 32 + 19) * (1 - std::pow(1 - p, 13));
  const double got = summarize(run_campaign(sc, 31, kGridTrials, 1)).misroute_rate();
  const double sigma = std::sqrt(expected * (1 - expected) / kGridTrials);
  EXPECT_NEAR(got, expected, 4 * sigma);
}

}  // namespace
