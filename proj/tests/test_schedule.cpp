#include "descent/schedule.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace descent;

TEST(Schedule, FactoriesValidate) {
  EXPECT_THROW(AlphaRule::fixed(0.0), std::invalid_argument);
  EXPECT_THROW(AlphaRule::power_law(0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(AlphaRule::power_law(1.0, 0.0), std::invalid_argument);
  EXPECT_THROW(AlphaRule::power_law(1.0, 1.5), std::invalid_argument);
  EXPECT_THROW(BetaRule::power_law(-1.0, 1.0), std::invalid_argument);
}

TEST(Schedule, ClosedFormValues) {
  EXPECT_EQ(alpha_at(AlphaRule::fixed(0.25), 1), 0.25);
  EXPECT_EQ(alpha_at(AlphaRule::fixed(0.25), 1000), 0.25);
  EXPECT_EQ(alpha_at(AlphaRule::power_law(1.0, 0.8), 1), 1.0);
  EXPECT_NEAR(alpha_at(AlphaRule::power_law(1.0, 0.8), 2), std::pow(2.0, -0.8), 1e-15);
  EXPECT_NEAR(beta_at(BetaRule::power_law(0.5, 1.0), 10), 0.05, 1e-15);
  EXPECT_EQ(beta_at(BetaRule::zero(), 3), 0.0);
  EXPECT_THROW(alpha_at(AlphaRule::exact_line_search(), 1), std::invalid_argument);
  EXPECT_THROW(alpha_at(AlphaRule::fixed(1.0), 0), std::invalid_argument);
}

TEST(Schedule, ValidateScheduleVerdicts) {
  ScheduleSpec power{AlphaRule::power_law(1.0, 0.8), BetaRule::zero()};
  auto r = validate_schedule(power);
  EXPECT_TRUE(r.alpha_to_zero);
  EXPECT_TRUE(r.alpha_sum_diverges);
  EXPECT_TRUE(r.beta_to_zero);

  ScheduleSpec fixed{AlphaRule::fixed(0.25), BetaRule::step_ratio()};
  r = validate_schedule(fixed);
  EXPECT_FALSE(r.alpha_to_zero);
  EXPECT_TRUE(r.alpha_sum_diverges);
  EXPECT_FALSE(r.beta_to_zero);

  // Harmonic schedule: gamma = 1 still diverges.
  ScheduleSpec harmonic{AlphaRule::power_law(2.0, 1.0), BetaRule::power_law(0.5, 1.0)};
  r = validate_schedule(harmonic);
  EXPECT_TRUE(r.alpha_to_zero);
  EXPECT_TRUE(r.alpha_sum_diverges);
  EXPECT_TRUE(r.beta_to_zero);
}

TEST(Schedule, VerdictsMatchPartialSumProbes) {
  // Whenever divergence is reported, the partial sum at k = 1e6 exceeds 10.
  const AlphaRule probes[] = {AlphaRule::fixed(0.25), AlphaRule::power_law(1.0, 1.0),
                              AlphaRule::power_law(1.0, 0.8), AlphaRule::power_law(0.5, 0.6)};
  for (const AlphaRule& rule : probes) {
    const auto report = validate_schedule({rule, BetaRule::zero()});
    if (!report.alpha_sum_diverges) continue;
    long double sum = 0.0L;
    for (std::int64_t k = 1; k <= 1000000; ++k) sum += alpha_at(rule, k);
    EXPECT_GT(static_cast<double>(sum), 10.0) << rule.name();
  }
}
