#include "descent/noise.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace descent;

TEST(NoiseSpec, FactoriesValidate) {
  EXPECT_THROW(NoiseSpec::uniform(0.0, 4.0, 1), std::invalid_argument);
  EXPECT_THROW(NoiseSpec::uniform(1.0, 2.0, 1), std::invalid_argument);  // q must exceed 2
  EXPECT_THROW(NoiseSpec::student_t(2.0, 1.0, 4.0, 1), std::invalid_argument);
  // Finite q-th moment needs dof > q.
  EXPECT_THROW(NoiseSpec::student_t(4.0, 1.0, 4.0, 1), std::invalid_argument);
  EXPECT_NO_THROW(NoiseSpec::student_t(5.0, 1.0, 4.0, 1));
}

TEST(Noise, ZeroFamilyAlwaysZero) {
  const NoiseSpec spec = NoiseSpec::zero(3);
  RngState state{42, 0};
  for (int i = 0; i < 10; ++i) {
    auto [xi, next] = sample(spec, state);
    EXPECT_EQ(xi.norm(), 0.0);
    EXPECT_GT(next.counter, state.counter);  // state strictly advances
    state = next;
  }
}

TEST(Noise, UniformStaysInRange) {
  const NoiseSpec spec = NoiseSpec::uniform(1.0, 4.0, 2);
  RngState state{7, 0};
  for (int i = 0; i < 10000; ++i) {
    auto [xi, next] = sample(spec, state);
    state = next;
    EXPECT_LE(xi.cwiseAbs().maxCoeff(), 1.0);
  }
}

TEST(Noise, UniformSampleMeanWithinCltBound) {
  // sigma = 1/sqrt(3); over 1e6 draws the mean must sit within 4 sigma/1e3.
  const NoiseSpec spec = NoiseSpec::uniform(1.0, 4.0, 1);
  RngState state{123, 0};
  long double acc = 0.0L;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    auto [xi, next] = sample(spec, state);
    state = next;
    acc += xi[0];
  }
  const double mean = static_cast<double>(acc / n);
  EXPECT_LE(std::abs(mean), 4.0 * (1.0 / std::sqrt(3.0)) / 1000.0);
}

TEST(Noise, DeterministicStreams) {
  const NoiseSpec spec = NoiseSpec::student_t(5.0, 1.0, 4.0, 2);
  RngState a{99, 0}, b{99, 0};
  for (int i = 0; i < 100; ++i) {
    auto [xa, na] = sample(spec, a);
    auto [xb, nb] = sample(spec, b);
    EXPECT_EQ(xa, xb);
    EXPECT_EQ(na.counter, nb.counter);
    a = na;
    b = nb;
  }
}

TEST(Noise, SubstreamsAreOrderIndependent) {
  const NoiseSpec spec = NoiseSpec::uniform(1.0, 4.0, 1);
  const auto draw = [&](std::uint64_t k) { return sample(spec, substream(5, k)).first[0]; };
  const double x3 = draw(3);
  const double x1 = draw(1);
  EXPECT_EQ(draw(3), x3);  // unaffected by having drawn k=1 in between
  EXPECT_NE(x1, x3);
}

TEST(Noise, EmpiricalMomentsOfUniform) {
  // E|xi|^2 = 1/3 and E|xi|^4 = 1/5 for U[-1,1].
  const NoiseSpec spec = NoiseSpec::uniform(1.0, 4.0, 1);
  const auto m2 = empirical_moment(spec, 2.0, 1000000, 17);
  const auto m4 = empirical_moment(spec, 4.0, 1000000, 17);
  EXPECT_NEAR(m2.value, 1.0 / 3.0, 0.01);
  EXPECT_NEAR(m4.value, 1.0 / 5.0, 0.01);
  EXPECT_FALSE(m2.diverges);
  EXPECT_GT(m2.value, m4.value);  // |xi| <= 1 makes moments decrease in order
}

TEST(Noise, EmpiricalMomentOfZeroIsZero) {
  EXPECT_EQ(empirical_moment(NoiseSpec::zero(2), 2.0, 1000, 1).value, 0.0);
  EXPECT_EQ(empirical_moment(NoiseSpec::zero(2), 6.0, 1000, 1).value, 0.0);
}

TEST(Noise, EmpiricalMomentRequiresEnoughSamples) {
  EXPECT_THROW(empirical_moment(NoiseSpec::zero(1), 2.0, 999, 1), std::invalid_argument);
}

TEST(Noise, StudentTMomentsFiniteBelowDofDivergentAbove) {
  const NoiseSpec spec = NoiseSpec::student_t(5.0, 1.0, 4.0, 1);

  // Order-4 moment exists (population value 3 nu^2 / ((nu-2)(nu-4)) = 25);
  // the halves at n = 1e5 and n = 1e6 agree within 20%.
  const auto small = empirical_moment(spec, 4.0, 100000, 2024);
  const auto large = empirical_moment(spec, 4.0, 1000000, 2024);
  EXPECT_FALSE(large.diverges);
  EXPECT_TRUE(std::isfinite(large.value));
  EXPECT_LT(std::abs(large.value - small.value) / large.value, 0.2);

  // Order-6 moment does not exist for nu = 5: flagged.
  EXPECT_TRUE(empirical_moment(spec, 6.0, 100000, 2024).diverges);
}

TEST(Noise, StudentTZeroMeanWithinFiveStandardErrors) {
  // sigma^2 = nu/(nu-2) = 5/3.
  const NoiseSpec spec = NoiseSpec::student_t(5.0, 1.0, 4.0, 1);
  RngState state{314, 0};
  long double acc = 0.0L;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    auto [xi, next] = sample(spec, state);
    state = next;
    acc += xi[0];
  }
  const double mean = static_cast<double>(acc / n);
  const double se = std::sqrt(5.0 / 3.0) / 1000.0;
  EXPECT_LE(std::abs(mean), 5.0 * se);
}
