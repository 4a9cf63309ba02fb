#include "scm/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

namespace scm {
namespace {

TEST(Quantile, LinearInterpolationBetweenOrderStatistics) {
  const std::vector<double> x = {4.0, 1.0, 3.0, 2.0, 5.0};
  EXPECT_DOUBLE_EQ(quantile(x, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile(x, 1.0), 5.0);
  EXPECT_DOUBLE_EQ(quantile(x, 0.5), 3.0);
  // h = 4 * 0.1 = 0.4 -> 1 + 0.4 * (2 - 1)
  EXPECT_DOUBLE_EQ(quantile(x, 0.1), 1.4);
  EXPECT_DOUBLE_EQ(quantile(x, 0.975), 4.9);
}

TEST(Quantile, ConstantSampleReturnsConstant) {
  const std::vector<double> x(17, 2.5);
  for (double p : {0.0, 0.025, 0.5, 0.975, 1.0}) EXPECT_EQ(quantile(x, p), 2.5);
}

TEST(Quantile, RejectsBadInput) {
  EXPECT_THROW(quantile(std::vector<double>{}, 0.5), std::invalid_argument);
  EXPECT_THROW(quantile(std::vector<double>{1.0}, 1.5), std::invalid_argument);
}

TEST(Moments, MeanAndSampleSd) {
  const std::vector<double> x = {8.0, 10.0, 12.0};
  EXPECT_DOUBLE_EQ(mean(x), 10.0);
  EXPECT_DOUBLE_EQ(sample_sd(x), 2.0);
  EXPECT_THROW(sample_sd(std::vector<double>{1.0}), std::invalid_argument);
}

TEST(GammaLogPdf, ShapeTenRateTenAtOne) {
  const double expected = 10.0 * std::log(10.0) - std::lgamma(10.0) - 10.0;
  EXPECT_NEAR(gamma_log_pdf(1.0, 10.0, 10.0), expected, 1e-12);
}

TEST(UniformSdLogPdf, ChangeOfVariables) {
  // sigma ~ U(0, 10): p(tau) = (1/10) * (1/2) tau^{-3/2} on tau > 1/100.
  EXPECT_NEAR(uniform_sd_log_pdf(4.0, 10.0), -std::log(10.0) - std::log(2.0) - 1.5 * std::log(4.0), 1e-12);
  EXPECT_EQ(uniform_sd_log_pdf(0.005, 10.0), -std::numeric_limits<double>::infinity());
  // Integrates to one over (1/U^2, inf): check by substitution tau = 1/s^2 numerically.
  double total = 0.0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    const double s = (k + 0.5) * 10.0 / n;
    const double tau = 1.0 / (s * s);
    total += std::exp(uniform_sd_log_pdf(tau, 10.0)) * 2.0 / (s * s * s) * (10.0 / n);
  }
  EXPECT_NEAR(total, 1.0, 1e-3);
}

TEST(EffectiveSampleSize, IndependentDrawsNearN) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  std::vector<double> x(4000);
  for (auto& v : x) v = normal(rng);
  const double ess = effective_sample_size(x);
  EXPECT_GT(ess, 3000.0);
  EXPECT_LT(ess, 5000.0);
}

TEST(EffectiveSampleSize, AutocorrelatedChainIsSmaller) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal;
  std::vector<double> x(4000);
  double prev = 0.0;
  for (auto& v : x) prev = v = 0.9 * prev + normal(rng);
  // AR(1) with phi = 0.9: n (1 - phi) / (1 + phi) ~ 210.
  const double ess = effective_sample_size(x);
  EXPECT_GT(ess, 120.0);
  EXPECT_LT(ess, 350.0);
}

}  // namespace
}  // namespace scm
