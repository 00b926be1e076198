#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "catbox/acquisition.hpp"
#include "oracles.hpp"

using namespace catbox;

namespace {

Posterior post(double mean, double sd) {
  Posterior p;
  p.mean = mean;
  p.var = sd * sd;
  return p;
}

double ei(double mu, double sd, double best, double xi = 0.0) {
  return score({AcqKind::EI, xi, 2.0, best}, post(mu, sd));
}

}  // namespace

TEST(GaussianFunctions, ReferenceValues) {
  EXPECT_DOUBLE_EQ(gaussian_cdf(0.0), 0.5);
  EXPECT_NEAR(gaussian_pdf(0.0), 1.0 / std::sqrt(2.0 * std::numbers::pi), 1e-15);
  EXPECT_NEAR(gaussian_pdf(0.0), 0.398942, 1e-6);
  EXPECT_NEAR(gaussian_cdf(1.96), 0.975002, 1e-6);
  EXPECT_NEAR(gaussian_cdf(1.96), oracle::normal_cdf_by_quadrature(1.96), 1e-12);
}

TEST(GaussianFunctions, CdfMatchesQuadratureOnGrid) {
  for (double z = -8.0; z <= 8.0; z += 0.25) {
    EXPECT_NEAR(gaussian_cdf(z), oracle::normal_cdf_by_quadrature(z), 1e-7) << z;
  }
}

TEST(ExpectedImprovement, ClosedFormExamples) {
  EXPECT_EQ(ei(0.5, 0.0, 0.5), 0.0);
  EXPECT_NEAR(ei(0.5, 1.0, 0.5), 1.0 / std::sqrt(2.0 * std::numbers::pi), 1e-12);
  EXPECT_NEAR(ei(0.5, 1.0, 0.5), 0.398942, 1e-6);
}

TEST(ExpectedImprovement, MonteCarloExample) {
  auto [m, se] = oracle::ei_monte_carlo(0.3, 0.7, 0.5, 0.0, 10'000'000, 1);
  EXPECT_LE(std::abs(ei(0.3, 0.7, 0.5) - m), 3.0 * se);
}

TEST(ExpectedImprovement, ZeroVarianceLimit) {
  for (double mu : {-1.0, 0.0, 0.3, 2.0}) {
    for (double xi : {0.0, 0.01, 0.5}) {
      const double limit = std::max(mu - 0.2 - xi, 0.0);
      EXPECT_EQ(ei(mu, 0.0, 0.2, xi), limit);
      EXPECT_NEAR(ei(mu, 1e-12, 0.2, xi), limit, 1e-9);
    }
  }
}

TEST(ExpectedImprovement, NonnegativeAndMonotone) {
  for (double mu = -3.0; mu <= 3.0; mu += 0.25) {
    double prev = -1.0;
    for (double sd = 0.0; sd <= 3.0; sd += 0.1) {
      const double v = ei(mu, sd, 0.0, 0.01);
      EXPECT_GE(v, 0.0);
      EXPECT_GE(v, prev - 1e-15);
      prev = v;
    }
  }
  for (double sd = 0.0; sd <= 3.0; sd += 0.25) {
    double prev = -1.0;
    for (double mu = -3.0; mu <= 3.0; mu += 0.1) {
      const double v = ei(mu, sd, 0.0, 0.01);
      EXPECT_GE(v, prev - 1e-15);
      prev = v;
    }
  }
}

TEST(UpperConfidenceBound, ClosedForm) {
  EXPECT_DOUBLE_EQ(score({AcqKind::UCB, 0.0, 2.0, 0.0}, post(0.3, 0.5)), 1.3);
  EXPECT_DOUBLE_EQ(score({AcqKind::UCB, 0.0, 0.0, 0.0}, post(0.3, 0.5)), 0.3);
}

TEST(ProbabilityOfImprovement, ClosedFormAndLimit) {
  EXPECT_DOUBLE_EQ(score({AcqKind::PI, 0.0, 2.0, 0.5}, post(0.5, 1.0)), 0.5);
  EXPECT_EQ(score({AcqKind::PI, 0.1, 2.0, 0.5}, post(0.7, 0.0)), 1.0);
  EXPECT_EQ(score({AcqKind::PI, 0.1, 2.0, 0.5}, post(0.6, 0.0)), 0.0);
  EXPECT_NEAR(score({AcqKind::PI, 0.0, 2.0, 0.0}, post(1.96, 1.0)), 0.975002, 1e-6);
}

TEST(Acquisitions, IncreaseWithMean) {
  for (AcqKind kind : {AcqKind::EI, AcqKind::UCB, AcqKind::PI}) {
    double prev = -1e300;
    for (double mu = -2.0; mu <= 2.0; mu += 0.1) {
      const double v = score({kind, 0.01, 2.0, 0.0}, post(mu, 0.4));
      EXPECT_GE(v, prev);
      prev = v;
    }
  }
}

TEST(AcqKind, StringRoundTrip) {
  for (AcqKind k : {AcqKind::EI, AcqKind::UCB, AcqKind::PI}) EXPECT_EQ(acq_kind_from_string(to_string(k)), k);
  EXPECT_EQ(acq_kind_from_string("UCB"), AcqKind::UCB);
  EXPECT_ANY_THROW(acq_kind_from_string("thompson"));
}
