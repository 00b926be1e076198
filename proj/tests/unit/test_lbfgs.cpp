#include <gtest/gtest.h>

#include <cmath>

#include "catbox/lbfgs.hpp"

using catbox::maximize_box;
using Eigen::VectorXd;

TEST(Lbfgs, NegatedRosenbrockInterior) {
  auto f = [](const VectorXd& x, VectorXd& g) {
    const double a = 1.0 - x[0], b = x[1] - x[0] * x[0];
    g.resize(2);
    g[0] = -(-2.0 * a - 400.0 * x[0] * b);
    g[1] = -(200.0 * b);
    return -(a * a + 100.0 * b * b);
  };
  catbox::LbfgsOptions opts;
  opts.max_iters = 500;
  opts.ftol = 0.0;
  auto r = maximize_box(f, VectorXd::Constant(2, -1.2), VectorXd::Constant(2, -5.0), VectorXd::Constant(2, 5.0), opts);
  ASSERT_TRUE(r.ok);
  EXPECT_NEAR(r.x[0], 1.0, 1e-4);
  EXPECT_NEAR(r.x[1], 1.0, 1e-4);
}

TEST(Lbfgs, ActiveBoundsAreRespected) {
  // Unconstrained maximizer (3, -2) lies outside [0,1]^2.
  auto f = [](const VectorXd& x, VectorXd& g) {
    g = VectorXd(2);
    g[0] = -2.0 * (x[0] - 3.0);
    g[1] = -2.0 * (x[1] + 2.0);
    return -(x[0] - 3.0) * (x[0] - 3.0) - (x[1] + 2.0) * (x[1] + 2.0);
  };
  auto r = maximize_box(f, VectorXd::Constant(2, 0.5), VectorXd::Zero(2), VectorXd::Ones(2));
  EXPECT_DOUBLE_EQ(r.x[0], 1.0);
  EXPECT_DOUBLE_EQ(r.x[1], 0.0);
  EXPECT_DOUBLE_EQ(r.value, -4.0 - 4.0);
}

TEST(Lbfgs, NeverWorseThanStartAndHandlesNonFinite) {
  int calls = 0;
  auto f = [&](const VectorXd& x, VectorXd& g) {
    ++calls;
    g = VectorXd::Constant(1, -1.0 / x[0]);
    if (x[0] <= 0.0) return -std::numeric_limits<double>::infinity();
    return -std::log(x[0]);  // increases toward the pole at zero
  };
  auto r = maximize_box(f, VectorXd::Constant(1, 0.9), VectorXd::Constant(1, -1.0), VectorXd::Constant(1, 1.0));
  ASSERT_TRUE(r.ok);
  EXPECT_GE(r.value, -std::log(0.9));
  EXPECT_TRUE(std::isfinite(r.value));
  EXPECT_GT(r.x[0], 0.0);

  auto bad = [](const VectorXd&, VectorXd& g) {
    g = VectorXd::Zero(1);
    return std::nan("");
  };
  auto rb = maximize_box(bad, VectorXd::Zero(1), VectorXd::Constant(1, -1.0), VectorXd::Ones(1));
  EXPECT_FALSE(rb.ok);
}
