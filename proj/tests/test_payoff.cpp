#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "bns/payoff.hpp"

using namespace bns;

namespace {

std::vector<double> fine_xs(double lo, double hi, std::size_t n) {
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return xs;
}

}  // namespace

TEST(Payoff, PutValues) {
  const Payoff p = Payoff::put(1.2);
  EXPECT_DOUBLE_EQ(p(std::log(1.2)), 0.0);
  EXPECT_DOUBLE_EQ(p(0.0), 0.2);
  EXPECT_DOUBLE_EQ(p(1.0), 0.0);
  EXPECT_NEAR(p(-30.0), 1.2, 1e-12);
  EXPECT_DOUBLE_EQ(p.lipschitz(), 1.2);
  EXPECT_TRUE(p.certified());
}

TEST(Payoff, PutLipschitzBoundIsSharp) {
  const Payoff p = Payoff::put(1.0);
  const double k = p.sampled_lipschitz(fine_xs(-3.0, 1.0, 4001), 0.01);
  EXPECT_LE(k, p.lipschitz());
  EXPECT_GT(k, 0.99 * p.lipschitz());
}

TEST(Payoff, CappedCall) {
  const Payoff p = Payoff::capped_call(1.0, 0.5);
  EXPECT_DOUBLE_EQ(p(0.0), 0.0);
  EXPECT_NEAR(p(std::log(1.2)), 0.2, 1e-15);
  EXPECT_DOUBLE_EQ(p(2.0), 0.5);
  EXPECT_LE(p.sampled_lipschitz(fine_xs(-1.0, 2.0, 3001), 0.01), p.lipschitz());
}

TEST(Payoff, PlainCallNeedsOverride) {
  EXPECT_THROW(Payoff::call(1.0, false), std::invalid_argument);
  const Payoff p = Payoff::call(1.0, true);
  EXPECT_FALSE(p.certified());
  EXPECT_TRUE(std::isinf(p.lipschitz()));
  EXPECT_NEAR(p(std::log(3.0)), 2.0, 1e-15);
}

TEST(Payoff, Tabulated) {
  const Payoff p = Payoff::tabulated({-1.0, 0.0, 1.0}, {1.0, 0.5, 0.0});
  EXPECT_DOUBLE_EQ(p(-2.0), 1.0);
  EXPECT_DOUBLE_EQ(p(-0.5), 0.75);
  EXPECT_DOUBLE_EQ(p(0.5), 0.25);
  EXPECT_DOUBLE_EQ(p(3.0), 0.0);
  EXPECT_DOUBLE_EQ(p.lipschitz(), 0.5);
  EXPECT_THROW(Payoff::tabulated({0.0, 0.0}, {1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(Payoff::tabulated({0.0, 1.0}, {1.0, -1.0}), std::invalid_argument);
}

TEST(Payoff, Constant) {
  const Payoff p = Payoff::constant(1.0);
  EXPECT_DOUBLE_EQ(p(-5.0), 1.0);
  EXPECT_DOUBLE_EQ(p(5.0), 1.0);
  EXPECT_DOUBLE_EQ(p.lipschitz(), 0.0);
}

TEST(Payoff, RejectsBadStrike) {
  EXPECT_THROW(Payoff::put(0.0), std::invalid_argument);
  EXPECT_THROW(Payoff::capped_call(1.0, 0.0), std::invalid_argument);
  EXPECT_THROW(Payoff::constant(-1.0), std::invalid_argument);
}
