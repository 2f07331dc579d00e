#include <cmath>

#include <gtest/gtest.h>

#include "bns/errors.hpp"
#include "bns/grid.hpp"

using namespace bns;

namespace {

BnsModel gamma_model() {
  ModelParams p;
  p.lambda = 1.0;
  p.rho = -0.5;
  p.r = 0.03;
  return BnsModel(p, LevyKernel::gamma_ou(1.0, 20.0));
}

}  // namespace

TEST(Grid, UniformNodes) {
  const Grid g = Grid::uniform(-1.0, 1.0, 5, 0.0, 0.4, 5, 2.0, 8);
  EXPECT_DOUBLE_EQ(g.dx(), 0.5);
  EXPECT_DOUBLE_EQ(g.v[1], 0.1);
  EXPECT_DOUBLE_EQ(g.dt(), 0.25);
  EXPECT_DOUBLE_EQ(g.time(8), 2.0);
  EXPECT_EQ(g.index(2, 3), 17u);
}

TEST(Grid, StretchedNodesClusterAtLowerEdge) {
  const Grid g = Grid::uniform(-1.0, 1.0, 5, 0.0, 1.0, 11, 1.0, 2, 2.0);
  EXPECT_DOUBLE_EQ(g.v.front(), 0.0);
  EXPECT_DOUBLE_EQ(g.v.back(), 1.0);
  for (std::size_t j = 2; j < g.nv(); ++j) EXPECT_GT(g.v[j] - g.v[j - 1], g.v[j - 1] - g.v[j - 2]);
  EXPECT_NEAR(g.v[5], std::expm1(1.0) / std::expm1(2.0), 1e-15);
}

TEST(Grid, CoarsenedKeepsEveryOtherNode) {
  const Grid g = Grid::uniform(-1.0, 1.0, 9, 0.0, 1.0, 9, 1.0, 8, 2.0);
  const Grid c = g.coarsened();
  ASSERT_EQ(c.nx(), 5u);
  ASSERT_EQ(c.nv(), 5u);
  EXPECT_EQ(c.nt(), 4u);
  for (std::size_t j = 0; j < c.nv(); ++j) EXPECT_EQ(c.v[j], g.v[2 * j]);
  for (std::size_t i = 0; i < c.nx(); ++i) EXPECT_EQ(c.x[i], g.x[2 * i]);
  EXPECT_THROW(Grid::uniform(-1.0, 1.0, 8, 0.0, 1.0, 9, 1.0, 8).coarsened(), GridMismatch);
  EXPECT_THROW(Grid::uniform(-1.0, 1.0, 9, 0.0, 1.0, 9, 1.0, 7).coarsened(), GridMismatch);
}

TEST(Grid, LocalizedStartsAtDelta) {
  const Grid g = Grid::uniform(-1.0, 1.0, 5, 0.0, 1.0, 11, 1.0, 2);
  const Grid l = g.localized(0.25);
  EXPECT_DOUBLE_EQ(l.v.front(), 0.25);
  EXPECT_DOUBLE_EQ(l.v[1], 0.3);
  EXPECT_EQ(l.nv(), 9u);
  EXPECT_EQ(g.localized(0.3).nv(), 8u);
  EXPECT_EQ(g.localized(2.0).nv(), 1u);
  EXPECT_THROW(g.localized(0.0), std::invalid_argument);
}

TEST(Grid, AutomaticRangeCoversTheLaw) {
  const BnsModel m = gamma_model();
  GridSpec s;
  const Grid g = make_grid(s, m, Payoff::put(1.0), 0.0, 0.04);
  const double sd = log_price_sd(m, 0.04);
  EXPECT_NEAR(g.x.front(), -5.0 * sd, 1e-12);
  EXPECT_NEAR(g.x.back(), 5.0 * sd, 1e-12);
  EXPECT_GE(g.v.back(), 0.04 + bdlp_quantile(m.kernel(), 1.0, 0.999));
  EXPECT_EQ(g.nx(), 201u);
  EXPECT_EQ(g.nv(), 101u);
  EXPECT_EQ(g.nt(), 200u);
  EXPECT_EQ(g.v.front(), 0.0);
}

TEST(Grid, UniformVPutsV0OnCoarseNode) {
  GridSpec s;
  s.v_stretch = 0.0;
  s.nv = 41;
  const Grid g = make_grid(s, gamma_model(), Payoff::put(1.0), 0.0, 0.04);
  const Grid c = g.coarsened();
  bool found = false;
  for (double v : c.v) found = found || std::abs(v - 0.04) < 1e-14;
  EXPECT_TRUE(found);
}

TEST(Grid, ExplicitEdgesAreKept) {
  GridSpec s;
  s.x_min = -2.0;
  s.x_max = 1.0;
  s.v_max = 0.5;
  s.delta = 0.01;
  const Grid g = make_grid(s, gamma_model(), Payoff::put(1.0), 0.0, 0.04);
  EXPECT_EQ(g.x.front(), -2.0);
  EXPECT_EQ(g.x.back(), 1.0);
  EXPECT_EQ(g.v.back(), 0.5);
  EXPECT_EQ(g.v.front(), 0.01);
}

TEST(Grid, RejectsDegenerateSpecs) {
  GridSpec s;
  s.nx = 3;
  EXPECT_THROW(make_grid(s, gamma_model(), Payoff::put(1.0), 0.0, 0.04), std::invalid_argument);
  s = GridSpec{};
  s.x_min = 1.0;
  s.x_max = -1.0;
  EXPECT_THROW(make_grid(s, gamma_model(), Payoff::put(1.0), 0.0, 0.04), std::invalid_argument);
}
