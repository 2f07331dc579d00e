#include <cmath>

#include <gtest/gtest.h>

#include "bns/generator.hpp"
#include "bns/ipde_solver.hpp"

using namespace bns;

namespace {

BnsModel model(const LevyKernel& k, double r = 0.03) {
  ModelParams p;
  p.lambda = 1.0;
  p.rho = -0.5;
  p.r = r;
  return BnsModel(p, k);
}

Grid grid(std::size_t nx, std::size_t nv) { return Grid::uniform(-3.0, 3.0, nx, 0.0, 1.0, nv, 1.0, 10, 2.0); }

JumpQuadrature quad(const Grid& g, const BnsModel& m) {
  return build_jump_quadrature(m.measure(), quadrature_for(g, m));
}

}  // namespace

TEST(Generator, ExactOnConstantsAndV) {
  for (const LevyKernel& k : {LevyKernel::gamma_ou(1.0, 20.0), LevyKernel::inverse_gaussian_ou(1.0, 4.0)}) {
    const BnsModel m = model(k);
    const Grid g = grid(101, 51);
    const JumpQuadrature q = quad(g, m);
    for (double v : {0.02, 0.1, 0.5}) {
      EXPECT_NEAR(apply_generator(test_function(TestFunction::kOne), g, m, q, 0.0, v), 0.0, 1e-12);
      const auto [i, j] = nearest_node(g, 0.0, v);
      EXPECT_NEAR(apply_generator(test_function(TestFunction::kV), g, m, q, 0.0, v),
                  analytic_generator(TestFunction::kV, m, g.x[i], g.v[j]), 1e-10)
          << k.name();
    }
  }
}

TEST(Generator, DiscreteMartingaleCondition) {
  const BnsModel m = model(LevyKernel::gamma_ou(1.0, 20.0), 0.05);
  const Grid g = grid(121, 41);
  const auto ex = [](double x, double) { return std::exp(x); };
  for (double x : {-0.5, 0.0, 1.0}) {
    for (double v : {0.04, 0.3}) {
      const auto [i, j] = nearest_node(g, x, v);
      EXPECT_NEAR(apply_generator(ex, g, m, quad(g, m), x, v), 0.05 * std::exp(g.x[i]), 1e-12);
    }
  }
}

TEST(Generator, FirstOrderConsistencyOnPolynomials) {
  const BnsModel m = model(LevyKernel::gamma_ou(1.0, 20.0));
  const Grid coarse = Grid::uniform(-3.0, 3.0, 61, 0.0, 1.0, 31, 1.0, 10, 2.0);
  const Grid fine = Grid::uniform(-3.0, 3.0, 121, 0.0, 1.0, 61, 1.0, 10, 2.0);
  for (TestFunction f : {TestFunction::kX, TestFunction::kXSquared}) {
    double err[2];
    int n = 0;
    for (const Grid* g : {&coarse, &fine}) {
      const auto [i, j] = nearest_node(*g, 0.2, 0.1);
      const double num = apply_generator(test_function(f), *g, m, quad(*g, m), 0.2, 0.1);
      err[n++] = std::abs(num - analytic_generator(f, m, g->x[i], g->v[j]));
    }
    EXPECT_LT(err[0], 1e-2);
    EXPECT_LE(err[1], 0.55 * err[0] + 1e-12);
  }
}

TEST(Generator, AnalyticFormulas) {
  const LevyKernel k = LevyKernel::gamma_ou(1.0, 2.0);
  const BnsModel m = model(k);
  const double ax = 0.03 - 0.5 * 0.1 - k.cumulant(-0.5) + (-0.5) * 0.5;
  EXPECT_NEAR(analytic_generator(TestFunction::kX, m, 0.3, 0.1), ax, 1e-15);
  // x^2: 2 x A + v + lambda rho^2 mu2
  EXPECT_NEAR(analytic_generator(TestFunction::kXSquared, m, 0.3, 0.1),
              0.6 * ax + 0.1 + 0.25 * k.moment(2), 1e-15);
  EXPECT_NEAR(analytic_generator(TestFunction::kV, m, 0.3, 0.1), -(0.1 - 0.5), 1e-15);
}

TEST(Generator, NearestNode) {
  const Grid g = Grid::uniform(0.0, 1.0, 11, 0.0, 1.0, 11, 1.0, 1);
  EXPECT_EQ(nearest_node(g, 0.34, 0.76), std::make_pair(std::size_t{3}, std::size_t{8}));
  EXPECT_EQ(nearest_node(g, -1.0, 5.0), std::make_pair(std::size_t{0}, std::size_t{10}));
}
