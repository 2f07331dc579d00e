#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "bns/errors.hpp"
#include "bns/ipde_solver.hpp"
#include "bns/verify.hpp"

using namespace bns;

namespace {

Grid tiny_grid(std::size_t nt = 4) { return Grid::uniform(-1.0, 1.0, 9, 0.0, 0.4, 9, 1.0, nt); }

ValueSurface filled(const Grid& g, double (*f)(double, double, double)) {
  ValueSurface s(g, Payoff::put(1.0), true, 0.0);
  for (std::size_t n = 0; n <= g.nt(); ++n) {
    for (std::size_t j = 0; j < g.nv(); ++j) {
      for (std::size_t i = 0; i < g.nx(); ++i) s.level(n)[g.index(i, j)] = f(g.x[i], g.v[j], g.time(n));
    }
  }
  return s;
}

BnsModel gamma_model(double r) {
  ModelParams p;
  p.lambda = 1.0;
  p.rho = -0.5;
  p.r = r;
  return BnsModel(p, LevyKernel::gamma_ou(1.0, 20.0));
}

}  // namespace

TEST(Verify, ReportPassesIffWithinBudget) {
  ErrorBudget b;
  b.grid = 0.1;
  b.stat = 0.2;
  b.penalty = 0.3;
  EXPECT_DOUBLE_EQ(b.total(), 0.6);
  EXPECT_EQ(make_report("a", 1.6, 1.0, b).status, CheckStatus::kPass);
  EXPECT_EQ(make_report("a", 1.61, 1.0, b).status, CheckStatus::kFail);
  EXPECT_EQ(not_applicable("a", "x").status, CheckStatus::kNotApplicable);
  EXPECT_EQ(to_string(CheckStatus::kNotApplicable), "n/a");
}

TEST(Verify, ComparisonOfIdenticalSurfaces) {
  const ValueSurface u = filled(tiny_grid(), [](double x, double v, double t) { return x * v + t; });
  const CheckReport r = check_comparison(u, u, 0.05, 0.0, 1e-6);
  EXPECT_EQ(r.measured, 0.0);
  EXPECT_TRUE(r.passed());
}

TEST(Verify, ComparisonBoundPerLevel) {
  const Grid g = tiny_grid();
  const ValueSurface base = filled(g, [](double, double, double) { return 0.0; });
  const ValueSurface at_bound = filled(g, [](double, double, double t) { return 0.01 * std::exp(0.05 * (1.0 - t)); });
  const ValueSurface above = filled(g, [](double, double, double t) { return 0.01 * std::exp(0.05 * (1.0 - t)) + 2e-6; });
  // A uniform shift of 0.01 e^{0.05} would break the bound at later levels.
  const ValueSurface flat = filled(g, [](double, double, double) { return 0.01 * std::exp(0.05); });
  EXPECT_TRUE(check_comparison(at_bound, base, 0.05, 0.01).passed());
  EXPECT_FALSE(check_comparison(above, base, 0.05, 0.01).passed());
  EXPECT_FALSE(check_comparison(flat, base, 0.05, 0.01).passed());
  EXPECT_TRUE(check_comparison(flat, base, 0.0, 0.01 * std::exp(0.05)).passed());
  EXPECT_THROW(check_comparison(base, filled(tiny_grid(8), [](double, double, double) { return 0.0; }), 0.0, 0.01),
               GridMismatch);
}

TEST(Verify, ObstacleAndTimeMonotone) {
  const Grid g = tiny_grid();
  const ValueSurface good = filled(g, [](double x, double, double t) { return std::max(1.0 - std::exp(x), 0.0) + 0.1 * (1.0 - t); });
  EXPECT_TRUE(check_obstacle(good).passed());
  EXPECT_TRUE(check_time_monotone(good).passed());
  const ValueSurface bad = filled(g, [](double x, double, double t) { return std::max(1.0 - std::exp(x), 0.0) - 0.1 * (1.0 - t); });
  EXPECT_FALSE(check_obstacle(bad).passed());
  EXPECT_FALSE(check_time_monotone(bad).passed());
}

TEST(Verify, LipschitzOfObstacleSurface) {
  // delta at v_max leaves the single slice u = h.
  const BnsModel m = gamma_model(0.03);
  const Payoff put = Payoff::put(1.0);
  const Grid g = Grid::uniform(-1.0, 1.0, 201, 0.0, 0.5, 11, 1.0, 10);
  const ValueSurface u = solve_localized(g, 0.5, m, put);
  const LipschitzFit f = fit_lipschitz(u);
  EXPECT_NEAR(f.cx, put.sampled_lipschitz(g.x, g.dx() * 1.5), 1e-12);
  EXPECT_NEAR(f.cx, put.lipschitz(), 0.01);
  EXPECT_EQ(f.cv, 0.0);
}

TEST(Verify, LipschitzOfConstantPayoff) {
  const BnsModel m = gamma_model(0.0);
  const Payoff one = Payoff::constant(1.0);
  const Grid g = Grid::uniform(-1.0, 1.0, 41, 0.0, 0.5, 21, 1.0, 20);
  const ValueSurface u = solve(g, m, one);
  const ValueSurface uc = solve(g.coarsened(), m, one);
  const LipschitzFit f = fit_lipschitz(u);
  EXPECT_LT(f.cx, 1e-12);
  EXPECT_LT(f.cv, 1e-12);
  EXPECT_TRUE(check_lipschitz_modulus({&uc, &u}).passed());
}

TEST(Verify, LipschitzStableForPut) {
  const BnsModel m = gamma_model(0.03);
  const Payoff put = Payoff::put(1.0);
  GridSpec s;
  s.nx = 101;
  s.nv = 51;
  s.nt = 50;
  const Grid g = make_grid(s, m, put, 0.0, 0.04);
  const ValueSurface f = solve(g, m, put);
  const ValueSurface c = solve(g.coarsened(), m, put);
  const CheckReport r = check_lipschitz_modulus({&c, &f});
  EXPECT_TRUE(r.passed()) << r.detail;
  EXPECT_TRUE(std::isfinite(fit_lipschitz(f).c()));
}

TEST(Verify, LocalizationOrderDetectsViolation) {
  const Grid g = tiny_grid();
  const Grid l = g.localized(0.1);
  const ValueSurface full = filled(g, [](double, double v, double) { return v; });
  ValueSurface below(l, Payoff::put(1.0), true, 0.0);
  ValueSurface above(l, Payoff::put(1.0), true, 0.0);
  for (std::size_t n = 0; n <= l.nt(); ++n) {
    for (std::size_t j = 0; j < l.nv(); ++j) {
      for (std::size_t i = 0; i < l.nx(); ++i) {
        below.level(n)[l.index(i, j)] = l.v[j] - 0.01;
        above.level(n)[l.index(i, j)] = l.v[j] + 0.01;
      }
    }
  }
  EXPECT_TRUE(check_localization_order(full, {{0.1, &below, &below}}).passed());
  EXPECT_FALSE(check_localization_order(full, {{0.1, &above, &above}}).passed());
  EXPECT_EQ(check_localization_order(full, {}).status, CheckStatus::kNotApplicable);
}

TEST(Verify, KernelChecks) {
  const LevyKernel k = LevyKernel::gamma_ou(1.0, 2.0);
  EXPECT_TRUE(check_cumulant_quadrature(k, {-2.0, -1.0, -0.5, 0.5, 1.0, 1.9}).passed());
  EXPECT_TRUE(check_cumulant_mc(k, {-2.0, -1.0, -0.5, 0.5, 1.0}, 20000, 1).passed());
  EXPECT_TRUE(check_kernel_conditions(k).passed());
  EXPECT_EQ(check_cumulant_quadrature(LevyKernel::null(), {1.0}).status, CheckStatus::kNotApplicable);
  EXPECT_EQ(check_kernel_conditions(LevyKernel::null()).status, CheckStatus::kNotApplicable);
}

TEST(Verify, PathIdentityAndMartingale) {
  const BnsModel m = gamma_model(0.03);
  EXPECT_TRUE(check_path_identity(m, 0.04, 200, 50, 1).passed());
  EXPECT_TRUE(check_martingale(m, 0.0, 0.04, 20000, 1).passed());
}

TEST(Verify, ExtrapolatedMassWarns) {
  ValueSurface u(tiny_grid(), Payoff::put(1.0), true, 0.0);
  u.diagnostics.extrapolated_mass_fraction = 0.2;
  const CheckReport r = check_extrapolated_mass(u);
  EXPECT_EQ(r.status, CheckStatus::kWarn);
  EXPECT_TRUE(all_passed({r}));
  u.diagnostics.extrapolated_mass_fraction = 1e-4;
  EXPECT_EQ(check_extrapolated_mass(u).status, CheckStatus::kPass);
}

TEST(Verify, SuiteCsvColumns) {
  const std::string path = (std::filesystem::temp_directory_path() / "bns_suite_test.csv").string();
  write_suite_csv({make_report("x", 1.0, 2.0, {}, "d")}, path);
  std::ifstream in(path);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header.rfind("check,status,measured,bound,budget_grid,budget_stat", 0), 0u);
  EXPECT_EQ(row.rfind("x,pass,", 0), 0u);
}

TEST(Verify, DefaultDppProbesStayBelowGridTop) {
  const auto p = default_dpp_probes(0.0, 0.04, 1.0, 0.06);
  ASSERT_EQ(p.size(), 3u);
  for (const Probe& q : p) EXPECT_LE(q.v, 0.05 + 1e-15);
  EXPECT_EQ(p[0].t, 0.0);
}
