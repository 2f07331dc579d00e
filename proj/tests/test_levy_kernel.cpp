#include <cmath>
#include <limits>
#include <random>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include "bns/errors.hpp"
#include "bns/levy_kernel.hpp"

using namespace bns;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Direct quadrature of int_lo^hi f(z) w(z) dz, independent of the closed forms.
// On [0, 1] the substitution z = u^2 tames the z^{-3/2} singularity of the IG density.
template <typename F>
double integrate(const LevyKernel& k, F f, double lo = 0.0, double hi = kInf) {
  auto g = [&](double z) {
    const double w = k.density(z);
    const double y = w == 0.0 ? 0.0 : f(z) * w;
    return std::isfinite(y) ? y : 0.0;
  };
  auto g2 = [&](double u) { return 2.0 * u * g(u * u); };
  boost::math::quadrature::tanh_sinh<double> ts;
  boost::math::quadrature::exp_sinh<double> es;
  const double split = std::max(lo, 1.0);
  const double near = lo < 1.0 ? ts.integrate(g2, std::sqrt(lo), std::sqrt(std::min(hi, 1.0)), 1e-14) : 0.0;
  if (hi <= 1.0) return near;
  if (hi == kInf) return near + es.integrate(g, split, kInf, 1e-14);
  return near + ts.integrate(g, split, hi, 1e-14);
}

}  // namespace

TEST(LevyKernel, GammaCumulantMatchesQuadrature) {
  const LevyKernel k = LevyKernel::gamma_ou(1.0, 2.0);
  for (double th : {-2.0, -1.0, -0.5, 0.5, 1.0, 1.9}) {
    const double q = integrate(k, [&](double z) { return std::expm1(th * z); });
    EXPECT_NEAR(k.cumulant(th), q, 1e-9) << th;
  }
}

TEST(LevyKernel, InverseGaussianCumulantMatchesQuadrature) {
  const LevyKernel k = LevyKernel::inverse_gaussian_ou(0.5, 3.0);
  for (double th : {-3.0, -1.0, 0.5, 2.0, 4.0}) {
    const double q = integrate(k, [&](double z) { return std::expm1(th * z); });
    EXPECT_NEAR(k.cumulant(th), q, 1e-9) << th;
  }
}

TEST(LevyKernel, ThetaHat) {
  EXPECT_DOUBLE_EQ(LevyKernel::gamma_ou(1.0, 20.0).theta_hat(), 20.0);
  EXPECT_DOUBLE_EQ(LevyKernel::inverse_gaussian_ou(1.0, 3.0).theta_hat(), 4.5);
}

TEST(LevyKernel, CumulantDivergesPastThetaHat) {
  const LevyKernel g = LevyKernel::gamma_ou(1.0, 2.0);
  EXPECT_THROW(g.cumulant(2.0), DomainError);
  EXPECT_THROW(g.cumulant(5.0), DomainError);
  EXPECT_THROW(LevyKernel::inverse_gaussian_ou(1.0, 2.0).cumulant(2.0), DomainError);
}

TEST(LevyKernel, MomentsMatchQuadrature) {
  for (const LevyKernel& k : {LevyKernel::gamma_ou(1.5, 4.0), LevyKernel::inverse_gaussian_ou(0.7, 2.0)}) {
    for (int n = 1; n <= 3; ++n) {
      const double q = integrate(k, [&](double z) { return std::pow(z, n); });
      EXPECT_NEAR(k.moment(n), q, 1e-10 * std::max(1.0, q)) << k.name() << " n=" << n;
    }
  }
  // a n! / b^n
  EXPECT_NEAR(LevyKernel::gamma_ou(2.0, 4.0).moment(3), 2.0 * 6.0 / 64.0, 1e-15);
}

TEST(LevyKernel, PartialMomentsAdd) {
  for (const LevyKernel& k : {LevyKernel::gamma_ou(1.0, 2.0), LevyKernel::inverse_gaussian_ou(1.0, 2.0)}) {
    for (int n = 1; n <= 2; ++n) {
      EXPECT_NEAR(k.partial_moment(n, 0.0, 0.3) + k.partial_moment(n, 0.3, kInf), k.moment(n), 1e-13);
    }
    EXPECT_NEAR(k.partial_moment(0, 0.2, 1.5), integrate(k, [](double) { return 1.0; }, 0.2, 1.5), 1e-11);
  }
}

TEST(LevyKernel, NullKernelIsZero) {
  const LevyKernel k = LevyKernel::null();
  EXPECT_TRUE(k.is_null());
  EXPECT_EQ(k.cumulant(3.0), 0.0);
  EXPECT_EQ(k.moment(2), 0.0);
  EXPECT_EQ(k.density(0.5), 0.0);
  EXPECT_EQ(k.tail_mass(0.1), 0.0);
}

TEST(LevyKernel, RejectsBadParameters) {
  EXPECT_THROW(LevyKernel::gamma_ou(0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(LevyKernel::inverse_gaussian_ou(1.0, -1.0), std::invalid_argument);
}

TEST(LevyKernel, ExponentialTailBoundDominates) {
  for (const LevyKernel& k : {LevyKernel::gamma_ou(1.0, 2.0), LevyKernel::inverse_gaussian_ou(1.0, 2.0)}) {
    const double th = 0.5 * k.theta_hat();
    for (double z : {0.5, 2.0, 5.0}) {
      const double exact = integrate(k, [&](double s) { return std::exp(th * s); }, z, kInf);
      EXPECT_GE(k.exponential_tail_bound(z, th), exact) << k.name() << " z=" << z;
    }
  }
}

TEST(LevyKernel, ConditionsGamma) {
  const ConditionReport r = validate_conditions(LevyKernel::gamma_ou(1.0, 20.0));
  EXPECT_TRUE(r.c2.passed);
  EXPECT_TRUE(r.c3.passed);
  EXPECT_LE(r.probe_theta.size(), 20u);
  EXPECT_GT(r.probe_kappa.back(), 1e6);
  for (std::size_t k = 1; k < r.probe_kappa.size(); ++k) EXPECT_GT(r.probe_kappa[k], r.probe_kappa[k - 1]);
}

TEST(LevyKernel, ConditionsInverseGaussianNeedMoreProbes) {
  const LevyKernel k = LevyKernel::inverse_gaussian_ou(1.0, 2.0);
  EXPECT_TRUE(validate_conditions(k).all_passed());
  EXPECT_FALSE(validate_conditions(k, 1e6, 20).c3.passed);
}

TEST(LevyKernel, ExponentialTiltOfGamma) {
  const double a = 1.0, b = 2.0, g = 0.7;
  const LevyKernel k = LevyKernel::gamma_ou(a, b);
  const EmmTilt tilt = EmmTilt::exponential(g);
  for (double th : {-1.0, 0.5, 1.5}) {
    const double expected = a * b * th / ((b + g) * (b + g - th));
    EXPECT_NEAR(tilted_cumulant(k, tilt, th), expected, 1e-10 * std::max(1.0, std::abs(expected)));
  }
  EXPECT_TRUE(std::isfinite(tilt_hellinger(k, tilt)));
  EXPECT_NEAR(tilted_cumulant(k, EmmTilt::identity(), 1.0), k.cumulant(1.0), 1e-15);
}

TEST(LevyKernel, GammaQuantileMatchesSimulation) {
  const double a = 1.0, b = 20.0, s = 1.0, q = 0.999;
  const LevyKernel k = LevyKernel::gamma_ou(a, b);
  const double z = bdlp_quantile(k, s, q);
  std::mt19937_64 rng(7);
  std::poisson_distribution<int> count(a * s);
  const int n = 200000;
  int below = 0;
  for (int p = 0; p < n; ++p) {
    const int m = count(rng);
    double total = 0.0;
    if (m > 0) total = std::gamma_distribution<double>(m, 1.0 / b)(rng);
    below += total <= z ? 1 : 0;
  }
  const double f = static_cast<double>(below) / n;
  EXPECT_NEAR(f, q, 3.0 * std::sqrt(q * (1 - q) / n) + 1e-12);
}
