#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "bns/errors.hpp"
#include "bns/jump_quadrature.hpp"

using namespace bns;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double weighted_sum(const JumpQuadrature& q, double (*f)(double, double), double a) {
  double s = 0.0;
  for (std::size_t k = 0; k < q.nodes.size(); ++k) s += q.weights[k] * f(q.nodes[k], a);
  return s;
}

}  // namespace

TEST(JumpQuadrature, GammaMomentsAndCumulant) {
  const LevyKernel k = LevyKernel::gamma_ou(1.0, 20.0);
  const JumpMeasure m(k);
  QuadratureOptions o;
  o.resolution = 0.005;
  const JumpQuadrature q = build_jump_quadrature(m, o);
  EXPECT_TRUE(q.certified);
  EXPECT_EQ(q.xi, 0.0);
  EXPECT_NEAR(q.mass, k.partial_moment(0, 0.0, q.z_max), 1e-10);
  EXPECT_NEAR(q.mean, k.moment(1), 1e-8);
  EXPECT_LT(q.tail, 1e-8);
  EXPECT_NEAR(weighted_sum(q, [](double z, double) { return z * z; }, 0.0), k.moment(2), 1e-9);
  const double kap = weighted_sum(q, [](double z, double th) { return std::expm1(th * z); }, -0.5);
  EXPECT_NEAR(kap, k.cumulant(-0.5), 1e-9);
}

TEST(JumpQuadrature, InverseGaussianSmallJumpSplit) {
  const LevyKernel k = LevyKernel::inverse_gaussian_ou(1.0, 2.0);
  const JumpQuadrature q = build_jump_quadrature(JumpMeasure(k));
  EXPECT_DOUBLE_EQ(q.xi, 1e-3);
  EXPECT_NEAR(q.small_m1, k.partial_moment(1, 0.0, 1e-3), 1e-18);
  EXPECT_NEAR(q.small_m2, k.partial_moment(2, 0.0, 1e-3), 1e-20);
  EXPECT_NEAR(q.small_m1 + q.mean + k.partial_moment(1, q.z_max, kInf), k.moment(1), 1e-10);
  for (double z : q.nodes) {
    EXPECT_GE(z, q.xi);
    EXPECT_LE(z, q.z_max);
  }
}

TEST(JumpQuadrature, InfiniteActivityNeedsCutoff) {
  QuadratureOptions o;
  o.xi = 0.0;
  EXPECT_THROW(build_jump_quadrature(JumpMeasure(LevyKernel::inverse_gaussian_ou(1.0, 2.0)), o),
               std::invalid_argument);
}

TEST(JumpQuadrature, NullKernelIsEmpty) {
  const JumpQuadrature q = build_jump_quadrature(JumpMeasure(LevyKernel::null()));
  EXPECT_TRUE(q.empty());
  EXPECT_EQ(q.mass, 0.0);
}

TEST(JumpQuadrature, TiltedMeasure) {
  const LevyKernel k = LevyKernel::gamma_ou(1.0, 2.0);
  const JumpQuadrature q = build_jump_quadrature(JumpMeasure(k, EmmTilt::exponential(1.0)));
  // y w = 2 e^{-3z}: the GammaOU(2/3, 3) density.
  EXPECT_NEAR(q.mean, LevyKernel::gamma_ou(2.0 / 3.0, 3.0).moment(1), 1e-8);
}
