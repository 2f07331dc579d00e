#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "bns/bns_dynamics.hpp"
#include "bns/numerics.hpp"

using namespace bns;

namespace {

ModelParams params(double lambda, double rho, double r, double T) {
  ModelParams p;
  p.lambda = lambda;
  p.rho = rho;
  p.r = r;
  p.T = T;
  return p;
}

std::vector<double> uniform_times(double T, std::size_t n) {
  std::vector<double> t(n);
  for (std::size_t k = 0; k < n; ++k) t[k] = T * static_cast<double>(k + 1) / static_cast<double>(n);
  return t;
}

}  // namespace

TEST(BnsDynamics, EpsFunction) {
  const BnsModel m(params(2.0, 0.0, 0.0, 1.0), LevyKernel::null());
  for (double t : {0.0, 0.1, 1.0, 3.0}) EXPECT_NEAR(m.eps(t), (1.0 - std::exp(-2.0 * t)) / 2.0, 1e-16);
}

TEST(BnsDynamics, RejectsBadParameters) {
  EXPECT_THROW(BnsModel(params(0.0, 0.0, 0.0, 1.0), LevyKernel::null()), std::invalid_argument);
  EXPECT_THROW(BnsModel(params(1.0, 0.5, 0.0, 1.0), LevyKernel::null()), std::invalid_argument);
  EXPECT_THROW(BnsModel(params(1.0, 0.0, -0.1, 1.0), LevyKernel::null()), std::invalid_argument);
}

TEST(BnsDynamics, DriftConstant) {
  const LevyKernel k = LevyKernel::gamma_ou(1.0, 2.0);
  const BnsModel m(params(1.5, -0.5, 0.03, 1.0), k);
  EXPECT_NEAR(m.kappa_rho(), k.cumulant(-0.5), 1e-15);
  EXPECT_NEAR(m.drift_constant(), 0.03 - 1.5 * k.cumulant(-0.5), 1e-15);
  EXPECT_NEAR(m.mean_jump(), 0.5, 1e-15);
}

TEST(BnsDynamics, NullKernelVarianceDecaysExactly) {
  const BnsModel m(params(1.3, 0.0, 0.0, 2.0), LevyKernel::null());
  Rng rng = make_stream(1, 0, 0);
  const PathSample s = simulate_path(m, 0.0, 1.0, uniform_times(2.0, 50), rng);
  for (std::size_t k = 0; k < s.t.size(); ++k) {
    EXPECT_DOUBLE_EQ(s.v[k], std::exp(-1.3 * s.t[k]));
    EXPECT_NEAR(s.v_star[k], m.eps(s.t[k]), 1e-15);
    EXPECT_EQ(s.z_cum[k], 0.0);
  }
  EXPECT_TRUE(s.jump_times.empty());
}

TEST(BnsDynamics, PathIdentityHolds) {
  for (const LevyKernel& k : {LevyKernel::gamma_ou(1.0, 2.0), LevyKernel::inverse_gaussian_ou(1.0, 2.0)}) {
    const BnsModel m(params(1.0, -0.5, 0.03, 1.0), k);
    const std::vector<double> times = uniform_times(1.0, 100);
    for (std::uint64_t p = 0; p < 500; ++p) {
      Rng rng = make_stream(3, 0, p);
      const PathSample s = simulate_path(m, 0.0, 0.04, times, rng);
      for (std::size_t i = 0; i < times.size(); ++i) {
        ASSERT_NEAR(s.v_star[i], (0.04 - s.v[i] + s.z_cum[i]) / 1.0, 1e-10);
      }
    }
  }
}

TEST(BnsDynamics, GammaJumpCountAndSize) {
  const double a = 2.0, b = 5.0, lambda = 1.5, T = 1.0;
  const BnsModel m(params(lambda, 0.0, 0.0, T), LevyKernel::gamma_ou(a, b));
  std::vector<double> counts, sizes;
  for (std::uint64_t p = 0; p < 20000; ++p) {
    Rng rng = make_stream(5, 0, p);
    const JumpPath j = simulate_bdlp(m, T, rng);
    counts.push_back(static_cast<double>(j.sizes.size()));
    for (double s : j.sizes) sizes.push_back(s);
    for (double t : j.times) ASSERT_TRUE(t >= 0.0 && t <= T);
  }
  const SampleStats c = sample_stats(counts);
  const SampleStats s = sample_stats(sizes);
  EXPECT_NEAR(c.mean, a * lambda * T, 3.0 * c.std_error);
  EXPECT_NEAR(s.mean, 1.0 / b, 4.0 * s.std_error);
}

TEST(BnsDynamics, VarianceMean) {
  // E V_t = v0 e^{-lambda t} + mu1 (1 - e^{-lambda t})
  for (const LevyKernel& k : {LevyKernel::gamma_ou(1.0, 4.0), LevyKernel::inverse_gaussian_ou(0.5, 2.0)}) {
    const BnsModel m(params(2.0, 0.0, 0.0, 1.0), k);
    std::vector<double> v;
    for (std::uint64_t p = 0; p < 40000; ++p) {
      Rng rng = make_stream(9, 0, p);
      double x = 0.0, vt = 0.0;
      simulate_states(m, 0.0, 0.1, {1.0}, rng, &x, &vt);
      v.push_back(vt);
    }
    const SampleStats s = sample_stats(v);
    const double expected = 0.1 * std::exp(-2.0) + k.moment(1) * (1.0 - std::exp(-2.0));
    EXPECT_NEAR(s.mean, expected, 3.0 * s.std_error) << k.name();
  }
}

TEST(BnsDynamics, DiscountedPriceIsMartingale) {
  for (const LevyKernel& k : {LevyKernel::gamma_ou(1.0, 2.0), LevyKernel::inverse_gaussian_ou(1.0, 2.0)}) {
    const BnsModel m(params(1.0, -0.5, 0.03, 1.0), k);
    std::vector<double> y;
    for (std::uint64_t p = 0; p < 50000; ++p) {
      Rng rng = make_stream(11, 0, p);
      double x = 0.0, v = 0.0;
      simulate_states(m, 0.1, 0.04, {1.0}, rng, &x, &v);
      y.push_back(std::exp(-0.03) * std::exp(x));
    }
    const SampleStats s = sample_stats(y);
    EXPECT_NEAR(s.mean, std::exp(0.1), 3.0 * s.std_error) << k.name();
  }
}

TEST(BnsDynamics, NullKernelLogPriceIsGaussian) {
  const BnsModel m(params(1.0, 0.0, 0.05, 1.0), LevyKernel::null());
  const double w = 0.04 * m.eps(1.0);
  std::vector<double> x, x2;
  for (std::uint64_t p = 0; p < 50000; ++p) {
    Rng rng = make_stream(13, 0, p);
    double xt = 0.0, v = 0.0;
    simulate_states(m, 0.0, 0.04, {1.0}, rng, &xt, &v);
    x.push_back(xt);
  }
  const SampleStats s = sample_stats(x);
  EXPECT_NEAR(s.mean, 0.05 - 0.5 * w, 3.0 * s.std_error);
  for (double xi : x) x2.push_back((xi - s.mean) * (xi - s.mean));
  const SampleStats v = sample_stats(x2);
  EXPECT_NEAR(v.mean, w, 3.0 * v.std_error);
}

TEST(BnsDynamics, SameStreamSamePath) {
  const BnsModel m(params(1.0, -0.5, 0.03, 1.0), LevyKernel::inverse_gaussian_ou(1.0, 2.0));
  Rng a = make_stream(42, 1, 17);
  Rng b = make_stream(42, 1, 17);
  const PathSample pa = simulate_path(m, 0.0, 0.04, uniform_times(1.0, 10), a);
  const PathSample pb = simulate_path(m, 0.0, 0.04, uniform_times(1.0, 10), b);
  EXPECT_EQ(pa.x, pb.x);
  EXPECT_EQ(pa.v, pb.v);
  EXPECT_EQ(pa.jump_sizes, pb.jump_sizes);
}

TEST(BnsDynamics, StatesAgreeWithFullPath) {
  const BnsModel m(params(1.0, -0.5, 0.03, 1.0), LevyKernel::gamma_ou(1.0, 20.0));
  const std::vector<double> times = uniform_times(1.0, 5);
  Rng a = make_stream(2, 1, 3);
  Rng b = make_stream(2, 1, 3);
  const PathSample s = simulate_path(m, 0.0, 0.04, times, a);
  std::vector<double> x(times.size()), v(times.size());
  simulate_states(m, 0.0, 0.04, times, b, x.data(), v.data());
  for (std::size_t k = 0; k < times.size(); ++k) {
    EXPECT_DOUBLE_EQ(s.x[k], x[k]);
    EXPECT_DOUBLE_EQ(s.v[k], v[k]);
  }
}

TEST(BnsDynamics, InverseGaussianTruncationDrift) {
  const LevyKernel k = LevyKernel::inverse_gaussian_ou(1.0, 2.0);
  const BnsModel m(params(1.0, 0.0, 0.0, 1.0), k);
  Rng rng = make_stream(1, 0, 0);
  const JumpPath j = simulate_bdlp(m, 1.0, rng);
  EXPECT_NEAR(j.drift_rate, k.partial_moment(1, 0.0, j.truncation), 1e-15);
  EXPECT_NEAR(j.truncated_variance_rate, k.partial_moment(2, 0.0, j.truncation), 1e-18);
  for (double s : j.sizes) EXPECT_GT(s, j.truncation);
}

TEST(BnsDynamics, RejectsUnsortedTimes) {
  const BnsModel m(params(1.0, 0.0, 0.0, 1.0), LevyKernel::null());
  Rng rng = make_stream(1, 0, 0);
  EXPECT_THROW(simulate_path(m, 0.0, 0.04, {0.5, 0.2}, rng), std::invalid_argument);
}
