#include "bns/levy_kernel.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/minima.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

#include "bns/errors.hpp"

namespace bns {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kQuadratureTolerance = 1e-10;
constexpr double kTruncationTolerance = 1e-12;

// int_lo^hi t^{s-1} e^{-t} dt for s > 0, picking the complementary form that
// avoids cancellation.
double gamma_segment(double s, double lo, double hi) {
  using boost::math::tgamma;
  using boost::math::tgamma_lower;
  if (hi <= lo) return 0.0;
  if (std::isinf(hi)) return tgamma(s, lo);
  if (hi <= s) return tgamma_lower(s, hi) - tgamma_lower(s, lo);
  return tgamma(s, lo) - tgamma(s, hi);
}

// Same integral for s = -1/2, by parts: requires lo > 0.
double gamma_segment_minus_half(double lo, double hi) {
  const double upper_lo = std::exp(-lo) / std::sqrt(lo);
  const double upper_hi = std::isinf(hi) ? 0.0 : std::exp(-hi) / std::sqrt(hi);
  return 2.0 * (upper_lo - upper_hi) - 2.0 * gamma_segment(0.5, lo, hi);
}

double ig_prefactor(double a) { return a / (2.0 * std::sqrt(2.0 * std::numbers::pi)); }

// int over [lo, hi] of z^{p} e^{-c z} dz for p = n - 3/2 (n >= 0).
double ig_power_segment(int n, double c, double lo, double hi) {
  const double s = n - 0.5;
  if (n == 0) return std::sqrt(c) * gamma_segment_minus_half(c * lo, c * hi);
  return std::pow(c, -s) * gamma_segment(s, c * lo, c * hi);
}

template <typename F>
double integrate_finite(F&& f, double lo, double hi, const char* what) {
  if (hi <= lo) return 0.0;
  boost::math::quadrature::tanh_sinh<double> integrator;
  double error = 0.0;
  double l1 = 0.0;
  const double value = integrator.integrate(f, lo, hi, kQuadratureTolerance, &error, &l1);
  if (!std::isfinite(value) || error > kQuadratureTolerance * std::max(l1, 1e-300) + 1e-15) {
    std::ostringstream msg;
    msg << what << ": quadrature did not reach relative tolerance 1e-10 (error "
        << error << ", value " << value << ")";
    throw IntegrationError(msg.str());
  }
  return value;
}

// Point beyond which prefactor * int_z^inf w(s) e^{theta s} ds < tol.
double truncation_point(const LevyKernel& kernel, double theta, double prefactor,
                        double tol) {
  const double rate = kernel.theta_hat() - theta;
  double z = 1.0;
  if (kernel.kind() == KernelKind::kGammaOU) z = 1.0 / kernel.b();
  for (int it = 0; it < 200; ++it) {
    if (prefactor * kernel.exponential_tail_bound(z, theta) < tol) return z;
    z += std::max(1.0, 1.0 / rate);
  }
  throw IntegrationError("could not bound the truncated tail of the jump density");
}

}  // namespace

LevyKernel LevyKernel::null() { return LevyKernel(KernelKind::kNull, 0.0, 0.0); }

LevyKernel LevyKernel::gamma_ou(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw std::invalid_argument("GammaOU kernel needs a > 0 and b > 0");
  }
  return LevyKernel(KernelKind::kGammaOU, a, b);
}

LevyKernel LevyKernel::inverse_gaussian_ou(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw std::invalid_argument("InverseGaussianOU kernel needs a > 0 and b > 0");
  }
  return LevyKernel(KernelKind::kInverseGaussianOU, a, b);
}

std::string LevyKernel::name() const {
  std::ostringstream out;
  switch (kind_) {
    case KernelKind::kNull:
      return "null";
    case KernelKind::kGammaOU:
      out << "gamma(a=" << a_ << ",b=" << b_ << ")";
      break;
    case KernelKind::kInverseGaussianOU:
      out << "inverse_gaussian(a=" << a_ << ",b=" << b_ << ")";
      break;
  }
  return out.str();
}

double LevyKernel::theta_hat() const {
  switch (kind_) {
    case KernelKind::kNull:
      return kInf;
    case KernelKind::kGammaOU:
      return b_;
    case KernelKind::kInverseGaussianOU:
      return 0.5 * b_ * b_;
  }
  return kInf;
}

double LevyKernel::density(double z) const {
  if (!(z > 0.0)) return 0.0;
  switch (kind_) {
    case KernelKind::kNull:
      return 0.0;
    case KernelKind::kGammaOU:
      return a_ * b_ * std::exp(-b_ * z);
    case KernelKind::kInverseGaussianOU: {
      const double c = 0.5 * b_ * b_;
      return ig_prefactor(a_) * std::pow(z, -1.5) * (1.0 + b_ * b_ * z) * std::exp(-c * z);
    }
  }
  return 0.0;
}

double LevyKernel::cumulant(double theta) const {
  if (kind_ == KernelKind::kNull) return 0.0;
  if (!(theta < theta_hat())) {
    std::ostringstream msg;
    msg << "cumulant of " << name() << " diverges for theta = " << theta
        << " >= theta_hat = " << theta_hat();
    throw DomainError(msg.str());
  }
  if (kind_ == KernelKind::kGammaOU) return a_ * theta / (b_ - theta);
  return a_ * theta / std::sqrt(b_ * b_ - 2.0 * theta);
}

double LevyKernel::moment(int n) const {
  if (n < 1) throw std::invalid_argument("moment order must be >= 1");
  return partial_moment(n, 0.0, kInf);
}

double LevyKernel::partial_moment(int n, double lo, double hi) const {
  if (n < 0) throw std::invalid_argument("moment order must be >= 0");
  lo = std::max(lo, 0.0);
  if (!(hi > lo)) return 0.0;
  switch (kind_) {
    case KernelKind::kNull:
      return 0.0;
    case KernelKind::kGammaOU: {
      // a b int z^n e^{-bz} = a b^{-n} Gamma-segment(n+1, b lo, b hi)
      return a_ * std::pow(b_, -n) * gamma_segment(n + 1.0, b_ * lo, b_ * hi);
    }
    case KernelKind::kInverseGaussianOU: {
      if (n == 0 && lo == 0.0) return kInf;
      const double c = 0.5 * b_ * b_;
      return ig_prefactor(a_) * (ig_power_segment(n, c, lo, hi) +
                                 b_ * b_ * ig_power_segment(n + 1, c, lo, hi));
    }
  }
  return 0.0;
}

double LevyKernel::tail_mass(double z) const {
  if (kind_ == KernelKind::kNull) return 0.0;
  z = std::max(z, 1e-300);
  return partial_moment(0, z, kInf) + partial_moment(1, z, kInf);
}

double LevyKernel::exponential_tail_bound(double z, double theta) const {
  switch (kind_) {
    case KernelKind::kNull:
      return 0.0;
    case KernelKind::kGammaOU:
      return a_ * b_ * std::exp((theta - b_) * z) / (b_ - theta);
    case KernelKind::kInverseGaussianOU: {
      // For s >= 1: s^{-3/2} (1 + b^2 s) <= 1 + b^2.
      const double c = 0.5 * b_ * b_;
      const double zz = std::max(z, 1.0);
      double bound = ig_prefactor(a_) * (1.0 + b_ * b_) * std::exp((theta - c) * zz) / (c - theta);
      if (z < 1.0) {
        bound += partial_moment(0, std::max(z, 1e-300), 1.0) * std::exp(std::max(theta, 0.0));
      }
      return bound;
    }
  }
  return 0.0;
}

EmmTilt EmmTilt::exponential(double gamma) {
  if (!(gamma >= 0.0)) throw std::invalid_argument("exponential tilt needs gamma >= 0");
  EmmTilt tilt;
  tilt.multiplier = [gamma](double z) { return std::exp(-gamma * z); };
  tilt.bound = 1.0;
  return tilt;
}

double cumulant(const LevyKernel& kernel, double theta) { return kernel.cumulant(theta); }

double moment(const LevyKernel& kernel, int n) { return kernel.moment(n); }

double tilted_cumulant(const LevyKernel& kernel, const EmmTilt& tilt, double theta) {
  if (tilt.is_identity() || kernel.is_null()) return kernel.cumulant(theta);
  if (!(theta < kernel.theta_hat())) {
    std::ostringstream msg;
    msg << "tilted cumulant of " << kernel.name() << " not certified finite for theta = "
        << theta << " >= theta_hat = " << kernel.theta_hat();
    throw DomainError(msg.str());
  }
  const double theta_pos = std::max(theta, 0.0);
  const double cut = truncation_point(kernel, theta_pos, tilt.bound, kTruncationTolerance);
  auto f = [&](double z) { return std::expm1(theta * z) * tilt(z) * kernel.density(z); };
  return integrate_finite(f, 0.0, cut, "tilted cumulant");
}

double tilt_hellinger(const LevyKernel& kernel, const EmmTilt& tilt) {
  if (tilt.is_identity() || kernel.is_null()) return 0.0;
  const double growth = std::sqrt(std::max(tilt.bound, 1.0)) + 1.0;
  const double cut = truncation_point(kernel, 0.0, growth * growth, kTruncationTolerance);
  auto f = [&](double z) {
    const double d = std::sqrt(tilt(z)) - 1.0;
    return d * d * kernel.density(z);
  };
  return integrate_finite(f, 0.0, cut, "tilt admissibility integral");
}

ConditionReport validate_conditions(const LevyKernel& kernel, double threshold,
                                    int max_probes) {
  ConditionReport report;
  report.theta_hat = kernel.theta_hat();
  report.c2.passed = report.theta_hat > 0.0;
  {
    std::ostringstream d;
    d << "theta_hat = " << report.theta_hat;
    report.c2.detail = d.str();
  }
  if (kernel.is_null()) {
    report.c3.passed = false;
    report.c3.detail = "kappa is identically zero; no divergence";
    return report;
  }
  double previous = -kInf;
  bool monotone = true;
  for (int k = 1; k <= max_probes; ++k) {
    const double theta = report.theta_hat * (1.0 - std::ldexp(1.0, -k));
    if (!(theta < report.theta_hat)) break;
    const double kappa = kernel.cumulant(theta);
    report.probe_theta.push_back(theta);
    report.probe_kappa.push_back(kappa);
    if (!(kappa > previous)) monotone = false;
    previous = kappa;
    if (kappa > threshold) break;
  }
  report.c3.passed = monotone && previous > threshold;
  std::ostringstream d;
  d << report.probe_kappa.size() << " probes, last kappa = " << previous
    << (monotone ? ", strictly increasing" : ", NOT monotone");
  report.c3.detail = d.str();
  return report;
}

JumpMeasure::JumpMeasure(LevyKernel kernel, EmmTilt tilt)
    : kernel_(std::move(kernel)), tilt_(std::move(tilt)) {
  if (!tilt_.is_identity() && !(tilt_.bound > 0.0)) {
    throw std::invalid_argument("tilt bound must be positive");
  }
}

double JumpMeasure::density(double z) const { return tilt_(z) * kernel_.density(z); }

double JumpMeasure::cumulant(double theta) const {
  return tilted_cumulant(kernel_, tilt_, theta);
}

double JumpMeasure::moment(int n) const {
  if (n < 1) throw std::invalid_argument("moment order must be >= 1");
  return partial_moment(n, 0.0, kInf);
}

double JumpMeasure::partial_moment(int n, double lo, double hi) const {
  if (tilt_.is_identity() || kernel_.is_null()) return kernel_.partial_moment(n, lo, hi);
  lo = std::max(lo, 0.0);
  if (!(hi > lo)) return 0.0;
  if (n == 0 && lo == 0.0 && !kernel_.finite_activity()) return kInf;
  // z^n <= n! / eta^n e^{eta z}
  const double eta = 0.5 * kernel_.theta_hat();
  const double factor = std::tgamma(n + 1.0) / std::pow(eta, n) * tilt_.bound;
  const double cut = std::min(hi, truncation_point(kernel_, eta, factor, kTruncationTolerance));
  auto f = [&](double z) { return std::pow(z, n) * density(z); };
  return integrate_finite(f, lo, std::max(cut, lo), "tilted moment");
}

double JumpMeasure::tail_mass(double z) const {
  return kernel_.tail_mass(z) * (tilt_.is_identity() ? 1.0 : tilt_.bound);
}

double bdlp_quantile(const LevyKernel& kernel, double s, double q) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("quantile level must lie in (0, 1)");
  if (kernel.is_null() || s <= 0.0) return 0.0;
  if (kernel.kind() == KernelKind::kGammaOU) {
    const double rate = kernel.a() * s;
    auto cdf = [&](double z) {
      double p0 = std::exp(-rate);
      double total = p0;
      double weight = p0;
      for (int n = 1; n < 10000; ++n) {
        weight *= rate / n;
        total += weight * boost::math::gamma_p(static_cast<double>(n), kernel.b() * z);
        if (weight < 1e-17 && n > rate) break;
      }
      return total;
    };
    if (cdf(0.0) >= q) return 0.0;
    double hi = 1.0 / kernel.b();
    while (cdf(hi) < q) hi *= 2.0;
    double lo = 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (cdf(mid) < q ? lo : hi) = mid;
    }
    return hi;
  }
  // P(Z_s > z) <= exp(s kappa(theta) - theta z)
  const double log_tail = std::log(1.0 - q);
  auto level = [&](double theta) { return (s * kernel.cumulant(theta) - log_tail) / theta; };
  const double th = kernel.theta_hat();
  const auto best = boost::math::tools::brent_find_minima(level, 1e-9 * th, th * (1.0 - 1e-9), 40);
  return best.second;
}

}  // namespace bns
