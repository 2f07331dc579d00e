#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace bns {

enum class KernelKind { kNull, kGammaOU, kInverseGaussianOU };

/// Lévy density w of the background driving Lévy process (BDLP).
///
/// GammaOU(a, b): w(z) = a b exp(-b z), the BDLP of an OU process with
/// stationary Gamma(a, b) law. Finite activity (total mass a).
///
/// InverseGaussianOU(a, b): w(z) = a / (2 sqrt(2 pi)) z^{-3/2} (1 + b^2 z)
/// exp(-b^2 z / 2), the BDLP of an OU process with stationary IG(a, b) law.
/// Infinite activity, finite first moment.
///
/// Null: Z == 0. The variance then decays deterministically.
class LevyKernel {
 public:
  static LevyKernel null();
  static LevyKernel gamma_ou(double a, double b);
  static LevyKernel inverse_gaussian_ou(double a, double b);

  KernelKind kind() const { return kind_; }
  double a() const { return a_; }
  double b() const { return b_; }
  bool is_null() const { return kind_ == KernelKind::kNull; }
  bool finite_activity() const { return kind_ != KernelKind::kInverseGaussianOU; }
  std::string name() const;

  /// Supremum of the finite domain of the cumulant transform.
  double theta_hat() const;

  double density(double z) const;

  /// kappa(theta) = int (e^{theta z} - 1) W(dz). Throws DomainError for
  /// theta >= theta_hat.
  double cumulant(double theta) const;

  /// mu_n = int z^n W(dz), n >= 1.
  double moment(int n) const;

  /// int_lo^hi z^n W(dz) in closed form (hi may be +inf). For n == 0 on an
  /// infinite-activity kernel lo must be positive.
  double partial_moment(int n, double lo, double hi) const;

  /// int_z^inf (1 + s) W(ds).
  double tail_mass(double z) const;

  /// Upper bound on w(s) e^{theta s} integrated over [z, inf), theta < theta_hat.
  double exponential_tail_bound(double z, double theta) const;

 private:
  LevyKernel(KernelKind kind, double a, double b) : kind_(kind), a_(a), b_(b) {}

  KernelKind kind_;
  double a_;
  double b_;
};

/// Structure-preserving measure change: under the pricing measure the Lévy
/// density is y(z) w(z). An empty multiplier is the identity tilt.
struct EmmTilt {
  std::function<double(double)> multiplier;
  /// Declared sup of the multiplier; used for tail bounds and thinning.
  double bound = 1.0;

  static EmmTilt identity() { return {}; }
  /// y(z) = exp(-gamma z), gamma >= 0.
  static EmmTilt exponential(double gamma);

  bool is_identity() const { return !multiplier; }
  double operator()(double z) const { return multiplier ? multiplier(z) : 1.0; }
};

double cumulant(const LevyKernel& kernel, double theta);
double moment(const LevyKernel& kernel, int n);

/// kappa^y(theta) = int (e^{theta z} - 1) y(z) w(z) dz. Closed form for the
/// identity tilt, adaptive quadrature to relative tolerance 1e-10 otherwise.
double tilted_cumulant(const LevyKernel& kernel, const EmmTilt& tilt, double theta);

/// int (sqrt(y) - 1)^2 w dz; finite exactly when the tilt is admissible.
double tilt_hellinger(const LevyKernel& kernel, const EmmTilt& tilt);

struct ConditionCheck {
  bool passed = false;
  std::string detail;
};

struct ConditionReport {
  ConditionCheck c2;  // theta_hat > 0
  ConditionCheck c3;  // kappa diverges at theta_hat
  double theta_hat = 0.0;
  std::vector<double> probe_theta;
  std::vector<double> probe_kappa;
  bool all_passed() const { return c2.passed && c3.passed; }
};

/// Probes kappa along theta_k = theta_hat (1 - 2^-k), k = 1, 2, ..., stopping
/// once kappa exceeds `threshold` or after `max_probes` points.
ConditionReport validate_conditions(const LevyKernel& kernel,
                                    double threshold = 1e6, int max_probes = 50);

/// Lévy measure seen by the pricer: the kernel under a tilt. Dispatches to
/// closed forms for the identity tilt and to quadrature otherwise.
class JumpMeasure {
 public:
  explicit JumpMeasure(LevyKernel kernel, EmmTilt tilt = EmmTilt::identity());

  const LevyKernel& kernel() const { return kernel_; }
  const EmmTilt& tilt() const { return tilt_; }
  bool is_null() const { return kernel_.is_null(); }
  bool finite_activity() const { return kernel_.finite_activity(); }
  double theta_hat() const { return kernel_.theta_hat(); }

  double density(double z) const;
  double cumulant(double theta) const;
  double moment(int n) const;
  double partial_moment(int n, double lo, double hi) const;
  double tail_mass(double z) const;

 private:
  LevyKernel kernel_;
  EmmTilt tilt_;
};

/// q-quantile of Z_s (s in BDLP time, i.e. lambda * T). Exact series for the
/// Gamma kernel, Chernoff upper bound otherwise.
double bdlp_quantile(const LevyKernel& kernel, double s, double q);

}  // namespace bns
