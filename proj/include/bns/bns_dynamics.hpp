#pragma once

#include <cstdint>
#include <vector>

#include "bns/levy_kernel.hpp"
#include "bns/numerics.hpp"

namespace bns {

struct ModelParams {
  double lambda = 1.0;
  double rho = 0.0;
  double r = 0.0;
  double T = 1.0;
  // Physical-measure drift parameters; carried for reporting only.
  double mu = 0.0;
  double beta = 0.0;

  void validate() const;
};

/// Model under the pricing measure: parameters, BDLP kernel and tilt.
class BnsModel {
 public:
  BnsModel(ModelParams params, LevyKernel kernel, EmmTilt tilt = EmmTilt::identity(),
           double small_jump_cutoff = 1e-6);

  const ModelParams& params() const { return params_; }
  const JumpMeasure& measure() const { return measure_; }
  const LevyKernel& kernel() const { return measure_.kernel(); }
  const EmmTilt& tilt() const { return measure_.tilt(); }
  double small_jump_cutoff() const { return small_jump_cutoff_; }

  double kappa_rho() const { return kappa_rho_; }
  double mean_jump() const { return mu1_; }
  double second_moment() const { return mu2_; }
  /// r - lambda kappa^y(rho): deterministic part of the log-price drift.
  double drift_constant() const { return params_.r - params_.lambda * kappa_rho_; }
  /// Girsanov drift of B^Q relative to B^P at variance v; reporting only.
  double girsanov_drift(double v) const;

  /// eps(t) = (1 - e^{-lambda t}) / lambda.
  double eps(double t) const;

 private:
  ModelParams params_;
  JumpMeasure measure_;
  double small_jump_cutoff_;
  double kappa_rho_ = 0.0;
  double mu1_ = 0.0;
  double mu2_ = 0.0;
};

/// Jumps of t -> Z_{lambda t} on [0, horizon] in calendar time. For
/// infinite-activity kernels the jumps below `truncation` are replaced by
/// the deterministic rate `drift_rate` (per unit calendar time).
struct JumpPath {
  std::vector<double> times;
  std::vector<double> sizes;
  double horizon = 0.0;
  double drift_rate = 0.0;
  double truncation = 0.0;
  // lambda * int_0^truncation z^2 W(dz): variance rate dropped by truncation.
  double truncated_variance_rate = 0.0;
};

JumpPath simulate_bdlp(const BnsModel& model, double horizon, Rng& rng);

/// V_t = v0 e^{-lambda t} + sum_{s_i <= t} e^{-lambda (t - s_i)} J_i.
double evolve_v(double v0, const ModelParams& params, const JumpPath& jumps, double t);
std::vector<double> evolve_v(double v0, const ModelParams& params, const JumpPath& jumps,
                             const std::vector<double>& times);

/// V*_t = v0 eps(t) + sum_{s_i <= t} eps(t - s_i) J_i.
double integrated_variance(double v0, const ModelParams& params, const JumpPath& jumps,
                           double t);

/// Z_{lambda t}.
double cumulative_z(const JumpPath& jumps, double t);

/// Exact draw of X_t given the jump path; consumes one normal from `brownian`.
double evolve_x(double x0, double v0, const BnsModel& model, const JumpPath& jumps,
                Rng& brownian, double t);

struct PathSample {
  std::vector<double> jump_times;
  std::vector<double> jump_sizes;
  std::vector<double> t;
  std::vector<double> v;
  std::vector<double> v_star;
  std::vector<double> x;
  std::vector<double> z_cum;
};

/// One path observed at ascending `times` (all >= 0). Jumps are drawn over
/// [0, times.back()], then the state is advanced exactly from event to event.
PathSample simulate_path(const BnsModel& model, double x0, double v0,
                         const std::vector<double>& times, Rng& rng);

/// Same draw as simulate_path, keeping only (X, V) at the requested times.
void simulate_states(const BnsModel& model, double x0, double v0,
                     const std::vector<double>& times, Rng& rng, double* x_out,
                     double* v_out);

}  // namespace bns
