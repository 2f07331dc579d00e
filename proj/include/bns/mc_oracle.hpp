#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "bns/bns_dynamics.hpp"
#include "bns/payoff.hpp"
#include "bns/surface.hpp"

namespace bns {

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_paths = 0;
  std::size_t n_exercise_dates = 0;
  double wall_ms = 0.0;
};

/// Regression basis in (X - x0, V). The minimum admissible set is
/// {1, X, X^2, V, X V, h(X)}; v_squared adds V^2.
struct BasisSpec {
  int x_degree = 2;
  bool v_terms = true;
  bool v_squared = false;
  bool payoff_term = true;
  // Regress on in-the-money paths only.
  bool itm_only = true;

  void validate() const;
  std::size_t size() const;
};

/// Continuation-value regressions, one per exercise date except the last.
class StoppingRule {
 public:
  StoppingRule() = default;
  StoppingRule(BasisSpec basis, Payoff payoff, double x_ref, double start,
               std::vector<double> dates);

  const BasisSpec& basis() const { return basis_; }
  double start() const { return start_; }
  const std::vector<double>& dates() const { return dates_; }
  const std::vector<double>& coefficients(std::size_t k) const { return coef_[k]; }
  void set_coefficients(std::size_t k, std::vector<double> c) { coef_[k] = std::move(c); }

  void features(double x, double v, double* out) const;
  /// Estimated continuation value at date k, discounted to that date.
  double continuation(std::size_t k, double x, double v) const;
  /// Exercise iff h(x) > 0 and either k is the last date or h(x) >= continuation.
  bool exercise(std::size_t k, double x, double v) const;

 private:
  BasisSpec basis_;
  Payoff payoff_ = Payoff::constant(0.0);
  double x_ref_ = 0.0;
  double start_ = 0.0;
  std::vector<double> dates_;
  std::vector<std::vector<double>> coef_;
};

struct McOptions {
  std::size_t n_paths = 200000;
  std::size_t n_dates = 50;
  BasisSpec basis;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  // Valuation time; exercise dates are t0 + k (T - t0) / n_dates, k = 1..n_dates.
  double t0 = 0.0;
  // Discounted stock at the exercise time as a control variate on the pricing paths.
  bool control_variate = true;
};

struct AmericanResult {
  // Independent re-simulation under the frozen rule (low-biased).
  McEstimate estimate;
  // Value recursion max(h, C) on the regression paths.
  McEstimate in_sample;
  // e^{-r(T - t0)} h(X_T) on the regression paths.
  McEstimate european_in_sample;
  StoppingRule rule;
  std::size_t ridge_fallbacks = 0;
};

/// Mean and standard error of e^{-r(T - t0)} h(X_T) over n_paths paths.
McEstimate price_european(const BnsModel& model, const Payoff& payoff, double x0, double v0,
                          const McOptions& options);

/// Longstaff-Schwartz backward induction on one path set, then pricing on
/// an independent path set. With n_dates = 1 the pricing paths and the
/// result coincide with price_european.
AmericanResult price_american(const BnsModel& model, const Payoff& payoff, double x0, double v0,
                              const McOptions& options);

struct DppResult {
  double residual = 0.0;
  double std_error = 0.0;
  double surface_value = 0.0;
  std::size_t n_paths = 0;
  std::size_t out_of_grid = 0;
  // Paths with tau = 0 and mean of tau.
  std::size_t stopped_at_start = 0;
  double mean_tau = 0.0;
};

/// E[e^{-r tau} u(X_tau, V_tau, t + tau)] - u(x0, v0, t) with tau the first
/// surface time level at which u - h <= epsilon, or T. Paths leaving the
/// grid are clamped to it and counted.
DppResult check_dpp(const ValueSurface& surface, const BnsModel& model, double x0, double v0,
                    double t, double epsilon, std::size_t n_paths, std::uint64_t seed,
                    unsigned threads = 1);

}  // namespace bns
