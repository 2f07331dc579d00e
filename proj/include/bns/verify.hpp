#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bns/bns_dynamics.hpp"
#include "bns/grid.hpp"
#include "bns/ipde_solver.hpp"
#include "bns/mc_oracle.hpp"
#include "bns/payoff.hpp"
#include "bns/surface.hpp"

namespace bns {

enum class CheckStatus { kPass, kFail, kNotApplicable, kWarn };

std::string to_string(CheckStatus s);

struct ErrorBudget {
  double grid = 0.0;
  double stat = 0.0;
  double penalty = 0.0;
  double total() const { return grid + stat + penalty; }
};

/// One verified inequality: pass iff measured <= bound + budget.total().
struct CheckReport {
  std::string name;
  CheckStatus status = CheckStatus::kNotApplicable;
  double measured = 0.0;
  double bound = 0.0;
  ErrorBudget budget;
  std::string detail;

  bool passed() const { return status == CheckStatus::kPass || status == CheckStatus::kWarn; }
};

/// Sets status from measured, bound and budget.
CheckReport make_report(std::string name, double measured, double bound, ErrorBudget budget,
                        std::string detail = {});
CheckReport not_applicable(std::string name, std::string detail);

struct Probe {
  double x = 0.0;
  double v = 0.0;
  double t = 0.0;
};

/// Probe value on the fine grid against LSMC (or plain MC for a European
/// surface) at each probe; budget 3 s.e. + |u_fine - u_coarse| per probe.
/// Reports the probe with the least slack.
CheckReport check_oracle_agreement(const ValueSurface& fine, const ValueSurface& coarse,
                                   const BnsModel& model, const std::vector<Probe>& probes,
                                   const McOptions& mc);

/// Smallest constants with |du| <= cx |dx| along x and |du| <= cv (|dv| + sqrt|dv|)
/// along v over adjacent node pairs, all time levels.
struct LipschitzFit {
  double cx = 0.0;
  double cv = 0.0;
  double c() const { return cx > cv ? cx : cv; }
};
LipschitzFit fit_lipschitz(const ValueSurface& surface);

/// Smallest C with |du| <= C (|dx| + |dv| + sqrt|dv|) over adjacent node
/// pairs of each surface (ordered coarse to fine). Passes when C varies by
/// at most `stability` across the surfaces and the x-constant on the finest
/// surface exceeds the payoff's K by no more than its own two-grid change.
CheckReport check_lipschitz_modulus(const std::vector<const ValueSurface*>& surfaces,
                                    double stability = 0.2);

/// max over nodes of u1 - u2 - epsilon e^{r (T - t)}; bound 0 plus tolerance.
CheckReport check_comparison(const ValueSurface& u1, const ValueSurface& u2, double r,
                             double epsilon, double tolerance = 1e-6);

/// max over nodes of h - u.
CheckReport check_obstacle(const ValueSurface& u, double tolerance = 1e-6);

/// max over nodes of u(t') - u(t) for t < t'.
CheckReport check_time_monotone(const ValueSurface& u, double tolerance = 1e-6);

struct LocalizedPair {
  double delta = 0.0;
  const ValueSurface* fine = nullptr;
  const ValueSurface* coarse = nullptr;
};

/// u^delta <= u nodewise and u^delta nondecreasing as delta decreases, both
/// within `tolerance`.
CheckReport check_localization_order(const ValueSurface& full, const std::vector<LocalizedPair>& ladder,
                                     double tolerance = 1e-6);

/// max |u^delta - u| over {v > delta e^{lambda T}, t < T} against the sum of
/// the two-grid increments of u and u^delta over the same region.
CheckReport check_localization_far(const ValueSurface& full_fine, const ValueSurface& full_coarse,
                                   const std::vector<LocalizedPair>& ladder, double lambda);

/// |DPP residual| on the fine surface against 3 s.e. plus the change of the
/// residual between the two grids (same paths).
CheckReport check_dpp_residual(const ValueSurface& fine, const ValueSurface& coarse,
                               const BnsModel& model, const std::vector<Probe>& probes,
                               double epsilon, std::size_t n_paths, std::uint64_t seed,
                               unsigned threads = 1);

/// Discrete generator against the closed forms for 1, x, v, x^2 at the node
/// nearest (x, v) of each grid; the fine-grid error must shrink at first
/// order: err_fine <= 0.55 err_coarse + floor.
CheckReport check_generator(const BnsModel& model, const Grid& coarse, const Grid& fine, double x,
                            double v, const QuadratureOptions& quadrature = {},
                            double floor = 1e-8);

/// With r = 0: |American - European| at the probes within the two surfaces'
/// two-grid increments, and no exercised node off the grid edges.
CheckReport check_no_early_exercise(const ValueSurface& american_fine,
                                    const ValueSurface& american_coarse,
                                    const ValueSurface& european_fine,
                                    const ValueSurface& european_coarse,
                                    const std::vector<Probe>& probes, double tolerance = 1e-6);

/// Null kernel European put against Black-Scholes with total variance
/// v0 eps(T): relative error of the grid value.
CheckReport check_closed_form_ipde(const ValueSurface& european, const BnsModel& null_model,
                                   double x0, double v0, double tolerance = 5e-3);
CheckReport check_closed_form_mc(const BnsModel& null_model, const Payoff& put, double x0,
                                 double v0, std::size_t n_paths, std::uint64_t seed,
                                 unsigned threads = 1);

/// Closed-form kappa against direct quadrature of (e^{theta z} - 1) w(z).
CheckReport check_cumulant_quadrature(const LevyKernel& kernel, const std::vector<double>& thetas,
                                      double tolerance = 1e-9);
/// mean of e^{theta Z_1} against e^{kappa(theta)} within 3 s.e.
CheckReport check_cumulant_mc(const LevyKernel& kernel, const std::vector<double>& thetas,
                              std::size_t draws, std::uint64_t seed);

CheckReport check_kernel_conditions(const LevyKernel& kernel);

/// max |lambda V*_t - (v0 - V_t + Z_{lambda t})| over paths and times.
CheckReport check_path_identity(const BnsModel& model, double v0, std::size_t n_paths,
                                std::size_t n_times, std::uint64_t seed,
                                double tolerance = 1e-10);

/// |mean e^{-rT} e^{X_T} - e^{x0}| against 3 s.e.
CheckReport check_martingale(const BnsModel& model, double x0, double v0, std::size_t n_paths,
                             std::uint64_t seed, unsigned threads = 1);

/// Warns when the extrapolated jump mass of a solve exceeds `threshold`.
CheckReport check_extrapolated_mass(const ValueSurface& u, double threshold = 1e-2);

struct SuiteSettings {
  ModelParams params;
  LevyKernel kernel = LevyKernel::null();
  EmmTilt tilt = EmmTilt::identity();
  Payoff payoff = Payoff::put(1.0);
  double x0 = 0.0;
  double v0 = 0.04;
  GridSpec grid;
  SolverOptions solver;
  McOptions mc;
  std::vector<Probe> probes;      // empty: (x0, v0, 0)
  std::vector<Probe> dpp_probes;  // empty: default_dpp_probes
  double comparison_epsilon = 0.01;
  std::vector<double> deltas{0.01, 0.005, 0.0025};
  double dpp_epsilon = 0.05;  // multiple of the strike
  std::size_t dpp_paths = 100000;
  std::size_t closed_form_nv = 11;
  std::size_t closed_form_paths = 100000;
  std::size_t martingale_paths = 200000;
  std::size_t identity_paths = 10000;
  std::size_t identity_times = 100;
  std::size_t cumulant_draws = 100000;
  std::vector<double> cumulant_thetas;  // empty: fractions of theta_hat
  double lipschitz_stability = 0.2;
  double mass_warning = 1e-2;
  unsigned threads = 1;
};

/// (x0, v0, 0), (x0, 2 v0, T/4), (x0, 3 v0, T/2) with v capped at (v0 + v_max) / 2.
std::vector<Probe> default_dpp_probes(double x0, double v0, double T, double v_max);

/// Runs every check on the configured model; reports come back in a fixed order.
std::vector<CheckReport> run_suite(const SuiteSettings& settings);

bool all_passed(const std::vector<CheckReport>& reports);

/// CSV: check, status, measured, bound, budget_grid, budget_stat, budget_penalty, detail.
void write_suite_csv(const std::vector<CheckReport>& reports, const std::string& path);

}  // namespace bns
