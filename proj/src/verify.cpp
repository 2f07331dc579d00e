#include "bns/verify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "bns/black_scholes.hpp"
#include "bns/errors.hpp"
#include "bns/generator.hpp"

namespace bns {

namespace {

enum CheckStream : std::uint64_t { kCumulantStream = 10, kMartingaleStream = 11, kIdentityStream = 12 };

std::string fmt(double x) {
  std::ostringstream s;
  s << std::setprecision(6) << x;
  return s.str();
}

// Index of the node of `nodes` equal to y up to rounding, or npos.
std::size_t match(const std::vector<double>& nodes, double y) {
  const double tol = 1e-12 * std::max(1.0, std::abs(y));
  const auto it = std::lower_bound(nodes.begin(), nodes.end(), y - tol);
  if (it != nodes.end() && std::abs(*it - y) <= tol) return static_cast<std::size_t>(it - nodes.begin());
  return std::string::npos;
}

void require_nested(const Grid& fine, const Grid& coarse) {
  if (fine.nx() != 2 * coarse.nx() - 1 || fine.nt() != 2 * coarse.nt()) {
    throw GridMismatch("coarse grid is not a coarsening of the fine grid");
  }
}

// max |fine - coarse| over shared nodes with t < T and v accepted by `keep`.
double increment(const ValueSurface& fine, const ValueSurface& coarse,
                 const std::function<bool(double)>& keep) {
  const Grid& f = fine.grid();
  const Grid& c = coarse.grid();
  require_nested(f, c);
  double worst = 0.0;
  for (std::size_t jc = 0; jc < c.nv(); ++jc) {
    if (!keep(c.v[jc])) continue;
    const std::size_t jf = match(f.v, c.v[jc]);
    if (jf == std::string::npos) continue;
    for (std::size_t n = 0; n < c.nt(); ++n) {
      for (std::size_t i = 0; i < c.nx(); ++i) {
        worst = std::max(worst, std::abs(fine.at(2 * n, 2 * i, jf) - coarse.at(n, i, jc)));
      }
    }
  }
  return worst;
}

double probe_value(const ValueSurface& s, const Probe& p) { return s.value(p.x, p.v, p.t); }

// Keeps the report closest to failing: largest measured / (bound + budget).
struct Worst {
  CheckReport report;
  double score = -std::numeric_limits<double>::infinity();
  bool any = false;
  void offer(const CheckReport& r) {
    const double allowed = r.bound + r.budget.total();
    double s = 0.0;
    if (allowed > 0.0) {
      s = r.measured / allowed;
    } else if (r.measured > 0.0) {
      s = std::numeric_limits<double>::infinity();
    }
    if (!any || s > score) {
      report = r;
      score = s;
      any = true;
    }
  }
};

}  // namespace

std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::kPass:
      return "pass";
    case CheckStatus::kFail:
      return "fail";
    case CheckStatus::kNotApplicable:
      return "n/a";
    case CheckStatus::kWarn:
      return "warn";
  }
  return "fail";
}

CheckReport make_report(std::string name, double measured, double bound, ErrorBudget budget,
                        std::string detail) {
  CheckReport r;
  r.name = std::move(name);
  r.measured = measured;
  r.bound = bound;
  r.budget = budget;
  r.detail = std::move(detail);
  r.status = measured <= bound + budget.total() ? CheckStatus::kPass : CheckStatus::kFail;
  return r;
}

CheckReport not_applicable(std::string name, std::string detail) {
  CheckReport r;
  r.name = std::move(name);
  r.status = CheckStatus::kNotApplicable;
  r.detail = std::move(detail);
  return r;
}

CheckReport check_oracle_agreement(const ValueSurface& fine, const ValueSurface& coarse,
                                   const BnsModel& model, const std::vector<Probe>& probes,
                                   const McOptions& mc) {
  Worst worst;
  for (const Probe& p : probes) {
    McOptions o = mc;
    o.t0 = p.t;
    McEstimate e;
    if (fine.american()) {
      e = price_american(model, fine.payoff(), p.x, p.v, o).estimate;
    } else {
      e = price_european(model, fine.payoff(), p.x, p.v, o);
    }
    const double uf = probe_value(fine, p);
    const double uc = probe_value(coarse, p);
    ErrorBudget b;
    b.grid = std::abs(uf - uc);
    b.stat = 3.0 * e.std_error;
    std::ostringstream d;
    d << "probe (" << p.x << ", " << p.v << ", " << p.t << "): grid " << fmt(uf) << " coarse "
      << fmt(uc) << " mc " << fmt(e.value) << " +- " << fmt(e.std_error) << " ("
      << e.n_paths << " paths, " << e.n_exercise_dates << " dates); budget/value "
      << fmt(b.total() / std::max(std::abs(uf), 1e-300));
    worst.offer(make_report("oracle_agreement", std::abs(uf - e.value), 0.0, b, d.str()));
  }
  if (!worst.any) return not_applicable("oracle_agreement", "no probes");
  return worst.report;
}

LipschitzFit fit_lipschitz(const ValueSurface& s) {
  const Grid& g = s.grid();
  LipschitzFit m;
  for (std::size_t n = 0; n <= g.nt(); ++n) {
    for (std::size_t j = 0; j < g.nv(); ++j) {
      for (std::size_t i = 0; i + 1 < g.nx(); ++i) {
        m.cx = std::max(m.cx, std::abs(s.at(n, i + 1, j) - s.at(n, i, j)) / (g.x[i + 1] - g.x[i]));
      }
      if (j + 1 == g.nv()) continue;
      const double dv = g.v[j + 1] - g.v[j];
      for (std::size_t i = 0; i < g.nx(); ++i) {
        m.cv = std::max(m.cv, std::abs(s.at(n, i, j + 1) - s.at(n, i, j)) / (dv + std::sqrt(dv)));
      }
    }
  }
  return m;
}

CheckReport check_lipschitz_modulus(const std::vector<const ValueSurface*>& surfaces,
                                    double stability) {
  if (surfaces.size() < 2) return not_applicable("lipschitz_modulus", "needs two grids");
  std::vector<LipschitzFit> fits;
  for (const ValueSurface* s : surfaces) fits.push_back(fit_lipschitz(*s));
  double lo = fits.front().c();
  double hi = lo;
  std::ostringstream d;
  d << "C (Cx, Cv) per grid:";
  for (const LipschitzFit& m : fits) {
    lo = std::min(lo, m.c());
    hi = std::max(hi, m.c());
    d << " " << fmt(m.c()) << " (" << fmt(m.cx) << ", " << fmt(m.cv) << ")";
  }
  // Moduli at rounding level count as zero.
  constexpr double kFloor = 1e-10;
  const double spread = std::max(hi, kFloor) / std::max(lo, kFloor) - 1.0;
  const double k = surfaces.back()->payoff().lipschitz();
  const double cx = fits.back().cx;
  const double cx_budget = std::abs(cx - fits[fits.size() - 2].cx);
  d << "; payoff K " << fmt(k) << ", fine Cx - K " << fmt(cx - k) << " vs budget " << fmt(cx_budget);
  CheckReport r = make_report("lipschitz_modulus", spread, stability, {}, d.str());
  if (cx > k + cx_budget + 1e-12) r.status = CheckStatus::kFail;
  return r;
}

CheckReport check_comparison(const ValueSurface& u1, const ValueSurface& u2, double r,
                             double epsilon, double tolerance) {
  const Grid& g = u1.grid();
  if (!g.same_nodes(u2.grid())) throw GridMismatch("comparison needs surfaces on one grid");
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n <= g.nt(); ++n) {
    const double allowance = epsilon * std::exp(r * (g.T - g.time(n)));
    const double* a = u1.level(n);
    const double* b = u2.level(n);
    for (std::size_t k = 0; k < g.size(); ++k) worst = std::max(worst, a[k] - b[k] - allowance);
  }
  ErrorBudget b;
  b.penalty = tolerance;
  return make_report("comparison", worst, 0.0, b,
                     "max of u1 - u2 - eps e^{r(T-t)} with eps = " + fmt(epsilon));
}

CheckReport check_obstacle(const ValueSurface& u, double tolerance) {
  const Grid& g = u.grid();
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n <= g.nt(); ++n) {
    for (std::size_t j = 0; j < g.nv(); ++j) {
      for (std::size_t i = 0; i < g.nx(); ++i) worst = std::max(worst, u.obstacle(i) - u.at(n, i, j));
    }
  }
  ErrorBudget b;
  b.penalty = tolerance;
  return make_report("obstacle_dominance", worst, 0.0, b, "max of h - u over all nodes");
}

CheckReport check_time_monotone(const ValueSurface& u, double tolerance) {
  const Grid& g = u.grid();
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < g.nt(); ++n) {
    const double* now = u.level(n);
    const double* later = u.level(n + 1);
    for (std::size_t k = 0; k < g.size(); ++k) worst = std::max(worst, later[k] - now[k]);
  }
  ErrorBudget b;
  b.penalty = tolerance;
  return make_report("time_monotone", worst, 0.0, b, "max of u(t') - u(t), t < t'");
}

namespace {

// max of a - b over the nodes of `a` that are also nodes of `b`.
double max_excess(const ValueSurface& a, const ValueSurface& b) {
  const Grid& ga = a.grid();
  const Grid& gb = b.grid();
  if (ga.nx() != gb.nx() || ga.nt() != gb.nt()) throw GridMismatch("surfaces differ in x or t");
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t ja = 0; ja < ga.nv(); ++ja) {
    const std::size_t jb = match(gb.v, ga.v[ja]);
    if (jb == std::string::npos) continue;
    for (std::size_t n = 0; n <= ga.nt(); ++n) {
      for (std::size_t i = 0; i < ga.nx(); ++i) worst = std::max(worst, a.at(n, i, ja) - b.at(n, i, jb));
    }
  }
  return worst;
}

}  // namespace

CheckReport check_localization_order(const ValueSurface& full,
                                     const std::vector<LocalizedPair>& ladder, double tolerance) {
  if (ladder.empty()) return not_applicable("localization_order", "no delta ladder");
  std::vector<LocalizedPair> sorted = ladder;
  std::sort(sorted.begin(), sorted.end(),
            [](const LocalizedPair& a, const LocalizedPair& b) { return a.delta > b.delta; });
  double worst = -std::numeric_limits<double>::infinity();
  std::ostringstream d;
  d << "max(u^delta - u):";
  for (const LocalizedPair& p : sorted) {
    const double e = max_excess(*p.fine, full);
    worst = std::max(worst, e);
    d << " " << fmt(e) << " (delta " << p.delta << ")";
  }
  d << "; max(u^delta1 - u^delta2), delta1 > delta2:";
  for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
    const double e = max_excess(*sorted[k].fine, *sorted[k + 1].fine);
    worst = std::max(worst, e);
    d << " " << fmt(e);
  }
  ErrorBudget b;
  b.penalty = tolerance;
  return make_report("localization_order", worst, 0.0, b, d.str());
}

CheckReport check_localization_far(const ValueSurface& full_fine, const ValueSurface& full_coarse,
                                   const std::vector<LocalizedPair>& ladder, double lambda) {
  if (ladder.empty()) return not_applicable("localization_far", "no delta ladder");
  Worst worst;
  const Grid& g = full_fine.grid();
  for (const LocalizedPair& p : ladder) {
    const double v_far = p.delta * std::exp(lambda * g.T);
    auto far = [&](double v) { return v > v_far; };
    const Grid& gl = p.fine->grid();
    double gap = 0.0;
    for (std::size_t jl = 0; jl < gl.nv(); ++jl) {
      if (!far(gl.v[jl])) continue;
      const std::size_t j = match(g.v, gl.v[jl]);
      if (j == std::string::npos) continue;
      for (std::size_t n = 0; n < g.nt(); ++n) {
        for (std::size_t i = 0; i < g.nx(); ++i) {
          gap = std::max(gap, std::abs(p.fine->at(n, i, jl) - full_fine.at(n, i, j)));
        }
      }
    }
    ErrorBudget b;
    b.grid = increment(full_fine, full_coarse, far) + increment(*p.fine, *p.coarse, far);
    std::ostringstream d;
    d << "delta " << p.delta << ": max |u^delta - u| over v > " << fmt(v_far) << " is "
      << fmt(gap) << ", two-grid increments sum " << fmt(b.grid);
    worst.offer(make_report("localization_far", gap, 0.0, b, d.str()));
  }
  return worst.report;
}

CheckReport check_dpp_residual(const ValueSurface& fine, const ValueSurface& coarse,
                               const BnsModel& model, const std::vector<Probe>& probes,
                               double epsilon, std::size_t n_paths, std::uint64_t seed,
                               unsigned threads) {
  Worst worst;
  std::string all;
  for (std::size_t k = 0; k < probes.size(); ++k) {
    const Probe& p = probes[k];
    const std::uint64_t s = splitmix64(seed + k);
    const DppResult rf = check_dpp(fine, model, p.x, p.v, p.t, epsilon, n_paths, s, threads);
    const DppResult rc = check_dpp(coarse, model, p.x, p.v, p.t, epsilon, n_paths, s, threads);
    ErrorBudget b;
    b.stat = 3.0 * rf.std_error;
    b.grid = std::abs(rf.residual - rc.residual);
    std::ostringstream d;
    d << "probe (" << p.x << ", " << p.v << ", " << p.t << "): residual " << fmt(rf.residual)
      << " +- " << fmt(rf.std_error) << ", coarse " << fmt(rc.residual) << ", u " << fmt(rf.surface_value)
      << ", mean tau " << fmt(rf.mean_tau) << ", stopped at start " << rf.stopped_at_start
      << ", off grid " << rf.out_of_grid << "/" << rf.n_paths;
    all += (all.empty() ? "" : "; ") + d.str();
    worst.offer(make_report("dpp_residual", std::abs(rf.residual), 0.0, b, d.str()));
  }
  if (!worst.any) return not_applicable("dpp_residual", "no probes");
  worst.report.detail = all;
  return worst.report;
}

CheckReport check_generator(const BnsModel& model, const Grid& coarse, const Grid& fine, double x,
                            double v, const QuadratureOptions& quadrature, double floor) {
  const JumpQuadrature qc = build_jump_quadrature(model.measure(), quadrature_for(coarse, model, quadrature));
  const JumpQuadrature qf = build_jump_quadrature(model.measure(), quadrature_for(fine, model, quadrature));
  auto error = [&](TestFunction f, const Grid& g, const JumpQuadrature& q) {
    const auto [i, j] = nearest_node(g, x, v);
    const double num = apply_generator(test_function(f), g, model, q, g.x[i], g.v[j]);
    return std::abs(num - analytic_generator(f, model, g.x[i], g.v[j]));
  };
  const std::pair<TestFunction, const char*> fs[] = {{TestFunction::kOne, "1"},
                                                     {TestFunction::kX, "x"},
                                                     {TestFunction::kV, "v"},
                                                     {TestFunction::kXSquared, "x^2"}};
  Worst worst;
  std::ostringstream all;
  for (const auto& [f, label] : fs) {
    const double ec = error(f, coarse, qc);
    const double ef = error(f, fine, qf);
    all << " " << label << ": " << fmt(ec) << " -> " << fmt(ef) << ";";
    worst.offer(make_report("generator_consistency", ef, 0.55 * ec + floor, {}, ""));
  }
  worst.report.detail = "errors coarse -> fine:" + all.str();
  return worst.report;
}

CheckReport check_no_early_exercise(const ValueSurface& american_fine,
                                    const ValueSurface& american_coarse,
                                    const ValueSurface& european_fine,
                                    const ValueSurface& european_coarse,
                                    const std::vector<Probe>& probes, double tolerance) {
  Worst worst;
  for (const Probe& p : probes) {
    const double af = probe_value(american_fine, p);
    const double ef = probe_value(european_fine, p);
    ErrorBudget b;
    b.grid = std::abs(af - probe_value(american_coarse, p)) + std::abs(ef - probe_value(european_coarse, p));
    b.penalty = tolerance;
    std::ostringstream d;
    d << "probe (" << p.x << ", " << p.v << ", " << p.t << "): american " << fmt(af) << " european "
      << fmt(ef);
    worst.offer(make_report("no_early_exercise", std::abs(af - ef), 0.0, b, d.str()));
  }
  if (!worst.any) return not_applicable("no_early_exercise", "no probes");
  const Grid& g = american_fine.grid();
  std::size_t exercised = 0;
  for (std::size_t n = 0; n < g.nt(); ++n) {
    for (std::size_t j = 1; j < g.nv(); ++j) {
      for (std::size_t i = 1; i + 1 < g.nx(); ++i) exercised += american_fine.exercised(n, i, j) ? 1 : 0;
    }
  }
  CheckReport r = worst.report;
  r.detail += "; exercised interior nodes " + std::to_string(exercised);
  if (exercised > 0) r.status = CheckStatus::kFail;
  return r;
}

CheckReport check_closed_form_ipde(const ValueSurface& european, const BnsModel& null_model,
                                   double x0, double v0, double tolerance) {
  const ModelParams& p = null_model.params();
  const double strike = european.payoff().strike();
  const double bs = black_scholes_put(std::exp(x0), strike, p.r, p.T, v0 * null_model.eps(p.T));
  const double u = european.value(x0, v0, 0.0);
  const Grid& g = european.grid();
  std::ostringstream d;
  d << "grid " << g.nx() << "x" << g.nv() << "x" << g.nt() << ": " << fmt(u) << " vs Black-Scholes "
    << fmt(bs);
  return make_report("closed_form_ipde", std::abs(u / bs - 1.0), tolerance, {}, d.str());
}

CheckReport check_closed_form_mc(const BnsModel& null_model, const Payoff& put, double x0,
                                 double v0, std::size_t n_paths, std::uint64_t seed,
                                 unsigned threads) {
  const ModelParams& p = null_model.params();
  const double bs = black_scholes_put(std::exp(x0), put.strike(), p.r, p.T, v0 * null_model.eps(p.T));
  McOptions o;
  o.n_paths = n_paths;
  o.seed = seed;
  o.threads = threads;
  const McEstimate e = price_european(null_model, put, x0, v0, o);
  ErrorBudget b;
  b.stat = 3.0 * e.std_error;
  return make_report("closed_form_mc", std::abs(e.value - bs), 0.0, b,
                     "mc " + fmt(e.value) + " +- " + fmt(e.std_error) + " vs Black-Scholes " + fmt(bs));
}

CheckReport check_cumulant_quadrature(const LevyKernel& kernel, const std::vector<double>& thetas,
                                      double tolerance) {
  if (kernel.is_null()) return not_applicable("cumulant_quadrature", "null kernel");
  Worst worst;
  std::ostringstream all;
  for (double th : thetas) {
    auto f = [&](double z) {
      const double w = kernel.density(z);
      return w == 0.0 ? 0.0 : std::expm1(th * z) * w;
    };
    boost::math::quadrature::tanh_sinh<double> near;
    boost::math::quadrature::exp_sinh<double> far;
    const double q = near.integrate(f, 0.0, 1.0, 1e-14) + far.integrate(f, 1.0, std::numeric_limits<double>::infinity(), 1e-14);
    const double k = cumulant(kernel, th);
    all << " theta " << th << ": " << fmt(k) << " vs " << fmt(q) << ";";
    worst.offer(make_report("cumulant_quadrature", std::abs(k - q), tolerance, {}, ""));
  }
  worst.report.detail = "closed form vs quadrature:" + all.str();
  return worst.report;
}

CheckReport check_cumulant_mc(const LevyKernel& kernel, const std::vector<double>& thetas,
                              std::size_t draws, std::uint64_t seed) {
  if (kernel.is_null()) return not_applicable("cumulant_mc", "null kernel");
  const BnsModel unit(ModelParams{}, kernel);
  std::vector<double> z(draws);
  for (std::size_t p = 0; p < draws; ++p) {
    Rng rng = make_stream(seed, kCumulantStream, p);
    const JumpPath path = simulate_bdlp(unit, 1.0, rng);
    CompensatedSum s;
    for (double j : path.sizes) s.add(j);
    s.add(path.drift_rate);
    z[p] = s.value();
  }
  Worst worst;
  std::ostringstream all;
  for (double th : thetas) {
    std::vector<double> e(draws);
    for (std::size_t p = 0; p < draws; ++p) e[p] = std::exp(th * z[p]);
    const SampleStats s = sample_stats(e);
    const double target = std::exp(cumulant(kernel, th));
    ErrorBudget b;
    b.stat = 3.0 * s.std_error;
    all << " theta " << th << ": log mean " << fmt(std::log(s.mean)) << " vs " << fmt(cumulant(kernel, th)) << ";";
    worst.offer(make_report("cumulant_mc", std::abs(s.mean - target), 0.0, b, ""));
  }
  worst.report.detail = "MC of e^{theta Z_1} (" + std::to_string(draws) + " draws):" + all.str();
  return worst.report;
}

CheckReport check_kernel_conditions(const LevyKernel& kernel) {
  if (kernel.is_null()) return not_applicable("kernel_conditions", "null kernel has no jumps");
  const ConditionReport c = validate_conditions(kernel);
  CheckReport r;
  r.name = "kernel_conditions";
  r.status = c.all_passed() ? CheckStatus::kPass : CheckStatus::kFail;
  r.measured = c.probe_kappa.empty() ? 0.0 : c.probe_kappa.back();
  r.bound = c.theta_hat;
  r.detail = "C2: " + c.c2.detail + "; C3: " + c.c3.detail;
  return r;
}

CheckReport check_path_identity(const BnsModel& model, double v0, std::size_t n_paths,
                                std::size_t n_times, std::uint64_t seed, double tolerance) {
  const ModelParams& p = model.params();
  std::vector<double> times(n_times);
  for (std::size_t k = 0; k < n_times; ++k) {
    times[k] = p.T * static_cast<double>(k + 1) / static_cast<double>(n_times);
  }
  double worst = 0.0;
  for (std::size_t path = 0; path < n_paths; ++path) {
    Rng rng = make_stream(seed, kIdentityStream, path);
    const PathSample s = simulate_path(model, 0.0, v0, times, rng);
    for (std::size_t k = 0; k < s.t.size(); ++k) {
      worst = std::max(worst, std::abs(p.lambda * s.v_star[k] - (v0 - s.v[k] + s.z_cum[k])));
    }
  }
  return make_report("path_identity", worst, tolerance, {},
                     std::to_string(n_paths) + " paths x " + std::to_string(n_times) + " times");
}

CheckReport check_martingale(const BnsModel& model, double x0, double v0, std::size_t n_paths,
                             std::uint64_t seed, unsigned threads) {
  const ModelParams& p = model.params();
  const std::vector<double> times{p.T};
  const double disc = std::exp(-p.r * p.T);
  std::vector<double> y(n_paths);
  parallel_for(n_paths, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      Rng rng = make_stream(seed, kMartingaleStream, k);
      double x = 0.0;
      double v = 0.0;
      simulate_states(model, x0, v0, times, rng, &x, &v);
      y[k] = disc * std::exp(x);
    }
  });
  const SampleStats s = sample_stats(y);
  ErrorBudget b;
  b.stat = 3.0 * s.std_error;
  return make_report("martingale", std::abs(s.mean - std::exp(x0)), 0.0, b,
                     "mean e^{-rT} S_T " + fmt(s.mean) + " +- " + fmt(s.std_error) + " vs S_0 " +
                         fmt(std::exp(x0)));
}

CheckReport check_extrapolated_mass(const ValueSurface& u, double threshold) {
  const double f = u.diagnostics.extrapolated_mass_fraction;
  CheckReport r = make_report("extrapolated_mass", f, threshold, {},
                              "jump mass above v_max from the lower half of the v-range; v_max " +
                                  fmt(u.grid().v.back()));
  if (r.status == CheckStatus::kFail) {
    r.status = CheckStatus::kWarn;
    r.detail += "; v_max looks too small, enlarge grid.v_max";
  }
  return r;
}

std::vector<Probe> default_dpp_probes(double x0, double v0, double T, double v_max) {
  const double cap = 0.5 * (v0 + v_max);
  return {{x0, v0, 0.0}, {x0, std::min(2.0 * v0, cap), 0.25 * T}, {x0, std::min(3.0 * v0, cap), 0.5 * T}};
}

std::vector<CheckReport> run_suite(const SuiteSettings& st) {
  const BnsModel model(st.params, st.kernel, st.tilt);
  const bool null_kernel = st.kernel.is_null();
  const bool put = st.payoff.kind() == PayoffKind::kPut;
  const unsigned threads = resolve_threads(st.threads);
  std::vector<Probe> probes = st.probes;
  if (probes.empty()) probes.push_back({st.x0, st.v0, 0.0});

  SolverOptions american = st.solver;
  american.american = true;
  american.boundary_shift = 0.0;
  SolverOptions european = american;
  european.american = false;
  SolverOptions raised = american;
  raised.boundary_shift = st.comparison_epsilon;

  GridSpec spec = st.grid;
  spec.delta = 0.0;
  const Grid fine = make_grid(spec, model, st.payoff, st.x0, st.v0);
  const Grid coarse = fine.coarsened();
  std::vector<Probe> dpp_probes = st.dpp_probes;
  if (dpp_probes.empty()) dpp_probes = default_dpp_probes(st.x0, st.v0, st.params.T, fine.v.back());
  std::optional<Grid> coarser;
  try {
    coarser = coarse.coarsened();
  } catch (const GridMismatch&) {
  }

  ModelParams p0 = st.params;
  p0.r = 0.0;
  const BnsModel model0(p0, st.kernel, st.tilt);
  const BnsModel null_model(st.params, LevyKernel::null());
  GridSpec null_spec = spec;
  null_spec.nv = st.closed_form_nv;
  null_spec.v_max = std::numeric_limits<double>::quiet_NaN();

  // Surfaces, solved as independent tasks.
  ValueSurface u_f, u_c, u_cc, u_raised, am0_f, am0_c, eu0_f, eu0_c, null_eu;
  std::vector<ValueSurface> loc_f(st.deltas.size()), loc_c(st.deltas.size());
  std::vector<std::function<void()>> solves;
  solves.push_back([&] { u_f = solve(fine, model, st.payoff, american); });
  solves.push_back([&] { u_c = solve(coarse, model, st.payoff, american); });
  if (coarser) solves.push_back([&] { u_cc = solve(*coarser, model, st.payoff, american); });
  solves.push_back([&] { u_raised = solve(fine, model, st.payoff, raised); });
  for (std::size_t k = 0; k < st.deltas.size(); ++k) {
    solves.push_back([&, k] { loc_f[k] = solve_localized(fine, st.deltas[k], model, st.payoff, american); });
    solves.push_back([&, k] { loc_c[k] = solve_localized(coarse, st.deltas[k], model, st.payoff, american); });
  }
  solves.push_back([&] { am0_f = solve(fine, model0, st.payoff, american); });
  solves.push_back([&] { am0_c = solve(coarse, model0, st.payoff, american); });
  solves.push_back([&] { eu0_f = solve(fine, model0, st.payoff, european); });
  solves.push_back([&] { eu0_c = solve(coarse, model0, st.payoff, european); });
  if (put) {
    solves.push_back([&] {
      const Grid g = make_grid(null_spec, null_model, st.payoff, st.x0, st.v0);
      null_eu = solve(g, null_model, st.payoff, european);
    });
  }
  parallel_for(solves.size(), threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) solves[k]();
  });

  std::vector<LocalizedPair> ladder;
  for (std::size_t k = 0; k < st.deltas.size(); ++k) ladder.push_back({st.deltas[k], &loc_f[k], &loc_c[k]});

  std::vector<double> q_thetas = st.cumulant_thetas;
  std::vector<double> mc_thetas = st.cumulant_thetas;
  if (!null_kernel && q_thetas.empty()) {
    const double th = st.kernel.theta_hat();
    q_thetas = {-th, -0.5 * th, -0.25 * th, 0.25 * th, 0.5 * th, 0.95 * th};
    mc_thetas = {-th, -0.5 * th, -0.25 * th, 0.25 * th, 0.45 * th};
  }

  McOptions mc = st.mc;
  const std::uint64_t seed = st.mc.seed;
  std::vector<std::function<CheckReport()>> checks;
  checks.push_back([&] { return check_kernel_conditions(st.kernel); });
  checks.push_back([&] { return check_cumulant_quadrature(st.kernel, q_thetas); });
  checks.push_back([&] { return check_cumulant_mc(st.kernel, mc_thetas, st.cumulant_draws, seed); });
  checks.push_back([&] { return check_path_identity(model, st.v0, st.identity_paths, st.identity_times, seed); });
  checks.push_back([&] { return check_martingale(model, st.x0, st.v0, st.martingale_paths, seed, 1); });
  checks.push_back([&] {
    return put ? check_closed_form_ipde(null_eu, null_model, st.x0, st.v0)
               : not_applicable("closed_form_ipde", "closed form needs a put");
  });
  checks.push_back([&] {
    return put ? check_closed_form_mc(null_model, st.payoff, st.x0, st.v0, st.closed_form_paths, seed, 1)
               : not_applicable("closed_form_mc", "closed form needs a put");
  });
  checks.push_back([&] { return check_obstacle(u_f, american.penalty_tolerance); });
  checks.push_back([&] {
    McOptions o = mc;
    o.threads = 1;
    return check_oracle_agreement(u_f, u_c, model, probes, o);
  });
  checks.push_back([&] {
    return check_comparison(u_raised, u_f, st.params.r, st.comparison_epsilon, american.penalty_tolerance);
  });
  checks.push_back([&] { return check_localization_order(u_f, ladder, american.penalty_tolerance); });
  checks.push_back([&] { return check_localization_far(u_f, u_c, ladder, st.params.lambda); });
  checks.push_back([&] {
    std::vector<const ValueSurface*> levels;
    if (coarser) levels.push_back(&u_cc);
    levels.push_back(&u_c);
    levels.push_back(&u_f);
    return check_lipschitz_modulus(levels, st.lipschitz_stability);
  });
  checks.push_back([&] {
    return check_dpp_residual(u_f, u_c, model, dpp_probes, st.dpp_epsilon * st.payoff.strike(),
                              st.dpp_paths, seed, 1);
  });
  checks.push_back([&] { return check_generator(model, coarse, fine, st.x0, st.v0, st.solver.quadrature); });
  checks.push_back([&] {
    return check_no_early_exercise(am0_f, am0_c, eu0_f, eu0_c, probes, american.penalty_tolerance);
  });
  checks.push_back([&] { return check_time_monotone(u_f, american.penalty_tolerance); });
  checks.push_back([&] { return check_extrapolated_mass(u_f, st.mass_warning); });

  std::vector<CheckReport> reports(checks.size());
  parallel_for(checks.size(), threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) reports[k] = checks[k]();
  });
  if (null_kernel) {
    for (CheckReport& r : reports) {
      if (r.name == "extrapolated_mass") r = not_applicable(r.name, "null kernel has no jumps");
    }
  }
  return reports;
}

bool all_passed(const std::vector<CheckReport>& reports) {
  return std::all_of(reports.begin(), reports.end(), [](const CheckReport& r) {
    return r.status != CheckStatus::kFail;
  });
}

void write_suite_csv(const std::vector<CheckReport>& reports, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "check,status,measured,bound,budget_grid,budget_stat,budget_penalty,detail\n";
  out << std::setprecision(10);
  for (const CheckReport& r : reports) {
    std::string detail = r.detail;
    std::replace(detail.begin(), detail.end(), '"', '\'');
    out << r.name << ',' << to_string(r.status) << ',' << r.measured << ',' << r.bound << ','
        << r.budget.grid << ',' << r.budget.stat << ',' << r.budget.penalty << ",\"" << detail
        << "\"\n";
  }
}

}  // namespace bns
