#include "bns/mc_oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "bns/errors.hpp"

namespace bns {

namespace {

enum Stream : std::uint64_t { kRegressionStream = 1, kPricingStream = 2, kDppStream = 3 };

constexpr std::size_t kBlock = 8192;
constexpr double kRidge = 1e-10;

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
      .count();
}

McEstimate to_estimate(const std::vector<double>& samples, std::size_t dates) {
  const SampleStats s = sample_stats(samples);
  McEstimate e;
  e.value = s.mean;
  e.std_error = s.std_error;
  e.n_paths = samples.size();
  e.n_exercise_dates = dates;
  return e;
}

// Control variate c = e^{-r tau} e^{X_tau} - e^{x0}, mean zero by optional
// stopping. The coefficient is fitted on the same sample.
McEstimate controlled_estimate(const std::vector<double>& y, const std::vector<double>& c,
                               std::size_t dates) {
  const SampleStats sy = sample_stats(y);
  const SampleStats sc = sample_stats(c);
  CompensatedSum cov;
  CompensatedSum var;
  for (std::size_t p = 0; p < y.size(); ++p) {
    cov.add((y[p] - sy.mean) * (c[p] - sc.mean));
    var.add((c[p] - sc.mean) * (c[p] - sc.mean));
  }
  const double beta = var.value() > 0.0 ? cov.value() / var.value() : 0.0;
  std::vector<double> z(y.size());
  for (std::size_t p = 0; p < y.size(); ++p) z[p] = y[p] - beta * c[p];
  return to_estimate(z, dates);
}

// Exercise dates relative to t0; the last one is the horizon itself.
std::vector<double> relative_dates(double horizon, std::size_t n) {
  std::vector<double> d(n);
  for (std::size_t k = 0; k < n; ++k) {
    d[k] = k + 1 == n ? horizon
                      : horizon * static_cast<double>(k + 1) / static_cast<double>(n);
  }
  return d;
}

double horizon_of(const BnsModel& model, double t0) {
  const double h = model.params().T - t0;
  if (!(t0 >= 0.0) || !(h > 0.0)) throw DomainError("valuation time must lie in [0, T)");
  return h;
}

}  // namespace

void BasisSpec::validate() const {
  if (x_degree < 2 || !v_terms || !payoff_term) {
    throw DomainError("basis must contain at least {1, X, X^2, V, X V, h(X)}");
  }
  if (size() > 16) throw DomainError("basis is limited to 16 functions");
}

std::size_t BasisSpec::size() const {
  return 1 + static_cast<std::size_t>(std::max(x_degree, 0)) + (v_terms ? 2 : 0) +
         (v_squared ? 1 : 0) + (payoff_term ? 1 : 0);
}

StoppingRule::StoppingRule(BasisSpec basis, Payoff payoff, double x_ref, double start,
                           std::vector<double> dates)
    : basis_(basis),
      payoff_(std::move(payoff)),
      x_ref_(x_ref),
      start_(start),
      dates_(std::move(dates)),
      coef_(dates_.size()) {}

void StoppingRule::features(double x, double v, double* out) const {
  const double d = x - x_ref_;
  std::size_t c = 0;
  out[c++] = 1.0;
  double p = 1.0;
  for (int k = 1; k <= basis_.x_degree; ++k) {
    p *= d;
    out[c++] = p;
  }
  if (basis_.v_terms) {
    out[c++] = v;
    out[c++] = d * v;
  }
  if (basis_.v_squared) out[c++] = v * v;
  if (basis_.payoff_term) out[c++] = payoff_(x);
}

double StoppingRule::continuation(std::size_t k, double x, double v) const {
  const std::vector<double>& c = coef_[k];
  if (c.empty()) return std::numeric_limits<double>::infinity();
  double f[16];
  features(x, v, f);
  double s = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) s += c[i] * f[i];
  return s;
}

bool StoppingRule::exercise(std::size_t k, double x, double v) const {
  const double h = payoff_(x);
  if (h <= 0.0) return false;
  if (k + 1 == dates_.size()) return true;
  return h >= continuation(k, x, v);
}

McEstimate price_european(const BnsModel& model, const Payoff& payoff, double x0, double v0,
                          const McOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  if (opt.n_paths < 2) throw DomainError("price_european needs at least 2 paths");
  const double horizon = horizon_of(model, opt.t0);
  const double disc = std::exp(-model.params().r * horizon);
  const std::vector<double> times{horizon};
  const double s0 = std::exp(x0);
  std::vector<double> y(opt.n_paths), c(opt.n_paths);
  parallel_for(opt.n_paths, opt.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      Rng rng = make_stream(opt.seed, kPricingStream, p);
      double x = 0.0;
      double v = 0.0;
      simulate_states(model, x0, v0, times, rng, &x, &v);
      y[p] = disc * payoff(x);
      c[p] = disc * std::exp(x) - s0;
    }
  });
  McEstimate e = opt.control_variate ? controlled_estimate(y, c, 1) : to_estimate(y, 1);
  e.wall_ms = elapsed_ms(start);
  return e;
}

AmericanResult price_american(const BnsModel& model, const Payoff& payoff, double x0, double v0,
                              const McOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  if (opt.n_paths < 2) throw DomainError("price_american needs at least 2 paths");
  if (opt.n_dates < 1) throw DomainError("price_american needs at least one exercise date");
  opt.basis.validate();
  const double horizon = horizon_of(model, opt.t0);
  const double r = model.params().r;
  const std::size_t n = opt.n_dates;
  const std::size_t np = opt.n_paths;
  const std::vector<double> dates = relative_dates(horizon, n);
  std::vector<double> abs_dates(n);
  for (std::size_t k = 0; k < n; ++k) abs_dates[k] = opt.t0 + dates[k];

  AmericanResult out;
  out.rule = StoppingRule(opt.basis, payoff, x0, opt.t0, abs_dates);
  StoppingRule& rule = out.rule;

  // Regression paths, stored [path][date].
  std::vector<double> xs(np * n), vs(np * n);
  parallel_for(np, opt.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      Rng rng = make_stream(opt.seed, kRegressionStream, p);
      simulate_states(model, x0, v0, dates, rng, &xs[p * n], &vs[p * n]);
    }
  });

  // cash: realised cash flow under the rule; value: max(h, fitted) recursion.
  // Both are kept discounted to the current date.
  std::vector<double> cash(np), value(np), hk(np);
  std::vector<double> euro(np);
  const double disc_all = std::exp(-r * horizon);
  for (std::size_t p = 0; p < np; ++p) {
    const double h = payoff(xs[p * n + n - 1]);
    cash[p] = h;
    value[p] = h;
    euro[p] = disc_all * h;
  }

  const std::size_t nb = opt.basis.size();
  const std::size_t nblocks = (np + kBlock - 1) / kBlock;
  using Matrix = Eigen::MatrixXd;
  using Vector = Eigen::VectorXd;
  std::vector<Matrix> block_gram(nblocks);
  std::vector<Matrix> block_rhs(nblocks);
  std::vector<std::size_t> block_count(nblocks);

  for (std::size_t k = n - 1; k-- > 0;) {
    const double disc = std::exp(-r * (dates[k + 1] - dates[k]));
    for (std::size_t p = 0; p < np; ++p) {
      cash[p] *= disc;
      value[p] *= disc;
      hk[p] = payoff(xs[p * n + k]);
    }
    auto regressed = [&](std::size_t p) { return !opt.basis.itm_only || hk[p] > 0.0; };

    // Column scales from the regressed set, accumulated in block order.
    std::vector<Vector> block_sq(nblocks, Vector::Zero(static_cast<Eigen::Index>(nb)));
    parallel_for(nblocks, opt.threads, [&](std::size_t b0, std::size_t b1) {
      double f[16];
      for (std::size_t b = b0; b < b1; ++b) {
        Vector& sq = block_sq[b];
        std::size_t count = 0;
        for (std::size_t p = b * kBlock; p < std::min(np, (b + 1) * kBlock); ++p) {
          if (!regressed(p)) continue;
          rule.features(xs[p * n + k], vs[p * n + k], f);
          for (std::size_t c = 0; c < nb; ++c) sq[static_cast<Eigen::Index>(c)] += f[c] * f[c];
          ++count;
        }
        block_count[b] = count;
      }
    });
    std::size_t m = 0;
    Vector scale = Vector::Zero(static_cast<Eigen::Index>(nb));
    for (std::size_t b = 0; b < nblocks; ++b) {
      scale += block_sq[b];
      m += block_count[b];
    }
    if (m == 0) continue;  // nothing in the money: the rule never exercises here
    for (Eigen::Index c = 0; c < scale.size(); ++c) {
      scale[c] = scale[c] > 0.0 ? std::sqrt(scale[c] / static_cast<double>(m)) : 1.0;
    }

    parallel_for(nblocks, opt.threads, [&](std::size_t b0, std::size_t b1) {
      double f[16];
      for (std::size_t b = b0; b < b1; ++b) {
        Matrix& g = block_gram[b];
        Matrix& y = block_rhs[b];
        g.setZero(static_cast<Eigen::Index>(nb), static_cast<Eigen::Index>(nb));
        y.setZero(static_cast<Eigen::Index>(nb), 2);
        for (std::size_t p = b * kBlock; p < std::min(np, (b + 1) * kBlock); ++p) {
          if (!regressed(p)) continue;
          rule.features(xs[p * n + k], vs[p * n + k], f);
          for (std::size_t c = 0; c < nb; ++c) f[c] /= scale[static_cast<Eigen::Index>(c)];
          for (std::size_t a = 0; a < nb; ++a) {
            const auto ia = static_cast<Eigen::Index>(a);
            for (std::size_t c = 0; c <= a; ++c) g(ia, static_cast<Eigen::Index>(c)) += f[a] * f[c];
            y(ia, 0) += f[a] * cash[p];
            y(ia, 1) += f[a] * value[p];
          }
        }
      }
    });
    Matrix gram = Matrix::Zero(static_cast<Eigen::Index>(nb), static_cast<Eigen::Index>(nb));
    Matrix rhs = Matrix::Zero(static_cast<Eigen::Index>(nb), 2);
    for (std::size_t b = 0; b < nblocks; ++b) {
      gram += block_gram[b];
      rhs += block_rhs[b];
    }
    gram = gram.selfadjointView<Eigen::Lower>();

    Eigen::LDLT<Matrix> ldlt(gram);
    const bool singular = ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
                          !(ldlt.rcond() > 1e-14);
    if (singular) {
      ++out.ridge_fallbacks;
      gram.diagonal().array() += kRidge * gram.diagonal().maxCoeff();
      ldlt.compute(gram);
      if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
        throw RegressionError("normal equations singular even after ridge shift");
      }
    }
    const Matrix beta = ldlt.solve(rhs);
    if (!beta.allFinite()) throw RegressionError("non-finite regression coefficients");

    std::vector<double> ls(nb), tvr(nb);
    for (std::size_t c = 0; c < nb; ++c) {
      const auto ic = static_cast<Eigen::Index>(c);
      ls[c] = beta(ic, 0) / scale[ic];
      tvr[c] = beta(ic, 1) / scale[ic];
    }
    rule.set_coefficients(k, ls);

    for (std::size_t p = 0; p < np; ++p) {
      if (!regressed(p)) continue;
      double f[16];
      rule.features(xs[p * n + k], vs[p * n + k], f);
      double c_ls = 0.0;
      double c_tvr = 0.0;
      for (std::size_t c = 0; c < nb; ++c) {
        c_ls += ls[c] * f[c];
        c_tvr += tvr[c] * f[c];
      }
      if (hk[p] > 0.0 && hk[p] >= c_ls) cash[p] = hk[p];
      value[p] = std::max(hk[p], c_tvr);
    }
  }

  const double first = std::exp(-r * dates[0]);
  for (std::size_t p = 0; p < np; ++p) value[p] *= first;
  out.in_sample = to_estimate(value, n);
  out.european_in_sample = to_estimate(euro, 1);

  // Pricing paths: the same stream as price_european.
  std::vector<double> priced(np), control(np);
  const double s0 = std::exp(x0);
  std::vector<double> discount(n);
  for (std::size_t k = 0; k < n; ++k) discount[k] = std::exp(-r * dates[k]);
  parallel_for(np, opt.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> px(n), pv(n);
    for (std::size_t p = begin; p < end; ++p) {
      Rng rng = make_stream(opt.seed, kPricingStream, p);
      simulate_states(model, x0, v0, dates, rng, px.data(), pv.data());
      double y = 0.0;
      std::size_t stop = n - 1;
      for (std::size_t k = 0; k < n; ++k) {
        if (rule.exercise(k, px[k], pv[k])) {
          y = discount[k] * payoff(px[k]);
          stop = k;
          break;
        }
      }
      priced[p] = y;
      control[p] = discount[stop] * std::exp(px[stop]) - s0;
    }
  });
  out.estimate = opt.control_variate ? controlled_estimate(priced, control, n)
                                     : to_estimate(priced, n);
  out.estimate.wall_ms = elapsed_ms(start);
  return out;
}

DppResult check_dpp(const ValueSurface& surface, const BnsModel& model, double x0, double v0,
                    double t, double epsilon, std::size_t n_paths, std::uint64_t seed,
                    unsigned threads) {
  const Grid& g = surface.grid();
  const Payoff& h = surface.payoff();
  const double r = model.params().r;
  if (!(t >= 0.0) || !(t < g.T)) throw DomainError("check_dpp: t must lie in [0, T)");
  if (n_paths < 2) throw DomainError("check_dpp needs at least 2 paths");

  DppResult out;
  out.n_paths = n_paths;
  out.surface_value = surface.value(x0, v0, t);
  if (out.surface_value - h(x0) <= epsilon) {
    out.stopped_at_start = n_paths;
    return out;
  }

  std::vector<std::size_t> levels;
  std::vector<double> rel;
  for (std::size_t n = 0; n <= g.nt(); ++n) {
    if (g.time(n) > t + 1e-12 * g.T) {
      levels.push_back(n);
      rel.push_back(g.time(n) - t);
    }
  }
  std::vector<double> y(n_paths), tau(n_paths);
  std::vector<char> left(n_paths);
  parallel_for(n_paths, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> px(rel.size()), pv(rel.size());
    for (std::size_t p = begin; p < end; ++p) {
      Rng rng = make_stream(seed, kDppStream, p);
      simulate_states(model, x0, v0, rel, rng, px.data(), pv.data());
      char outside_any = 0;
      for (std::size_t k = 0; k < rel.size(); ++k) {
        bool outside = false;
        const double u = surface.value(px[k], pv[k], g.time(levels[k]), &outside);
        outside_any |= outside ? 1 : 0;
        if (k + 1 == rel.size() || u - h(px[k]) <= epsilon) {
          y[p] = std::exp(-r * rel[k]) * u;
          tau[p] = rel[k];
          break;
        }
      }
      left[p] = outside_any;
    }
  });
  const SampleStats s = sample_stats(y);
  out.residual = s.mean - out.surface_value;
  out.std_error = s.std_error;
  out.mean_tau = sample_stats(tau).mean;
  out.out_of_grid = static_cast<std::size_t>(std::count(left.begin(), left.end(), 1));
  return out;
}

}  // namespace bns
