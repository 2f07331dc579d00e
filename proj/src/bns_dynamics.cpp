#include "bns/bns_dynamics.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

namespace bns {

void ModelParams::validate() const {
  if (!(lambda > 0.0)) throw std::invalid_argument("model.lambda must be > 0");
  if (!(rho <= 0.0)) throw std::invalid_argument("model.rho must be <= 0");
  if (!(r >= 0.0)) throw std::invalid_argument("model.r must be >= 0");
  if (!(T > 0.0)) throw std::invalid_argument("model.T must be > 0");
}

BnsModel::BnsModel(ModelParams params, LevyKernel kernel, EmmTilt tilt,
                   double small_jump_cutoff)
    : params_(params),
      measure_(std::move(kernel), std::move(tilt)),
      small_jump_cutoff_(small_jump_cutoff) {
  params_.validate();
  if (!(small_jump_cutoff_ > 0.0 && small_jump_cutoff_ < 1.0)) {
    throw std::invalid_argument("small-jump cutoff must lie in (0, 1)");
  }
  if (!measure_.is_null()) {
    kappa_rho_ = measure_.cumulant(params_.rho);
    mu1_ = measure_.moment(1);
    mu2_ = measure_.moment(2);
  }
}

double BnsModel::girsanov_drift(double v) const {
  if (!(v > 0.0)) return 0.0;
  const double num = params_.mu + (params_.beta + 0.5) * v - params_.r +
                     params_.lambda * kappa_rho_;
  return num / std::sqrt(v);
}

double BnsModel::eps(double t) const { return -std::expm1(-params_.lambda * t) / params_.lambda; }

namespace {

double eps_of(double lambda, double t) { return -std::expm1(-lambda * t) / lambda; }

// Large-jump sampler for the IG-OU density above the cutoff, written as the
// mixture K z^{-3/2} e^{-cz} + K b^2 z^{-1/2} e^{-cz}.
struct InverseGaussianJumps {
  double cutoff;
  double c;
  double mass_a;
  double mass_b;

  InverseGaussianJumps(const LevyKernel& k, double eps) : cutoff(eps) {
    c = 0.5 * k.b() * k.b();
    const double pref = k.a() / (2.0 * std::sqrt(2.0 * std::numbers::pi));
    const double lo = c * eps;
    const double upper_half = boost::math::tgamma(0.5, lo);
    // int_eps^inf z^{-3/2} e^{-cz} dz = sqrt(c) Gamma(-1/2, c eps)
    const double gamma_minus_half = 2.0 * (std::exp(-lo) / std::sqrt(lo)) - 2.0 * upper_half;
    mass_a = pref * std::sqrt(c) * gamma_minus_half;
    mass_b = pref * k.b() * k.b() * upper_half / std::sqrt(c);
  }

  double total() const { return mass_a + mass_b; }

  double draw(Rng& rng) const {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    if (unif(rng) * total() < mass_a) {
      for (;;) {
        const double u = 1.0 - unif(rng);
        const double z = cutoff / (u * u);
        if (unif(rng) <= std::exp(-c * (z - cutoff))) return z;
      }
    }
    std::gamma_distribution<double> gamma(0.5, 1.0 / c);
    for (;;) {
      const double z = gamma(rng);
      if (z > cutoff) return z;
    }
  }
};

void sort_events(JumpPath& path) {
  std::vector<std::size_t> order(path.times.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return path.times[a] < path.times[b]; });
  std::vector<double> t(order.size()), s(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    t[i] = path.times[order[i]];
    s[i] = path.sizes[order[i]];
  }
  path.times.swap(t);
  path.sizes.swap(s);
}

}  // namespace

JumpPath simulate_bdlp(const BnsModel& model, double horizon, Rng& rng) {
  JumpPath path;
  path.horizon = horizon;
  const LevyKernel& k = model.kernel();
  if (k.is_null() || !(horizon > 0.0)) return path;
  const double lambda = model.params().lambda;
  const EmmTilt& tilt = model.tilt();
  const double bound = tilt.is_identity() ? 1.0 : tilt.bound;

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double rate = 0.0;
  std::optional<InverseGaussianJumps> ig;
  if (k.kind() == KernelKind::kGammaOU) {
    rate = lambda * k.a() * bound;
  } else {
    ig.emplace(k, model.small_jump_cutoff());
    rate = lambda * ig->total() * bound;
    path.truncation = model.small_jump_cutoff();
    path.drift_rate = lambda * model.measure().partial_moment(1, 0.0, path.truncation);
    path.truncated_variance_rate =
        lambda * model.measure().partial_moment(2, 0.0, path.truncation);
  }

  std::poisson_distribution<long> count_dist(rate * horizon);
  const long n = count_dist(rng);
  path.times.reserve(n);
  path.sizes.reserve(n);
  std::exponential_distribution<double> exp_dist(k.b());
  for (long i = 0; i < n; ++i) {
    const double t = horizon * unif(rng);
    const double z = k.kind() == KernelKind::kGammaOU ? exp_dist(rng) : ig->draw(rng);
    if (!tilt.is_identity() && unif(rng) * bound > tilt(z)) continue;
    path.times.push_back(t);
    path.sizes.push_back(z);
  }
  sort_events(path);
  return path;
}

double evolve_v(double v0, const ModelParams& params, const JumpPath& jumps, double t) {
  const double lambda = params.lambda;
  double v = v0 * std::exp(-lambda * t) + jumps.drift_rate * eps_of(lambda, t);
  for (std::size_t i = 0; i < jumps.times.size() && jumps.times[i] <= t; ++i) {
    v += std::exp(-lambda * (t - jumps.times[i])) * jumps.sizes[i];
  }
  return v;
}

std::vector<double> evolve_v(double v0, const ModelParams& params, const JumpPath& jumps,
                             const std::vector<double>& times) {
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) out.push_back(evolve_v(v0, params, jumps, t));
  return out;
}

double cumulative_z(const JumpPath& jumps, double t) {
  double z = jumps.drift_rate * t;
  for (std::size_t i = 0; i < jumps.times.size() && jumps.times[i] <= t; ++i) {
    z += jumps.sizes[i];
  }
  return z;
}

double integrated_variance(double v0, const ModelParams& params, const JumpPath& jumps,
                           double t) {
  const double lambda = params.lambda;
  const double e = eps_of(lambda, t);
  double vs = v0 * e + jumps.drift_rate * (t - e) / lambda;
  for (std::size_t i = 0; i < jumps.times.size() && jumps.times[i] <= t; ++i) {
    vs += eps_of(lambda, t - jumps.times[i]) * jumps.sizes[i];
  }
#ifndef NDEBUG
  const double rearranged = (v0 - evolve_v(v0, params, jumps, t) + cumulative_z(jumps, t)) / lambda;
  assert(std::abs(vs - rearranged) <= 1e-10 * (1.0 + std::abs(vs)) * std::max(1.0, 1.0 / lambda));
#endif
  return vs;
}

double evolve_x(double x0, double v0, const BnsModel& model, const JumpPath& jumps,
                Rng& brownian, double t) {
  const double vs = integrated_variance(v0, model.params(), jumps, t);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double g = normal(brownian);
  return x0 + model.drift_constant() * t - 0.5 * vs + std::sqrt(vs) * g +
         model.params().rho * cumulative_z(jumps, t);
}

namespace {

struct State {
  double v;
  double v_star = 0.0;
  double z = 0.0;
  double x;
};

template <typename Record>
void march(const BnsModel& model, double x0, double v0, const std::vector<double>& times,
           Rng& rng, Record&& record, JumpPath* keep) {
  const double horizon = times.empty() ? 0.0 : times.back();
  JumpPath jumps = simulate_bdlp(model, horizon, rng);
  const double rho = model.params().rho;
  const double c = model.drift_constant();
  std::normal_distribution<double> normal(0.0, 1.0);

  const ModelParams& params = model.params();
  State s{v0, 0.0, 0.0, x0};
  double now = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double target = times[k];
    const double vs_before = s.v_star;
    const double z_before = s.z;
    s.v = evolve_v(v0, params, jumps, target);
    s.v_star = integrated_variance(v0, params, jumps, target);
    s.z = cumulative_z(jumps, target);
    const double dvs = s.v_star - vs_before;
    const double n = normal(rng);
    s.x += c * (target - now) - 0.5 * dvs + std::sqrt(std::max(dvs, 0.0)) * n + rho * (s.z - z_before);
    now = target;
    record(k, s);
  }
  if (keep) *keep = std::move(jumps);
}

}  // namespace

PathSample simulate_path(const BnsModel& model, double x0, double v0,
                         const std::vector<double>& times, Rng& rng) {
  if (!std::is_sorted(times.begin(), times.end()) || (!times.empty() && times.front() < 0.0)) {
    throw std::invalid_argument("simulate_path needs ascending nonnegative times");
  }
  PathSample out;
  out.t = times;
  out.v.resize(times.size());
  out.v_star.resize(times.size());
  out.x.resize(times.size());
  out.z_cum.resize(times.size());
  JumpPath jumps;
  march(
      model, x0, v0, times, rng,
      [&](std::size_t k, const State& s) {
        out.v[k] = s.v;
        out.v_star[k] = s.v_star;
        out.x[k] = s.x;
        out.z_cum[k] = s.z;
      },
      &jumps);
  out.jump_times = std::move(jumps.times);
  out.jump_sizes = std::move(jumps.sizes);
  return out;
}

void simulate_states(const BnsModel& model, double x0, double v0,
                     const std::vector<double>& times, Rng& rng, double* x_out,
                     double* v_out) {
  march(
      model, x0, v0, times, rng,
      [&](std::size_t k, const State& s) {
        x_out[k] = s.x;
        v_out[k] = s.v;
      },
      nullptr);
}

}  // namespace bns
