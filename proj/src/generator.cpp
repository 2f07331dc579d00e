#include "bns/generator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bns {

DiscreteGenerator::DiscreteGenerator(const Grid& grid, const BnsModel& model,
                                     const JumpQuadrature& quad)
    : grid_(grid), quad_(quad) {
  const ModelParams& p = model.params();
  lambda_ = p.lambda;
  r_ = p.r;
  const double mu1 = model.mean_jump();
  b0_ = p.lambda * (mu1 - quad_.mean);
  d0_ = 0.5 * p.lambda * p.rho * p.rho * quad_.small_m2;
  cross_ = p.lambda * p.rho * quad_.small_m2;
  dvv_ = 0.5 * p.lambda * quad_.small_m2;

  const std::size_t K = quad_.nodes.size();
  const double dx = grid_.dx();
  x_offset_.resize(K);
  x_frac_.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    const double s = p.rho * quad_.nodes[k] / dx;
    const double o = std::floor(s);
    x_offset_[k] = static_cast<int>(o);
    x_frac_[k] = s - o;
  }
  double interp = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double f = x_frac_[k];
    const double o = static_cast<double>(x_offset_[k]);
    interp += quad_.weights[k] * ((1.0 - f) * std::exp(o * dx) + f * std::exp((o + 1.0) * dx));
  }
  jump_exp_ = p.lambda * (interp - quad_.mass);
  s1_ = std::sinh(dx) / dx;
  s2_ = 2.0 * (std::cosh(dx) - 1.0) / (dx * dx);
  fwd_ = std::expm1(dx) / dx;
  bwd_ = -std::expm1(-dx) / dx;
  const std::size_t nv = grid_.nv();
  v_target_.resize(nv * K);
  if (nv < 2) return;
  for (std::size_t j = 0; j < nv; ++j) {
    for (std::size_t k = 0; k < K; ++k) {
      const double target = grid_.v[j] + quad_.nodes[k];
      VTarget t;
      if (target >= grid_.v.back()) {
        t.lo = nv - 2;
        t.outside = target > grid_.v.back();
      } else {
        const auto it = std::upper_bound(grid_.v.begin(), grid_.v.end(), target);
        t.lo = static_cast<std::size_t>(it - grid_.v.begin()) - 1;
        t.outside = false;
      }
      t.frac = (target - grid_.v[t.lo]) / (grid_.v[t.lo + 1] - grid_.v[t.lo]);
      v_target_[j * K + k] = t;
    }
  }
}

double DiscreteGenerator::jump_sum(const double* u, std::size_t j, double* out) const {
  const std::size_t nx = grid_.nx();
  const std::size_t K = quad_.nodes.size();
  std::fill(out, out + nx, 0.0);
  double outside_weight = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double w = lambda_ * quad_.weights[k];
    const VTarget& vt = v_target_[j * K + k];
    const double* lo = u + vt.lo * nx;
    const double* hi = lo + nx;
    const double wl = w * (1.0 - vt.frac);
    const double wh = w * vt.frac;
    const int o = x_offset_[k];
    const double f = x_frac_[k];
    // First i whose left interpolation node x_{i+o} is on the grid.
    const std::size_t first = static_cast<std::size_t>(std::max(0, -o));
    for (std::size_t i = 0; i < std::min(first, nx); ++i) {
      const double pos = static_cast<double>(static_cast<long>(i) + o) + f;
      const double a = lo[0] + pos * (lo[1] - lo[0]);
      const double b = hi[0] + pos * (hi[1] - hi[0]);
      out[i] += wl * a + wh * b;
    }
    if (first < nx) {
      const std::size_t count = nx - first;
      const double* l0 = lo + (static_cast<long>(first) + o);
      const double* h0 = hi + (static_cast<long>(first) + o);
      double* dst = out + first;
      if (f == 0.0) {
        for (std::size_t m = 0; m < count; ++m) dst[m] += wl * l0[m] + wh * h0[m];
      } else {
        const double a = 1.0 - f;
        for (std::size_t m = 0; m < count; ++m) {
          dst[m] += wl * (a * l0[m] + f * l0[m + 1]) + wh * (a * h0[m] + f * h0[m + 1]);
        }
      }
    }
    const std::size_t x_out = vt.outside ? nx : std::min(first, nx);
    outside_weight += quad_.weights[k] * static_cast<double>(x_out);
  }
  return outside_weight;
}

namespace {

struct ThreePoint {
  double m, c, p;
};

// Centred first and second derivative weights on a non-uniform stencil.
ThreePoint first_weights(double hm, double hp) {
  return {-hp / (hm * (hm + hp)), (hp - hm) / (hm * hp), hm / (hp * (hm + hp))};
}

ThreePoint second_weights(double hm, double hp) {
  return {2.0 / (hm * (hm + hp)), -2.0 / (hm * hp), 2.0 / (hp * (hm + hp))};
}

}  // namespace

double DiscreteGenerator::apply(const std::vector<double>& u, std::size_t i,
                                std::size_t j) const {
  std::vector<double> jumps(grid_.nx());
  if (j < grid_.nv()) jump_sum(u.data(), j, jumps.data());
  return apply(u, i, j, jumps.data());
}

double DiscreteGenerator::apply(const std::vector<double>& u, std::size_t i, std::size_t j,
                                const double* jump_row) const {
  const std::size_t nx = grid_.nx();
  const std::size_t nv = grid_.nv();
  if (i == 0 || i + 1 >= nx || j == 0 || j + 1 >= nv) {
    throw std::out_of_range("generator needs an interior node");
  }
  const double dx = grid_.dx();
  const double v = grid_.v[j];
  auto at = [&](std::size_t ii, std::size_t jj) { return u[grid_.index(ii, jj)]; };
  const double ux = (at(i + 1, j) - at(i - 1, j)) / (2.0 * dx);
  const double uxx = (at(i + 1, j) - 2.0 * at(i, j) + at(i - 1, j)) / (dx * dx);
  const ThreePoint d1 = first_weights(v - grid_.v[j - 1], grid_.v[j + 1] - v);
  const ThreePoint d2 = second_weights(v - grid_.v[j - 1], grid_.v[j + 1] - v);
  const double uv = d1.m * at(i, j - 1) + d1.c * at(i, j) + d1.p * at(i, j + 1);
  const double uvv = d2.m * at(i, j - 1) + d2.c * at(i, j) + d2.p * at(i, j + 1);
  auto dxat = [&](std::size_t jj) { return (at(i + 1, jj) - at(i - 1, jj)) / (2.0 * dx); };
  const double uxv = d1.m * dxat(j - 1) + d1.c * dxat(j) + d1.p * dxat(j + 1);

  return drift_x(v) * ux + drift_v(v) * uv + diffusion_x(v) * uxx + cross_ * uxv +
         dvv_ * uvv + jump_row[i] - jump_rate() * at(i, j);
}

std::pair<std::size_t, std::size_t> nearest_node(const Grid& grid, double x, double v) {
  auto nearest = [](const std::vector<double>& nodes, double y) {
    const auto it = std::lower_bound(nodes.begin(), nodes.end(), y);
    std::size_t k = static_cast<std::size_t>(it - nodes.begin());
    if (k == nodes.size()) return k - 1;
    if (k > 0 && std::abs(nodes[k - 1] - y) <= std::abs(nodes[k] - y)) --k;
    return k;
  };
  return {nearest(grid.x, x), nearest(grid.v, v)};
}

double apply_generator(const std::function<double(double, double)>& psi, const Grid& grid,
                       const BnsModel& model, const JumpQuadrature& quad, double x, double v) {
  std::vector<double> u(grid.size());
  for (std::size_t j = 0; j < grid.nv(); ++j) {
    for (std::size_t i = 0; i < grid.nx(); ++i) u[grid.index(i, j)] = psi(grid.x[i], grid.v[j]);
  }
  const DiscreteGenerator gen(grid, model, quad);
  const auto [i, j] = nearest_node(grid, x, v);
  return gen.apply(u, i, j);
}

double analytic_generator(TestFunction f, const BnsModel& model, double x, double v) {
  const ModelParams& p = model.params();
  const double ax = p.r - 0.5 * v - p.lambda * model.kappa_rho() +
                    p.lambda * p.rho * model.mean_jump();
  switch (f) {
    case TestFunction::kOne:
      return 0.0;
    case TestFunction::kX:
      return ax;
    case TestFunction::kV:
      return -p.lambda * (v - model.mean_jump());
    case TestFunction::kXSquared:
      return 2.0 * x * ax + v + p.lambda * p.rho * p.rho * model.second_moment();
  }
  return 0.0;
}

std::function<double(double, double)> test_function(TestFunction f) {
  switch (f) {
    case TestFunction::kOne:
      return [](double, double) { return 1.0; };
    case TestFunction::kX:
      return [](double x, double) { return x; };
    case TestFunction::kV:
      return [](double, double v) { return v; };
    case TestFunction::kXSquared:
      return [](double x, double) { return x * x; };
  }
  return {};
}

}  // namespace bns
