#include "bns/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "bns/errors.hpp"

namespace bns {

Grid Grid::uniform(double x_min, double x_max, std::size_t nx, double v_lo, double v_max,
                   std::size_t nv, double T, std::size_t nt, double v_stretch) {
  Grid g;
  g.T = T;
  g.steps = nt;
  g.delta = v_lo;
  g.x.resize(nx);
  for (std::size_t i = 0; i < nx; ++i) {
    g.x[i] = x_min + (x_max - x_min) * static_cast<double>(i) / static_cast<double>(nx - 1);
  }
  g.v.resize(nv);
  for (std::size_t j = 0; j < nv; ++j) {
    const double s = static_cast<double>(j) / static_cast<double>(nv - 1);
    const double f = v_stretch > 0.0 ? std::expm1(v_stretch * s) / std::expm1(v_stretch) : s;
    g.v[j] = v_lo + (v_max - v_lo) * f;
  }
  g.v.back() = v_max;
  g.validate();
  return g;
}

void Grid::validate() const {
  if (x.size() < 4 || v.size() < 4) {
    if (!(v.size() == 1 && x.size() >= 4)) {
      throw std::invalid_argument("grid needs at least 4 nodes in x and in v");
    }
  }
  if (steps < 1) throw std::invalid_argument("grid needs at least one time step");
  if (!(T > 0.0)) throw std::invalid_argument("grid horizon must be positive");
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (!(x[i] > x[i - 1])) throw std::invalid_argument("x nodes must increase");
  }
  for (std::size_t j = 1; j < v.size(); ++j) {
    if (!(v[j] > v[j - 1])) throw std::invalid_argument("v nodes must increase");
  }
  if (v.front() < 0.0) throw std::invalid_argument("v nodes must be nonnegative");
}

Grid Grid::coarsened() const {
  if (x.size() % 2 == 0 || v.size() % 2 == 0 || steps % 2 != 0) {
    throw GridMismatch("coarsening needs odd nx and nv and an even number of steps");
  }
  Grid g;
  g.T = T;
  g.steps = steps / 2;
  g.delta = delta;
  for (std::size_t i = 0; i < x.size(); i += 2) g.x.push_back(x[i]);
  for (std::size_t j = 0; j < v.size(); j += 2) g.v.push_back(v[j]);
  g.validate();
  return g;
}

Grid Grid::localized(double d) const {
  if (!(d > 0.0)) throw std::invalid_argument("localization level delta must be > 0");
  Grid g;
  g.x = x;
  g.T = T;
  g.steps = steps;
  g.delta = d;
  g.v.push_back(d);
  for (double vj : v) {
    if (vj > d * (1.0 + 1e-12)) g.v.push_back(vj);
  }
  return g;
}

bool Grid::same_nodes(const Grid& other) const {
  return x == other.x && v == other.v && steps == other.steps && T == other.T;
}

double log_price_sd(const BnsModel& model, double v0) {
  const ModelParams& p = model.params();
  const double e = model.eps(p.T);
  const double var = v0 * e + model.mean_jump() * (p.T - e) +
                     p.rho * p.rho * p.lambda * p.T * model.second_moment();
  return std::sqrt(std::max(var, 1e-8));
}

Grid make_grid(const GridSpec& spec, const BnsModel& model, const Payoff& payoff, double x0,
               double v0) {
  if (spec.nx < 4 || spec.nv < 4 || spec.nt < 1) {
    throw std::invalid_argument("grid needs nx >= 4, nv >= 4, nt >= 1");
  }
  double x_min = spec.x_min;
  double x_max = spec.x_max;
  if (std::isnan(x_min) || std::isnan(x_max)) {
    const double centre =
        payoff.kind() == PayoffKind::kPut || payoff.kind() == PayoffKind::kCall ||
                payoff.kind() == PayoffKind::kCappedCall
            ? std::log(payoff.strike())
            : x0;
    double half = spec.width_sd * log_price_sd(model, v0);
    half = std::max(half, std::abs(x0 - centre) + 0.5 * half);
    if (std::isnan(x_min)) x_min = centre - half;
    if (std::isnan(x_max)) x_max = centre + half;
  }
  if (!(x_max > x_min)) throw std::invalid_argument("grid x_max must exceed x_min");

  const ModelParams& p = model.params();
  const double headroom =
      v0 + bdlp_quantile(model.kernel(), p.lambda * p.T, spec.headroom_quantile);
  double v_max = spec.v_max;
  const bool auto_v = std::isnan(v_max);
  if (auto_v) v_max = std::max(headroom, 1.5 * v0);
  if (!model.kernel().is_null() && auto_v) v_max = std::max(v_max, 3.0 * model.mean_jump());
  if (!(v_max > spec.delta)) throw std::invalid_argument("grid v_max must exceed delta");

  // Put v0 on a node of the coarsened grid (spacing 2 dv) when v is uniform.
  if (auto_v && spec.v_stretch == 0.0 && v0 > spec.delta && spec.nv % 2 == 1) {
    const double coarse_cells = static_cast<double>((spec.nv - 1) / 2);
    const double dvc = (v_max - spec.delta) / coarse_cells;
    const double k = std::floor((v0 - spec.delta) / dvc);
    if (k >= 1.0) v_max = spec.delta + (v0 - spec.delta) / k * coarse_cells;
  }
  return Grid::uniform(x_min, x_max, spec.nx, spec.delta, v_max, spec.nv, p.T, spec.nt,
                       spec.v_stretch);
}

}  // namespace bns
