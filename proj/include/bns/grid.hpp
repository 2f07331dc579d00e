#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "bns/bns_dynamics.hpp"
#include "bns/payoff.hpp"

namespace bns {

/// Tensor grid: uniform x, ascending v (uniform or stretched towards the
/// lower edge), uniform time levels t_n = n T / nt, n = 0..nt.
struct Grid {
  std::vector<double> x;
  std::vector<double> v;
  double T = 1.0;
  std::size_t steps = 1;
  double delta = 0.0;

  std::size_t nx() const { return x.size(); }
  std::size_t nv() const { return v.size(); }
  std::size_t nt() const { return steps; }
  double dx() const { return x[1] - x[0]; }
  double dt() const { return T / static_cast<double>(steps); }
  double time(std::size_t n) const { return T * static_cast<double>(n) / static_cast<double>(steps); }
  std::size_t index(std::size_t i, std::size_t j) const { return j * x.size() + i; }
  std::size_t size() const { return x.size() * v.size(); }

  static Grid uniform(double x_min, double x_max, std::size_t nx, double v_lo, double v_max,
                      std::size_t nv, double T, std::size_t nt, double v_stretch = 0.0);

  void validate() const;
  /// Every other node in x and v, half the time steps. Needs odd nx, nv and even nt.
  Grid coarsened() const;
  /// Domain {v >= delta}: delta becomes the lowest node, followed by the
  /// nodes above it. delta >= v.back() leaves the single slice v = delta.
  Grid localized(double delta) const;
  bool same_nodes(const Grid& other) const;
};

struct GridSpec {
  std::size_t nx = 201;
  std::size_t nv = 101;
  std::size_t nt = 200;
  double x_min = std::numeric_limits<double>::quiet_NaN();
  double x_max = std::numeric_limits<double>::quiet_NaN();
  double v_max = std::numeric_limits<double>::quiet_NaN();
  // Clusters v nodes towards the lower edge, where u - h grows like sqrt(v).
  double v_stretch = 2.0;
  double delta = 0.0;
  // Half-width of the automatic x-range in standard deviations of X_T.
  double width_sd = 5.0;
  double headroom_quantile = 0.999;
};

/// Standard deviation of X_T - x0 started from v0 (moment formula).
double log_price_sd(const BnsModel& model, double v0);

/// Builds the grid, sizing unspecified edges from the model: x centred on
/// log strike, v_max >= v0 + q-quantile of Z_{lambda T}. With a uniform v
/// grid, v0 is placed on a node of both this grid and its coarsening.
Grid make_grid(const GridSpec& spec, const BnsModel& model, const Payoff& payoff, double x0,
               double v0);

}  // namespace bns
