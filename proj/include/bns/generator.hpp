#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "bns/bns_dynamics.hpp"
#include "bns/grid.hpp"
#include "bns/jump_quadrature.hpp"

namespace bns {

/// Discretised generator on a grid, split as
///   L psi = A(v) psi_x + B(v) psi_v + D(v) psi_xx
///           + lambda m2 (rho psi_xv + psi_vv / 2)
///           + lambda (sum_k w_k psi(x + rho z_k, v + z_k) - Lambda psi)
/// where the quadrature covers [xi, z_max] and m1, m2 are the small-jump
/// moments on (0, xi). A(v) is fixed by the discrete martingale condition
/// L e^x = r e^x for the centred stencil and the interpolated jump sum; it
/// differs from r - v/2 - lambda kappa + lambda rho (mu1 - M) by O(dx^2) plus
/// the quadrature error. Exact for psi in {1, v}.
class DiscreteGenerator {
 public:
  DiscreteGenerator(const Grid& grid, const BnsModel& model, const JumpQuadrature& quad);

  const Grid& grid() const { return grid_; }
  const JumpQuadrature& quadrature() const { return quad_; }

  double drift_x(double v) const { return (r_ - jump_exp_ - diffusion_x(v) * s2_) / s1_; }
  /// Same condition for a one-sided stencil (forward if `forward`).
  double drift_x_upwind(double v, bool forward) const {
    return (r_ - jump_exp_ - diffusion_x(v) * s2_) / (forward ? fwd_ : bwd_);
  }
  double drift_v(double v) const { return b0_ - lambda_ * v; }
  double diffusion_x(double v) const { return 0.5 * v + d0_; }
  double cross_coefficient() const { return cross_; }
  double diffusion_v() const { return dvv_; }
  /// lambda * (sum of quadrature weights).
  double jump_rate() const { return lambda_ * quad_.mass; }

  /// out[i] = lambda sum_k w_k u(x_i + rho z_k, v_j + z_k) for one v-slice;
  /// `u` holds a full level indexed j * nx + i. Returns the weight (without
  /// lambda) of targets that fell outside the grid, summed over i.
  double jump_sum(const double* u, std::size_t j, double* out) const;

  /// L u at interior node (i, j) with centred differences.
  double apply(const std::vector<double>& u, std::size_t i, std::size_t j) const;
  /// As above with the slice's jump_sum already computed.
  double apply(const std::vector<double>& u, std::size_t i, std::size_t j,
               const double* jump_row) const;

 private:
  struct VTarget {
    std::size_t lo;
    double frac;
    bool outside;
  };

  Grid grid_;
  JumpQuadrature quad_;
  double lambda_;
  double r_;
  // lambda (sum_k w_k interpolated e^{rho z_k} - Lambda), and the stencils
  // applied to e^x at x = 0.
  double jump_exp_ = 0.0;
  double s1_ = 1.0;
  double s2_ = 1.0;
  double fwd_ = 1.0;
  double bwd_ = 1.0;
  double b0_;
  double d0_;
  double cross_;
  double dvv_;
  std::vector<int> x_offset_;
  std::vector<double> x_frac_;
  std::vector<VTarget> v_target_;  // [j * K + k]
};

/// Indices (i, j) of the grid node nearest to (x, v).
std::pair<std::size_t, std::size_t> nearest_node(const Grid& grid, double x, double v);

/// Generator applied to a closed-form function sampled on the grid, at the
/// grid node nearest to (x, v).
double apply_generator(const std::function<double(double, double)>& psi, const Grid& grid,
                       const BnsModel& model, const JumpQuadrature& quad, double x, double v);

enum class TestFunction { kOne, kX, kV, kXSquared };

/// Hand-computed L psi for the polynomial test functions.
double analytic_generator(TestFunction f, const BnsModel& model, double x, double v);

std::function<double(double, double)> test_function(TestFunction f);

}  // namespace bns
