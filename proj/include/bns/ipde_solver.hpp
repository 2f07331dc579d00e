#pragma once

#include <cstddef>

#include "bns/bns_dynamics.hpp"
#include "bns/grid.hpp"
#include "bns/jump_quadrature.hpp"
#include "bns/payoff.hpp"
#include "bns/surface.hpp"

namespace bns {

enum class ObstacleMethod { kPenalty, kProjectedSor };
// Upwinding of the v-drift. kAuto takes the monotone first-order stencil
// whenever an obstacle or a clamped lower edge is present, and the
// second-order backward stencil for the linear problem on v >= 0.
enum class VAdvection { kAuto, kFirstOrder, kSecondOrder };

struct SolverOptions {
  bool american = true;
  ObstacleMethod obstacle = ObstacleMethod::kPenalty;
  // Penalty parameter is penalty_scale * max(1, r).
  double penalty_scale = 1e6;
  double penalty_tolerance = 1e-6;
  int max_penalty_iterations = 100;
  double sor_omega = 1.2;
  double sor_tolerance = 1e-12;
  int sor_max_sweeps = 20000;
  // Weight of the new level in the x-operator: 1 implicit Euler, 0.5 Crank-Nicolson.
  double theta = 0.5;
  // Fully implicit steps taken before switching to theta (smooths the kink).
  int rannacher_steps = 4;
  VAdvection v_advection = VAdvection::kAuto;
  double stability_factor = 1.0;
  // Added to the terminal and edge data; the obstacle itself is unchanged.
  double boundary_shift = 0.0;
  QuadratureOptions quadrature;
  unsigned threads = 1;
};

/// Backward march from u(T) = h. Diffusion and x-drift implicit per v-slice,
/// v-advection upwinded with the lower neighbour taken at the new level,
/// jumps explicit. Lower v-edge clamped to h for American problems.
ValueSurface solve(const Grid& grid, const BnsModel& model, const Payoff& payoff,
                   const SolverOptions& options = {});

/// Same march on {v >= delta} with u = h at v = delta.
ValueSurface solve_localized(const Grid& grid, double delta, const BnsModel& model,
                             const Payoff& payoff, const SolverOptions& options = {});

/// Quadrature resolution matched to a grid: node spacing comparable to the
/// finer of the v spacing and dx / |rho|.
QuadratureOptions quadrature_for(const Grid& grid, const BnsModel& model,
                                 QuadratureOptions base = {});

/// max |u_t + L u - r u| over continuation nodes at level n within the
/// window [x_lo, x_hi] x [v_lo, v_hi]; u_t by a one-sided difference to
/// level n + 1.
double ipde_residual(const ValueSurface& surface, const BnsModel& model, std::size_t n,
                     double x_lo, double x_hi, double v_lo, double v_hi,
                     const QuadratureOptions& quadrature = {});

}  // namespace bns
