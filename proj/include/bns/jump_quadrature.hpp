#pragma once

#include <vector>

#include "bns/levy_kernel.hpp"

namespace bns {

struct QuadratureOptions {
  // Small-jump cutoff; negative selects the default (0 for finite activity,
  // 1e-3 otherwise).
  double xi = -1.0;
  double tail_tolerance = 1e-8;
  double moment_tolerance = 1e-10;
  // Target node spacing near the origin, usually the grid resolution along
  // the jump direction.
  double resolution = 0.01;
};

/// Nodes and weights for the large-jump integral over [xi, z_max] and the
/// moments of the small jumps on (0, xi).
struct JumpQuadrature {
  double xi = 0.0;
  double z_max = 0.0;
  std::vector<double> nodes;
  std::vector<double> weights;
  double small_m1 = 0.0;  // int_0^xi z W(dz)
  double small_m2 = 0.0;  // int_0^xi z^2 W(dz)
  double mass = 0.0;      // sum of weights
  double mean = 0.0;      // sum of weights * nodes
  double tail = 0.0;      // bound on int_{z_max}^inf (1 + z) W(dz)
  double mass_error = 0.0;
  double mean_error = 0.0;
  bool certified = false;

  bool empty() const { return nodes.empty(); }
};

/// Composite Gauss-Legendre panels; throws IntegrationError when the mass
/// and mean cannot be reproduced to `moment_tolerance`.
JumpQuadrature build_jump_quadrature(const JumpMeasure& measure,
                                     const QuadratureOptions& options = {});

}  // namespace bns
