#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bns/grid.hpp"
#include "bns/payoff.hpp"

namespace bns {

struct SolveDiagnostics {
  // Share of jump mass landing above v_max, averaged over the lower half of
  // the v-range; large values mean v_max is too small.
  double extrapolated_mass_fraction = 0.0;
  // Share of jump evaluations off the grid in either direction, all nodes and steps.
  double extrapolated_mass_all = 0.0;
  double stability_number = 0.0;
  double max_obstacle_violation = 0.0;
  double penalty = 0.0;
  std::size_t penalty_iterations = 0;
  std::size_t sor_sweeps = 0;
  std::size_t quadrature_nodes = 0;
  double xi = 0.0;
  double z_max = 0.0;
  double quadrature_tail = 0.0;
  bool upwinded_x = false;
  double runtime_ms = 0.0;
};

/// u(x, v, t) on every time level of a grid, stored level-major then
/// v-slice then x: u[n][j][i].
class ValueSurface {
 public:
  ValueSurface() = default;
  ValueSurface(Grid grid, Payoff payoff, bool american, double shift);

  const Grid& grid() const { return grid_; }
  const Payoff& payoff() const { return payoff_; }
  bool american() const { return american_; }
  double boundary_shift() const { return shift_; }

  double* level(std::size_t n) { return u_.data() + n * grid_.size(); }
  const double* level(std::size_t n) const { return u_.data() + n * grid_.size(); }
  double at(std::size_t n, std::size_t i, std::size_t j) const {
    return u_[n * grid_.size() + grid_.index(i, j)];
  }
  double obstacle(std::size_t i) const { return h_[i]; }
  bool exercised(std::size_t n, std::size_t i, std::size_t j) const {
    return mask_[n * grid_.size() + grid_.index(i, j)] != 0;
  }
  void set_mask(std::size_t n, std::size_t i, std::size_t j, bool on) {
    mask_[n * grid_.size() + grid_.index(i, j)] = on ? 1 : 0;
  }

  /// Bilinear in (x, v) and linear in t. Points outside the grid are clamped
  /// to it and flagged through `outside`.
  double value(double x, double v, double t, bool* outside = nullptr) const;
  bool contains(double x, double v) const;

  SolveDiagnostics diagnostics;

 private:
  Grid grid_;
  Payoff payoff_ = Payoff::constant(0.0);
  bool american_ = true;
  double shift_ = 0.0;
  std::vector<double> u_;
  std::vector<double> h_;
  std::vector<std::uint8_t> mask_;
};

/// Largest binding x per (v-slice, time level); absent where the obstacle
/// never binds. Indexed [n][j].
struct ExerciseBoundary {
  std::size_t nv = 0;
  std::vector<std::optional<double>> x;
  const std::optional<double>& at(std::size_t n, std::size_t j) const { return x[n * nv + j]; }
};

ExerciseBoundary exercise_boundary(const ValueSurface& surface, double tolerance = 1e-6);

/// CSV with columns t, x, v, u, exercised; every `stride`-th time level.
void write_surface_csv(const ValueSurface& surface, const std::string& path, std::size_t stride);

}  // namespace bns
