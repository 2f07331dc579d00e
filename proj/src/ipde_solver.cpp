#include "bns/ipde_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <vector>

#include "bns/errors.hpp"
#include "bns/generator.hpp"
#include "bns/numerics.hpp"

namespace bns {
namespace {

// Thomas algorithm; sub[0] and sup[m-1] are ignored. Overwrites rhs with x.
void solve_tridiagonal(const std::vector<double>& sub, const std::vector<double>& diag,
                       const std::vector<double>& sup, std::vector<double>& rhs,
                       std::vector<double>& scratch) {
  const std::size_t m = diag.size();
  scratch.resize(m);
  double beta = diag[0];
  rhs[0] /= beta;
  for (std::size_t i = 1; i < m; ++i) {
    scratch[i] = sup[i - 1] / beta;
    beta = diag[i] - sub[i] * scratch[i];
    rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / beta;
  }
  for (std::size_t i = m - 1; i-- > 0;) rhs[i] -= scratch[i + 1] * rhs[i + 1];
}

double edge_value(const Payoff& payoff, bool american, double x, double tau, double r,
                  double shift) {
  if (american) return payoff(x) + shift;
  return std::exp(-r * tau) * payoff(x + r * tau) + shift;
}

ValueSurface degenerate_surface(const Grid& grid, const Payoff& payoff, const SolverOptions& opt) {
  ValueSurface s(grid, payoff, opt.american, opt.boundary_shift);
  for (std::size_t n = 0; n <= grid.nt(); ++n) {
    double* u = s.level(n);
    for (std::size_t j = 0; j < grid.nv(); ++j) {
      for (std::size_t i = 0; i < grid.nx(); ++i) {
        u[grid.index(i, j)] = s.obstacle(i) + opt.boundary_shift;
        s.set_mask(n, i, j, s.obstacle(i) > 0.0);
      }
    }
  }
  return s;
}

}  // namespace

QuadratureOptions quadrature_for(const Grid& grid, const BnsModel& model, QuadratureOptions base) {
  const double rho = std::abs(model.params().rho);
  double res = grid.nv() > 1 ? (grid.v.back() - grid.v.front()) / static_cast<double>(grid.nv() - 1)
                             : grid.dx();
  if (rho > 0.0) res = std::min(res, grid.dx() / rho);
  base.resolution = res;
  return base;
}

ValueSurface solve(const Grid& grid, const BnsModel& model, const Payoff& payoff,
                   const SolverOptions& opt) {
  const auto started = std::chrono::steady_clock::now();
  grid.validate();
  if (payoff.kind() == PayoffKind::kPut) {
    const double k = std::log(payoff.strike());
    if (!(grid.x.front() < k && k < grid.x.back())) {
      throw std::invalid_argument("grid x-range must contain log strike");
    }
  }
  if (!(opt.theta >= 0.5 && opt.theta <= 1.0)) {
    throw std::invalid_argument("solver theta must lie in [0.5, 1]");
  }
  if (grid.nv() == 1) return degenerate_surface(grid, payoff, opt);

  const ModelParams& p = model.params();
  const JumpQuadrature quad =
      build_jump_quadrature(model.measure(), quadrature_for(grid, model, opt.quadrature));
  const DiscreteGenerator gen(grid, model, quad);

  ValueSurface s(grid, payoff, opt.american, opt.boundary_shift);
  const std::size_t nx = grid.nx();
  const std::size_t nv = grid.nv();
  const std::size_t nt = grid.nt();
  const std::size_t m = nx - 2;
  const double dt = grid.dt();
  const double dx = grid.dx();
  const double shift = opt.boundary_shift;
  const bool clamp_lower = opt.american || grid.v.front() > 0.0;
  const double jump_rate = gen.jump_rate();
  const double penalty = opt.penalty_scale * std::max(1.0, p.r);
  VAdvection v_order = opt.v_advection;
  if (v_order == VAdvection::kAuto) {
    v_order = clamp_lower ? VAdvection::kFirstOrder : VAdvection::kSecondOrder;
  }

  {
    double* terminal = s.level(nt);
    for (std::size_t j = 0; j < nv; ++j) {
      for (std::size_t i = 0; i < nx; ++i) {
        terminal[grid.index(i, j)] = s.obstacle(i) + shift;
        s.set_mask(nt, i, j, s.obstacle(i) > 0.0);
      }
    }
  }

  // Explicit parts: jumps, upward advection, small-jump v-diffusion and cross term.
  double explicit_rate = jump_rate;
  double dv_min = grid.v[1] - grid.v[0];
  for (std::size_t j = 1; j < nv; ++j) dv_min = std::min(dv_min, grid.v[j] - grid.v[j - 1]);
  for (std::size_t j = 0; j + 1 < nv; ++j) {
    const double b = gen.drift_v(grid.v[j]);
    if (b > 0.0) explicit_rate = std::max(explicit_rate, jump_rate + b / (grid.v[j + 1] - grid.v[j]));
  }
  explicit_rate += 2.0 * gen.diffusion_v() / (dv_min * dv_min) +
                   std::abs(gen.cross_coefficient()) / (dx * dv_min);
  s.diagnostics.stability_number = dt * explicit_rate;
  if (s.diagnostics.stability_number > opt.stability_factor) {
    std::ostringstream msg;
    msg << "explicit part unstable: dt * rate = " << std::setprecision(10) << s.diagnostics.stability_number
        << " exceeds " << opt.stability_factor << "; use more time steps";
    throw StabilityError(msg.str());
  }

  std::vector<double> jumps(grid.size());
  std::vector<double> blend(opt.theta < 1.0 ? grid.size() : 0);
  std::vector<double> outside(nv);
  std::vector<double> sub(m), diag(m), sup(m), rhs(m), base_diag(m), base_rhs(m), last(m), scratch;
  std::vector<double> xlo(nv), xup(nv);
  bool upwinded = false;
  for (std::size_t j = 0; j < nv; ++j) {
    const double a = gen.drift_x(grid.v[j]);
    const double d = gen.diffusion_x(grid.v[j]);
    double lo = d / (dx * dx) - a / (2.0 * dx);
    double up = d / (dx * dx) + a / (2.0 * dx);
    if (lo < 0.0 || up < 0.0) {
      upwinded = true;
      const double au = gen.drift_x_upwind(grid.v[j], a > 0.0);
      lo = d / (dx * dx) + std::max(-au, 0.0) / dx;
      up = d / (dx * dx) + std::max(au, 0.0) / dx;
    }
    xlo[j] = lo;
    xup[j] = up;
  }

  double outside_total = 0.0;
  double violation = 0.0;
  std::size_t penalty_iterations = 0;
  std::size_t sweeps = 0;
  std::vector<char> active(m);

  for (std::size_t n = nt; n-- > 0;) {
    const double* old = s.level(n + 1);
    double* cur = s.level(n);
    const double tau = p.T - grid.time(n);
    const double theta = (nt - 1 - n) < static_cast<std::size_t>(std::max(opt.rannacher_steps, 0))
                             ? 1.0
                             : opt.theta;

    // Explicit jumps: midpoint extrapolation from the two previous levels
    // once the scheme is time-centred, the last level otherwise.
    const double* source = old;
    if (theta < 1.0 && n + 2 <= nt) {
      const double* older = s.level(n + 2);
      const double e = 1.0 - theta;
      for (std::size_t k = 0; k < grid.size(); ++k) blend[k] = (1.0 + e) * old[k] - e * older[k];
      source = blend.data();
    }
    parallel_for(nv, opt.threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t j = begin; j < end; ++j) {
        outside[j] = gen.jump_sum(source, j, &jumps[j * nx]);
      }
    });
    for (std::size_t j = 0; j < nv; ++j) outside_total += outside[j];

    for (std::size_t j = 0; j < nv; ++j) {
      double* row = cur + j * nx;
      const double* prev = old + j * nx;
      if (j == 0 && clamp_lower) {
        for (std::size_t i = 0; i < nx; ++i) {
          row[i] = s.obstacle(i) + shift;
          s.set_mask(n, i, j, s.obstacle(i) > 0.0);
        }
        continue;
      }
      const double v = grid.v[j];
      const double lo = xlo[j];
      const double up = xup[j];
      const double react = p.r + jump_rate;
      const double b = gen.drift_v(v);
      const double* jrow = &jumps[j * nx];
      const double left = edge_value(payoff, opt.american, grid.x.front(), tau, p.r, shift);
      const double right = edge_value(payoff, opt.american, grid.x.back(), tau, p.r, shift);

      for (std::size_t q = 0; q < m; ++q) {
        const std::size_t i = q + 1;
        sub[q] = -theta * lo;
        sup[q] = -theta * up;
        diag[q] = 1.0 / dt + theta * (lo + up + react);
        rhs[q] = prev[i] / dt +
                 (1.0 - theta) * (lo * prev[i - 1] + up * prev[i + 1] - (lo + up + react) * prev[i]) +
                 jrow[i];
      }
      if (b < 0.0 && j >= 1) {
        // b * d/dv with backward differences; the new-level part uses the
        // slices below, already solved in this sweep.
        const double* below = cur + (j - 1) * nx;
        const double* below_old = old + (j - 1) * nx;
        const double h1 = v - grid.v[j - 1];
        if (v_order == VAdvection::kSecondOrder && j >= 2) {
          const double* below2 = cur + (j - 2) * nx;
          const double* below2_old = old + (j - 2) * nx;
          const double h2 = grid.v[j - 1] - grid.v[j - 2];
          const double c0 = (2.0 * h1 + h2) / (h1 * (h1 + h2));
          const double c1 = -(h1 + h2) / (h1 * h2);
          const double c2 = h1 / (h2 * (h1 + h2));
          for (std::size_t q = 0; q < m; ++q) {
            const std::size_t i = q + 1;
            diag[q] -= theta * b * c0;
            rhs[q] += theta * b * (c1 * below[i] + c2 * below2[i]) +
                      (1.0 - theta) * b * (c0 * prev[i] + c1 * below_old[i] + c2 * below2_old[i]);
          }
        } else {
          const double c = -b / h1;
          for (std::size_t q = 0; q < m; ++q) {
            const std::size_t i = q + 1;
            diag[q] += theta * c;
            rhs[q] += theta * c * below[i] + (1.0 - theta) * c * (below_old[i] - prev[i]);
          }
        }
      } else if (b > 0.0 && j + 1 < nv) {
        const double* above = old + (j + 1) * nx;
        const double c = b / (grid.v[j + 1] - v);
        for (std::size_t q = 0; q < m; ++q) rhs[q] += c * (above[q + 1] - prev[q + 1]);
      }
      if (gen.diffusion_v() > 0.0 && j >= 1 && j + 1 < nv) {
        const double hm = v - grid.v[j - 1];
        const double hp = grid.v[j + 1] - v;
        const double* dn = old + (j - 1) * nx;
        const double* upr = old + (j + 1) * nx;
        const double wm = 2.0 / (hm * (hm + hp));
        const double wc = -2.0 / (hm * hp);
        const double wp = 2.0 / (hp * (hm + hp));
        const double fm = -hp / (hm * (hm + hp));
        const double fc = (hp - hm) / (hm * hp);
        const double fp = hm / (hp * (hm + hp));
        for (std::size_t q = 0; q < m; ++q) {
          const std::size_t i = q + 1;
          const double uvv = wm * dn[i] + wc * prev[i] + wp * upr[i];
          auto ddx = [&](const double* r) { return (r[i + 1] - r[i - 1]) / (2.0 * dx); };
          const double uxv = fm * ddx(dn) + fc * ddx(prev) + fp * ddx(upr);
          rhs[q] += gen.diffusion_v() * uvv + gen.cross_coefficient() * uxv;
        }
      }
      rhs[0] -= sub[0] * left;
      rhs[m - 1] -= sup[m - 1] * right;

      if (!opt.american) {
        solve_tridiagonal(sub, diag, sup, rhs, scratch);
        for (std::size_t q = 0; q < m; ++q) row[q + 1] = rhs[q];
      } else if (opt.obstacle == ObstacleMethod::kPenalty) {
        base_diag = diag;
        base_rhs = rhs;
        for (std::size_t q = 0; q < m; ++q) active[q] = prev[q + 1] <= s.obstacle(q + 1);
        bool settled = false;
        for (int it = 0; it < opt.max_penalty_iterations; ++it) {
          ++penalty_iterations;
          for (std::size_t q = 0; q < m; ++q) {
            diag[q] = base_diag[q] + (active[q] ? penalty : 0.0);
            rhs[q] = base_rhs[q] + (active[q] ? penalty * s.obstacle(q + 1) : 0.0);
          }
          solve_tridiagonal(sub, diag, sup, rhs, scratch);
          bool changed = false;
          double moved = 0.0;
          for (std::size_t q = 0; q < m; ++q) {
            const char now = rhs[q] < s.obstacle(q + 1);
            if (now != active[q]) changed = true;
            active[q] = now;
            if (it > 0) {
              moved = std::max(moved, std::abs(rhs[q] - last[q]) / std::max(1.0, std::abs(rhs[q])));
            }
          }
          last = rhs;
          // Nodes sitting on the obstacle to rounding may flip without moving the iterate.
          if (!changed || (it > 0 && moved <= 1e-12)) {
            settled = true;
            break;
          }
        }
        if (!settled) {
          throw NonConvergence("penalty iteration did not settle on an active set");
        }
        for (std::size_t q = 0; q < m; ++q) row[q + 1] = rhs[q];
      } else {
        for (std::size_t q = 0; q < m; ++q) row[q + 1] = std::max(prev[q + 1], s.obstacle(q + 1));
        bool converged = false;
        for (int sweep = 0; sweep < opt.sor_max_sweeps; ++sweep) {
          ++sweeps;
          double change = 0.0;
          for (std::size_t q = 0; q < m; ++q) {
            const double l = q > 0 ? row[q] : left;
            const double r = q + 1 < m ? row[q + 2] : right;
            const double gs = (rhs[q] + (q > 0 ? -sub[q] * l : 0.0) +
                               (q + 1 < m ? -sup[q] * r : 0.0)) /
                              diag[q];
            const double next = std::max(s.obstacle(q + 1), row[q + 1] + opt.sor_omega * (gs - row[q + 1]));
            change = std::max(change, std::abs(next - row[q + 1]));
            row[q + 1] = next;
          }
          if (change <= opt.sor_tolerance) {
            converged = true;
            break;
          }
        }
        if (!converged) {
          throw NonConvergence("projected SOR exceeded the sweep limit");
        }
      }
      row[0] = left;
      row[nx - 1] = right;
      for (std::size_t i = 0; i < nx; ++i) {
        if (opt.american) violation = std::max(violation, s.obstacle(i) - row[i]);
      }
      if (opt.american) {
        // Exercise where the constraint binds: the unconstrained update with
        // the neighbours held would fall below the obstacle beyond rounding.
        const bool pen = opt.obstacle == ObstacleMethod::kPenalty;
        const std::vector<double>& bd = pen ? base_diag : diag;
        const std::vector<double>& br = pen ? base_rhs : rhs;
        s.set_mask(n, 0, j, s.obstacle(0) > 0.0);
        s.set_mask(n, nx - 1, j, s.obstacle(nx - 1) > 0.0);
        for (std::size_t q = 0; q < m; ++q) {
          const double l = q > 0 ? row[q] : 0.0;
          const double r = q + 1 < m ? row[q + 2] : 0.0;
          const double free = (br[q] - sub[q] * l - sup[q] * r) / bd[q];
          const double hq = s.obstacle(q + 1);
          const bool binding = free < hq - 1e-12 * std::max(1.0, std::abs(hq));
          s.set_mask(n, q + 1, j, binding && s.obstacle(q + 1) > 0.0);
        }
      }
    }
  }

  s.diagnostics.extrapolated_mass_all =
      quad.mass > 0.0 ? outside_total / (quad.mass * static_cast<double>(nt * grid.size())) : 0.0;
  // Jump mass carried above v_max from the lower half of the v-range.
  if (quad.mass > 0.0) {
    const double v_mid = 0.5 * (grid.v.front() + grid.v.back());
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t j = 0; j < nv; ++j) {
      if (grid.v[j] > v_mid) break;
      double over = quad.tail;
      for (std::size_t k = 0; k < quad.nodes.size(); ++k) {
        if (grid.v[j] + quad.nodes[k] > grid.v.back()) over += quad.weights[k];
      }
      sum += over / (quad.mass + quad.tail);
      ++count;
    }
    s.diagnostics.extrapolated_mass_fraction = count > 0 ? sum / static_cast<double>(count) : 0.0;
  }
  s.diagnostics.max_obstacle_violation = violation;
  s.diagnostics.penalty = opt.obstacle == ObstacleMethod::kPenalty ? penalty : 0.0;
  s.diagnostics.penalty_iterations = penalty_iterations;
  s.diagnostics.sor_sweeps = sweeps;
  s.diagnostics.quadrature_nodes = quad.nodes.size();
  s.diagnostics.xi = quad.xi;
  s.diagnostics.z_max = quad.z_max;
  s.diagnostics.quadrature_tail = quad.tail;
  s.diagnostics.upwinded_x = upwinded;
  s.diagnostics.runtime_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  if (opt.american && violation > opt.penalty_tolerance) {
    std::ostringstream msg;
    msg << "obstacle violated by " << violation << " after the solve";
    throw NonConvergence(msg.str());
  }
  return s;
}

ValueSurface solve_localized(const Grid& grid, double delta, const BnsModel& model,
                             const Payoff& payoff, const SolverOptions& options) {
  if (!(delta > 0.0)) throw std::invalid_argument("localized solve needs delta > 0");
  return solve(grid.localized(delta), model, payoff, options);
}

double ipde_residual(const ValueSurface& surface, const BnsModel& model, std::size_t n,
                     double x_lo, double x_hi, double v_lo, double v_hi,
                     const QuadratureOptions& quadrature) {
  const Grid& g = surface.grid();
  if (n >= g.nt()) throw std::out_of_range("residual level must precede maturity");
  const JumpQuadrature quad =
      build_jump_quadrature(model.measure(), quadrature_for(g, model, quadrature));
  const DiscreteGenerator gen(g, model, quad);
  std::vector<double> u(surface.level(n), surface.level(n) + g.size());
  const double* next = surface.level(n + 1);
  double worst = 0.0;
  std::vector<double> jump_row(g.nx());
  for (std::size_t j = 1; j + 1 < g.nv(); ++j) {
    if (g.v[j] < v_lo || g.v[j] > v_hi) continue;
    gen.jump_sum(u.data(), j, jump_row.data());
    for (std::size_t i = 1; i + 1 < g.nx(); ++i) {
      if (g.x[i] < x_lo || g.x[i] > x_hi || surface.exercised(n, i, j)) continue;
      const std::size_t k = g.index(i, j);
      const double ut = (next[k] - u[k]) / g.dt();
      const double res = ut + gen.apply(u, i, j, jump_row.data()) - model.params().r * u[k];
      worst = std::max(worst, std::abs(res));
    }
  }
  return worst;
}

}  // namespace bns
