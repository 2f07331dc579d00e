#include "bns/surface.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace bns {

ValueSurface::ValueSurface(Grid grid, Payoff payoff, bool american, double shift)
    : grid_(std::move(grid)), payoff_(std::move(payoff)), american_(american), shift_(shift) {
  u_.assign((grid_.nt() + 1) * grid_.size(), 0.0);
  mask_.assign(u_.size(), 0);
  h_.resize(grid_.nx());
  for (std::size_t i = 0; i < grid_.nx(); ++i) h_[i] = payoff_(grid_.x[i]);
}

bool ValueSurface::contains(double x, double v) const {
  return x >= grid_.x.front() && x <= grid_.x.back() && v >= grid_.v.front() &&
         v <= grid_.v.back();
}

namespace {

void bracket(const std::vector<double>& nodes, double y, std::size_t& lo, double& frac) {
  if (nodes.size() == 1) {
    lo = 0;
    frac = 0.0;
    return;
  }
  y = std::clamp(y, nodes.front(), nodes.back());
  const auto it = std::upper_bound(nodes.begin(), nodes.end(), y);
  lo = std::min(static_cast<std::size_t>(it - nodes.begin()), nodes.size() - 1);
  lo = lo == 0 ? 0 : lo - 1;
  lo = std::min(lo, nodes.size() - 2);
  frac = (y - nodes[lo]) / (nodes[lo + 1] - nodes[lo]);
}

}  // namespace

double ValueSurface::value(double x, double v, double t, bool* outside) const {
  if (outside) *outside = !contains(x, v);
  std::size_t i = 0;
  std::size_t j = 0;
  double fx = 0.0;
  double fv = 0.0;
  bracket(grid_.x, x, i, fx);
  bracket(grid_.v, v, j, fv);
  const bool single = grid_.nv() == 1;
  auto level_value = [&](std::size_t n) {
    const double a = (1.0 - fx) * at(n, i, j) + fx * at(n, i + 1, j);
    if (single) return a;
    const double b = (1.0 - fx) * at(n, i, j + 1) + fx * at(n, i + 1, j + 1);
    return (1.0 - fv) * a + fv * b;
  };
  const double s = std::clamp(t, 0.0, grid_.T) / grid_.dt();
  std::size_t n = static_cast<std::size_t>(std::floor(s));
  if (n >= grid_.nt()) return level_value(grid_.nt());
  const double ft = s - static_cast<double>(n);
  if (ft == 0.0) return level_value(n);
  return (1.0 - ft) * level_value(n) + ft * level_value(n + 1);
}

ExerciseBoundary exercise_boundary(const ValueSurface& surface, double tolerance) {
  const Grid& g = surface.grid();
  ExerciseBoundary out;
  out.nv = g.nv();
  out.x.resize((g.nt() + 1) * g.nv());
  const Payoff& p = surface.payoff();
  for (std::size_t n = 0; n <= g.nt(); ++n) {
    for (std::size_t j = 0; j < g.nv(); ++j) {
      std::optional<double>& slot = out.x[n * g.nv() + j];
      if (n == g.nt() && (p.kind() == PayoffKind::kPut)) {
        slot = std::log(p.strike());
        continue;
      }
      std::optional<std::size_t> last;
      for (std::size_t i = 0; i < g.nx(); ++i) {
        if (surface.obstacle(i) > 0.0 && surface.at(n, i, j) - surface.obstacle(i) <= tolerance) {
          last = i;
        }
      }
      if (!last) continue;
      const std::size_t i = *last;
      if (i + 1 >= g.nx()) {
        slot = g.x[i];
        continue;
      }
      // Where the premium u - h crosses the tolerance between i and i + 1.
      const double g0 = surface.at(n, i, j) - surface.obstacle(i);
      const double g1 = surface.at(n, i + 1, j) - surface.obstacle(i + 1);
      double w = 0.0;
      if (g1 > g0) w = std::clamp((tolerance - g0) / (g1 - g0), 0.0, 1.0);
      slot = g.x[i] + w * (g.x[i + 1] - g.x[i]);
    }
  }
  return out;
}

void write_surface_csv(const ValueSurface& surface, const std::string& path, std::size_t stride) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "t,x,v,u,exercised\n";
  out << std::setprecision(12);
  const Grid& g = surface.grid();
  stride = std::max<std::size_t>(stride, 1);
  for (std::size_t n = 0; n <= g.nt(); n += stride) {
    for (std::size_t j = 0; j < g.nv(); ++j) {
      for (std::size_t i = 0; i < g.nx(); ++i) {
        out << g.time(n) << ',' << g.x[i] << ',' << g.v[j] << ',' << surface.at(n, i, j) << ','
            << (surface.exercised(n, i, j) ? 1 : 0) << '\n';
      }
    }
    if (n != g.nt() && n + stride > g.nt()) n = g.nt() - stride;
  }
}

}  // namespace bns
