#include "bns/jump_quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "bns/errors.hpp"

namespace bns {
namespace {

constexpr int kOrder = 6;

struct Rule {
  std::vector<double> t;  // on [-1, 1]
  std::vector<double> w;
};

Rule gauss_rule() {
  using G = boost::math::quadrature::gauss<double, kOrder>;
  Rule rule;
  const auto& a = G::abscissa();
  const auto& w = G::weights();
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] == 0.0) {
      rule.t.push_back(0.0);
      rule.w.push_back(w[k]);
      continue;
    }
    rule.t.push_back(-a[k]);
    rule.w.push_back(w[k]);
    rule.t.push_back(a[k]);
    rule.w.push_back(w[k]);
  }
  return rule;
}

double find_z_max(const JumpMeasure& m, double tol, double start) {
  double z = std::max(start, 1.0 / std::min(m.theta_hat(), 1e6));
  for (int it = 0; it < 400; ++it) {
    if (m.tail_mass(z) < tol) return z;
    z *= 1.25;
  }
  throw IntegrationError("jump quadrature: no truncation point meets the tail tolerance");
}

void fill_panels(const JumpMeasure& m, const Rule& rule, double xi, double z_max, double width,
                 JumpQuadrature& q) {
  q.nodes.clear();
  q.weights.clear();
  const double ref_point = std::max(xi, width);
  const double ref_density = m.density(ref_point);
  double lo = xi;
  while (lo < z_max) {
    double w = width;
    const double d = m.density(lo + 0.5 * width);
    if (d > 0.0 && ref_density > 0.0) {
      w *= std::clamp(ref_density / d / 1e3, 1.0, 16.0);
    }
    if (!m.finite_activity()) w = std::min(w, std::max(0.5 * lo, 1e-12));
    const double hi = std::min(z_max, lo + w);
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    for (std::size_t k = 0; k < rule.t.size(); ++k) {
      const double z = mid + half * rule.t[k];
      q.nodes.push_back(z);
      q.weights.push_back(half * rule.w[k] * m.density(z));
    }
    lo = hi;
  }
}

}  // namespace

JumpQuadrature build_jump_quadrature(const JumpMeasure& measure, const QuadratureOptions& options) {
  JumpQuadrature q;
  if (measure.is_null()) {
    q.certified = true;
    return q;
  }
  q.xi = options.xi >= 0.0 ? options.xi : (measure.finite_activity() ? 0.0 : 1e-3);
  if (!measure.finite_activity() && !(q.xi > 0.0)) {
    throw std::invalid_argument("infinite-activity kernel needs a positive small-jump cutoff");
  }
  if (q.xi >= 1.0) throw std::invalid_argument("small-jump cutoff must be < 1");
  if (q.xi > 0.0) {
    q.small_m1 = measure.partial_moment(1, 0.0, q.xi);
    q.small_m2 = measure.partial_moment(2, 0.0, q.xi);
  }
  q.z_max = find_z_max(measure, options.tail_tolerance, std::max(q.xi * 2.0, 0.1));
  q.tail = measure.tail_mass(q.z_max);

  const double exact_mass = measure.partial_moment(0, q.xi, q.z_max);
  const double exact_mean = measure.partial_moment(1, q.xi, q.z_max);
  const Rule rule = gauss_rule();
  double width = kOrder * std::max(options.resolution, 1e-6);
  for (int attempt = 0; attempt < 7; ++attempt) {
    fill_panels(measure, rule, q.xi, q.z_max, width, q);
    double mass = 0.0;
    double mean = 0.0;
    for (std::size_t k = 0; k < q.nodes.size(); ++k) {
      mass += q.weights[k];
      mean += q.weights[k] * q.nodes[k];
    }
    q.mass = mass;
    q.mean = mean;
    q.mass_error = std::abs(mass - exact_mass) / exact_mass;
    q.mean_error = std::abs(mean - exact_mean) / exact_mean;
    if (q.mass_error <= options.moment_tolerance && q.mean_error <= options.moment_tolerance) {
      q.certified = true;
      return q;
    }
    width *= 0.5;
  }
  std::ostringstream msg;
  msg << "jump quadrature not certified: relative mass error " << q.mass_error
      << ", mean error " << q.mean_error;
  throw IntegrationError(msg.str());
}

}  // namespace bns
