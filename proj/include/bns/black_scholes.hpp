#pragma once

#include <cmath>

#include <boost/math/distributions/normal.hpp>

namespace bns {

// Lognormal prices with total variance w over the horizon T.
inline double black_scholes_put(double spot, double strike, double r, double T, double w) {
  const double df = std::exp(-r * T);
  if (!(w > 0.0)) return std::max(strike * df - spot, 0.0);
  const boost::math::normal_distribution<double> n01;
  const double sw = std::sqrt(w);
  const double d1 = (std::log(spot / strike) + r * T + 0.5 * w) / sw;
  const double d2 = d1 - sw;
  return strike * df * boost::math::cdf(n01, -d2) - spot * boost::math::cdf(n01, -d1);
}

inline double black_scholes_call(double spot, double strike, double r, double T, double w) {
  return black_scholes_put(spot, strike, r, T, w) + spot - strike * std::exp(-r * T);
}

}  // namespace bns
