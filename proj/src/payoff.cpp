#include "bns/payoff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace bns {

Payoff Payoff::put(double strike) {
  if (!(strike > 0.0)) throw std::invalid_argument("put strike must be > 0");
  Payoff p;
  p.kind_ = PayoffKind::kPut;
  p.strike_ = strike;
  p.lipschitz_ = strike;
  return p;
}

Payoff Payoff::capped_call(double strike, double cap) {
  if (!(strike > 0.0)) throw std::invalid_argument("call strike must be > 0");
  if (!(cap > 0.0)) throw std::invalid_argument("call cap must be > 0");
  Payoff p;
  p.kind_ = PayoffKind::kCappedCall;
  p.strike_ = strike;
  p.cap_ = cap;
  // |d/dx e^x| on the region where the payoff is not flat, e^x <= strike + cap.
  p.lipschitz_ = strike + cap;
  return p;
}

Payoff Payoff::call(double strike, bool allow_non_lipschitz) {
  if (!allow_non_lipschitz) {
    throw std::invalid_argument(
        "plain call payoff is not Lipschitz in log-price; set payoff.allow_non_lipschitz "
        "to use it anyway");
  }
  if (!(strike > 0.0)) throw std::invalid_argument("call strike must be > 0");
  Payoff p;
  p.kind_ = PayoffKind::kCall;
  p.strike_ = strike;
  p.lipschitz_ = std::numeric_limits<double>::infinity();
  return p;
}

Payoff Payoff::tabulated(std::vector<double> xs, std::vector<double> hs) {
  if (xs.size() < 2 || xs.size() != hs.size()) {
    throw std::invalid_argument("tabulated payoff needs >= 2 matching (x, h) pairs");
  }
  double k = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (hs[i] < 0.0) throw std::invalid_argument("tabulated payoff must be nonnegative");
    if (i > 0) {
      if (!(xs[i] > xs[i - 1])) throw std::invalid_argument("tabulated x must increase");
      k = std::max(k, std::abs(hs[i] - hs[i - 1]) / (xs[i] - xs[i - 1]));
    }
  }
  Payoff p;
  p.kind_ = PayoffKind::kTabulated;
  p.xs_ = std::move(xs);
  p.hs_ = std::move(hs);
  p.lipschitz_ = k;
  return p;
}

Payoff Payoff::constant(double c) {
  if (!(c >= 0.0)) throw std::invalid_argument("constant payoff must be >= 0");
  Payoff p;
  p.kind_ = PayoffKind::kConstant;
  p.strike_ = c;
  p.lipschitz_ = 0.0;
  return p;
}

std::string Payoff::name() const {
  std::ostringstream out;
  switch (kind_) {
    case PayoffKind::kPut:
      out << "put(strike=" << strike_ << ")";
      break;
    case PayoffKind::kCappedCall:
      out << "capped_call(strike=" << strike_ << ",cap=" << cap_ << ")";
      break;
    case PayoffKind::kCall:
      out << "call(strike=" << strike_ << ")";
      break;
    case PayoffKind::kTabulated:
      out << "tabulated(" << xs_.size() << " points)";
      break;
    case PayoffKind::kConstant:
      out << "constant(" << strike_ << ")";
      break;
  }
  return out.str();
}

double Payoff::operator()(double x) const {
  switch (kind_) {
    case PayoffKind::kPut:
      return std::max(strike_ - std::exp(x), 0.0);
    case PayoffKind::kCappedCall:
      return std::min(std::max(std::exp(x) - strike_, 0.0), cap_);
    case PayoffKind::kCall:
      return std::max(std::exp(x) - strike_, 0.0);
    case PayoffKind::kTabulated: {
      if (x <= xs_.front()) return hs_.front();
      if (x >= xs_.back()) return hs_.back();
      const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
      const std::size_t i = static_cast<std::size_t>(it - xs_.begin()) - 1;
      const double w = (x - xs_[i]) / (xs_[i + 1] - xs_[i]);
      return (1.0 - w) * hs_[i] + w * hs_[i + 1];
    }
    case PayoffKind::kConstant:
      return strike_;
  }
  return 0.0;
}

double Payoff::sampled_lipschitz(const std::vector<double>& xs, double max_gap) const {
  std::vector<double> h(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) h[i] = (*this)(xs[i]);
  double k = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = i + 1; j < xs.size(); ++j) {
      const double gap = std::abs(xs[j] - xs[i]);
      if (gap > max_gap || gap == 0.0) continue;
      k = std::max(k, std::abs(h[j] - h[i]) / gap);
    }
  }
  return k;
}

}  // namespace bns
