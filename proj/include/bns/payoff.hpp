#pragma once

#include <string>
#include <vector>

namespace bns {

enum class PayoffKind { kPut, kCappedCall, kCall, kTabulated, kConstant };

/// Obstacle h(x) of the log-price, with a Lipschitz constant K such that
/// |h(x1) - h(x2)| <= K |x1 - x2|.
class Payoff {
 public:
  static Payoff put(double strike);
  static Payoff capped_call(double strike, double cap);
  /// max(e^x - strike, 0) is not Lipschitz in x; refused unless forced.
  static Payoff call(double strike, bool allow_non_lipschitz);
  /// Piecewise linear through (xs, hs), flat outside [xs.front(), xs.back()].
  static Payoff tabulated(std::vector<double> xs, std::vector<double> hs);
  static Payoff constant(double c);

  PayoffKind kind() const { return kind_; }
  double strike() const { return strike_; }
  double cap() const { return cap_; }
  double lipschitz() const { return lipschitz_; }
  /// False only for the uncapped call.
  bool certified() const { return kind_ != PayoffKind::kCall; }
  std::string name() const;

  double operator()(double x) const;

  /// Largest |h(x_i) - h(x_j)| / |x_i - x_j| over pairs with |x_i - x_j| <= max_gap.
  double sampled_lipschitz(const std::vector<double>& xs, double max_gap = 1.0) const;

 private:
  Payoff() = default;

  PayoffKind kind_ = PayoffKind::kConstant;
  double strike_ = 0.0;
  double cap_ = 0.0;
  double lipschitz_ = 0.0;
  std::vector<double> xs_;
  std::vector<double> hs_;
};

inline double evaluate(const Payoff& p, double x) { return p(x); }

}  // namespace bns
