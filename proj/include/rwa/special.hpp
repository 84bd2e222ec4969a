#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "rwa/error.hpp"

namespace rwa {

/**
 * CDF of Beta(a, b), i.e. the regularized incomplete beta I_x(a, b).
 *
 * Modified Lentz evaluation of the standard continued fraction. The fraction
 * converges quickly for x < (a + 1)/(a + b + 2); above that point the
 * symmetry I_x(a, b) = 1 - I_{1-x}(b, a) is used instead. log B(a, b) is
 * cached, so a reused object costs one log/exp pair plus the fraction.
 */
class BetaCdf {
 public:
  BetaCdf(double a, double b) : a_(a), b_(b) {
    detail::require(a > 0.0 && b > 0.0, "Beta CDF needs positive parameters");
    log_beta_ = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  }

  double operator()(double x) const {
    if (!(x > 0.0)) return 0.0;
    if (!(x < 1.0)) return 1.0;
    const double front = std::exp(a_ * std::log(x) + b_ * std::log1p(-x) - log_beta_);
    if (x < (a_ + 1.0) / (a_ + b_ + 2.0)) return front * fraction(a_, b_, x) / a_;
    return 1.0 - front * fraction(b_, a_, 1.0 - x) / b_;
  }

 private:
  static double fraction(double a, double b, double x) {
    constexpr double kTiny = 1e-300;
    constexpr double kEps = 1e-15;
    constexpr int kMaxIter = 1000;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
      const double m2 = 2.0 * m;
      double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
      d = 1.0 + aa * d;
      if (std::abs(d) < kTiny) d = kTiny;
      c = 1.0 + aa / c;
      if (std::abs(c) < kTiny) c = kTiny;
      d = 1.0 / d;
      h *= d * c;
      aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
      d = 1.0 + aa * d;
      if (std::abs(d) < kTiny) d = kTiny;
      c = 1.0 + aa / c;
      if (std::abs(c) < kTiny) c = kTiny;
      d = 1.0 / d;
      const double del = d * c;
      h *= del;
      if (std::abs(del - 1.0) < kEps) return h;
    }
    throw NumericalError("incomplete beta continued fraction did not converge (a = " +
                         std::to_string(a) + ", b = " + std::to_string(b) +
                         ", x = " + std::to_string(x) + ")");
  }

  double a_, b_, log_beta_;
};

inline double beta_cdf(double a, double b, double x) { return BetaCdf(a, b)(x); }

}  // namespace rwa
