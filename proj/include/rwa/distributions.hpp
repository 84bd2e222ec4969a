#pragma once

#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "rwa/error.hpp"
#include "rwa/numeric.hpp"
#include "rwa/rng.hpp"

namespace rwa {

/// Gamma law in the rate parameterization: mean = shape / rate.
class GammaParams {
 public:
  GammaParams(double shape, double rate = 1.0) : shape_(shape), rate_(rate) {
    detail::require(shape > 0.0 && std::isfinite(shape), "gamma shape must be positive and finite");
    detail::require(rate > 0.0 && std::isfinite(rate), "gamma rate must be positive and finite");
  }

  double shape() const noexcept { return shape_; }
  double rate() const noexcept { return rate_; }
  double mean() const noexcept { return shape_ / rate_; }
  double variance() const noexcept { return shape_ / (rate_ * rate_); }

 private:
  double shape_;
  double rate_;
};

/// Concentration vector of a Dirichlet law on the (k-1)-simplex, k >= 2.
class DirichletParams {
 public:
  DirichletParams(std::vector<double> alpha) : alpha_(std::move(alpha)) {
    detail::require(alpha_.size() >= 2, "Dirichlet parameters need k >= 2 components");
    for (double a : alpha_)
      detail::require(a > 0.0 && std::isfinite(a),
                      "Dirichlet parameters must be positive and finite");
  }
  DirichletParams(std::initializer_list<double> alpha)
      : DirichletParams(std::vector<double>(alpha)) {}

  std::size_t size() const noexcept { return alpha_.size(); }
  double operator[](std::size_t i) const { return alpha_[i]; }
  std::span<const double> values() const noexcept { return alpha_; }
  double sum() const noexcept { return std::accumulate(alpha_.begin(), alpha_.end(), 0.0); }

  friend bool operator==(const DirichletParams&, const DirichletParams&) = default;

 private:
  std::vector<double> alpha_;
};

inline constexpr double kSimplexTolerance = 1e-12;

/// A point of the probability simplex: non-negative coordinates summing to one.
class SimplexPoint {
 public:
  explicit SimplexPoint(std::vector<double> coords) : coords_(std::move(coords)) {
    double total = 0.0;
    for (double c : coords_) {
      detail::require(c >= 0.0, "simplex coordinates must be non-negative");
      total += c;
    }
    if (!(std::abs(total - 1.0) <= kSimplexTolerance))
      detail::fail_parameter("simplex coordinates must sum to 1 (|sum - 1| = " +
                             std::to_string(std::abs(total - 1.0)) + ")");
  }

  std::size_t size() const noexcept { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }
  std::span<const double> coords() const noexcept { return coords_; }

 private:
  std::vector<double> coords_;
};

/**
 * Draw from Gamma(shape, rate).
 *
 * shape >= 1: Marsaglia-Tsang squeeze/rejection. shape < 1: draw with shape + 1
 * and multiply by U^{1/shape}, carried out in log space.
 */
inline double sample_gamma(const GammaParams& p, RngStream& rng) {
  const double a = p.shape();
  const bool boost = a < 1.0;
  const double d = (boost ? a + 1.0 : a) - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  double g;
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2 || std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
      g = d * v;
      break;
    }
  }
  if (boost) g = std::exp(std::log(g) + std::log(rng.uniform()) / a);
  return g / p.rate();
}

inline constexpr int kDirichletMaxRetries = 64;

/// Normalized independent gammas. Resamples when every gamma underflows to zero.
inline SimplexPoint sample_dirichlet(const DirichletParams& p, RngStream& rng) {
  std::vector<double> g(p.size());
  for (int attempt = 0; attempt < kDirichletMaxRetries; ++attempt) {
    double total = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      g[i] = sample_gamma(GammaParams(p[i]), rng);
      total += g[i];
    }
    if (total > 0.0 && std::isfinite(total)) {
      for (double& x : g) x /= total;
      return SimplexPoint(std::move(g));
    }
  }
  throw NumericalError("Dirichlet sampling: gamma draws underflowed in " +
                       std::to_string(kDirichletMaxRetries) + " consecutive attempts");
}

/// E[prod_j X_j^{s_j}] = Γ(Σα)/Γ(Σα+Σs) · prod_j Γ(α_j+s_j)/Γ(α_j), via log-gamma.
inline double dirichlet_mixed_moment(const DirichletParams& p, std::span<const unsigned> s) {
  detail::require(s.size() == p.size(), "moment index length must match the Dirichlet dimension");
  double total_order = 0.0;
  double log_m = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (s[j] == 0) continue;
    log_m += log_rising(p[j], s[j]);
    total_order += s[j];
  }
  if (total_order == 0.0) return 1.0;
  log_m -= log_rising(p.sum(), total_order);
  return std::exp(log_m);
}

/// Log-density with respect to Lebesgue measure on the first k-1 coordinates.
/// Throws InfiniteDensity at a boundary point whose zero coordinate has alpha < 1.
inline double dirichlet_log_pdf(const DirichletParams& p, const SimplexPoint& x) {
  detail::require(x.size() == p.size(), "point dimension must match the Dirichlet dimension");
  double log_pdf = std::lgamma(p.sum());
  for (std::size_t i = 0; i < p.size(); ++i) {
    log_pdf -= std::lgamma(p[i]);
    if (p[i] == 1.0) continue;
    if (x[i] == 0.0) {
      if (p[i] < 1.0)
        throw InfiniteDensity("Dirichlet density is unbounded at a boundary point (alpha_" +
                              std::to_string(i) + " < 1)");
      return -std::numeric_limits<double>::infinity();
    }
    log_pdf += (p[i] - 1.0) * std::log(x[i]);
  }
  return log_pdf;
}

/// Marginal law of coordinate i: Beta(α_i, Σα − α_i), returned as a k = 2 Dirichlet.
inline DirichletParams dirichlet_marginal(const DirichletParams& p, std::size_t i) {
  detail::require(i < p.size(), "marginal coordinate out of range");
  return DirichletParams{p[i], p.sum() - p[i]};
}

}  // namespace rwa
