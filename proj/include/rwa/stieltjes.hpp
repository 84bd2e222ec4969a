#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "rwa/error.hpp"
#include "rwa/numeric.hpp"
#include "rwa/quadrature.hpp"

namespace rwa {

using cplx = std::complex<double>;

/// Stieltjes transform S(z) = ∫ (z - x)^{-1} F(dx) of a law supported in [lo, hi].
struct StieltjesFn {
  std::function<cplx(cplx)> eval;
  double lo = -1.0;
  double hi = 1.0;
  std::string name;

  cplx operator()(cplx z) const { return eval(z); }
};

/// Distance from z to the real segment [lo, hi].
inline double distance_to_support(cplx z, double lo, double hi) {
  const double x = std::clamp(z.real(), lo, hi);
  return std::abs(z - cplx(x, 0.0));
}

namespace detail {

inline void require_off_support(cplx z, double lo, double hi) {
  if (distance_to_support(z, lo, hi) == 0.0)
    throw BranchCutError("z = " + std::to_string(z.real()) + (z.imag() < 0 ? "" : "+") +
                         std::to_string(z.imag()) + "i lies on the support [" +
                         std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

// sqrt(z^2 - t) on the branch that behaves like z at infinity, for t in [0, 1].
inline cplx sqrt_z2_minus(cplx z, double t) { return z * std::sqrt(1.0 - t / (z * z)); }

}  // namespace detail

/// Arcsine law on [-1, 1]: S(z) = (z^2 - 1)^{-1/2}, with z S(z) -> 1 at infinity.
inline cplx arcsine_transform(cplx z) {
  detail::require_off_support(z, -1.0, 1.0);
  return 1.0 / detail::sqrt_z2_minus(z, 1.0);
}

inline StieltjesFn arcsine_fn() { return {arcsine_transform, -1.0, 1.0, "arcsine"}; }

struct PowerSemicircleParams {
  unsigned n;
  explicit PowerSemicircleParams(unsigned n_) : n(n_) {
    detail::require(n >= 2, "power semicircle parameter needs n >= 2");
  }
};

inline constexpr double kStieltjesQuadTol = 1e-12;

/**
 * I_n(z) = ∫_0^1 (1 - t)^{(n-3)/2} (z^2 - t)^{-1/2} dt.
 *
 * Evaluated after u = sqrt(1 - t), which turns it into
 * 2 ∫_0^1 u^{n-2} (z^2 - 1 + u^2)^{-1/2} du and removes the endpoint
 * singularity at n = 2.
 */
inline cplx semicircle_integral(unsigned n, cplx z, double abs_tol = kStieltjesQuadTol) {
  detail::require(n >= 2, "power semicircle parameter needs n >= 2");
  detail::require_off_support(z, -1.0, 1.0);
  auto integrand = [&](double u) {
    return 2.0 * std::pow(u, static_cast<double>(n - 2)) / detail::sqrt_z2_minus(z, 1.0 - u * u);
  };
  return integrate<cplx>(integrand, 0.0, 1.0, abs_tol).value;
}

/// Normalizing constant of the power semicircle transform: (n - 1) / 2.
inline double power_semicircle_coefficient(unsigned n) { return 0.5 * (static_cast<double>(n) - 1.0); }

/// Transform of the law with density ∝ (1 - x^2)^{(n-2)/2} on [-1, 1]
/// (uniform at n = 2, Wigner semicircle at n = 3).
inline cplx power_semicircle_transform(const PowerSemicircleParams& p, cplx z,
                                       double abs_tol = kStieltjesQuadTol) {
  return power_semicircle_coefficient(p.n) * semicircle_integral(p.n, z, abs_tol);
}

inline StieltjesFn power_semicircle_fn(unsigned n) {
  PowerSemicircleParams p(n);
  return {[p](cplx z) { return power_semicircle_transform(p, z); }, -1.0, 1.0,
          "power_semicircle_" + std::to_string(n)};
}

/// |z S(z) - 1|; bounded by 2/|z| for |z| >= 10 whenever the support lies in [-1, 1].
inline double normalization_error(const StieltjesFn& f, cplx z) {
  return std::abs(z * f(z) - 1.0);
}

// ---------------------------------------------------------------------------
// Contour derivatives

struct CauchyDerivativeResult {
  cplx value;
  std::size_t nodes;
  double radius;
};

inline constexpr double kCauchyRelTol = 1e-9;

/**
 * order-th derivative of f at z from the Cauchy integral formula
 *
 *   f^(m)(z) = m! / (2π r^m) ∫_0^{2π} f(z + r e^{iθ}) e^{-imθ} dθ,
 *
 * discretized by the trapezoidal rule. The node count doubles (re-using the
 * previous nodes) until successive estimates agree to rel_tol.
 */
inline CauchyDerivativeResult cauchy_derivative(const StieltjesFn& f, cplx z, unsigned order,
                                                double radius, double rel_tol = kCauchyRelTol,
                                                std::size_t max_nodes = 1u << 14) {
  detail::require(radius > 0.0, "contour radius must be positive");
  if (distance_to_support(z, f.lo, f.hi) <= radius)
    throw BranchCutError("contour disk of radius " + std::to_string(radius) +
                         " about z intersects the support of " + f.name);
  const double m = static_cast<double>(order);
  const double scale = std::exp(log_factorial(order) - m * std::log(radius));

  // Accumulates f(z + r e^{iθ}) e^{-imθ} at θ = 2π (j + offset) / count.
  auto node_sum = [&](std::size_t count, double offset) {
    cplx acc = 0.0;
    double mag = 0.0;
    for (std::size_t j = 0; j < count; ++j) {
      const double theta = 2.0 * std::numbers::pi * (static_cast<double>(j) + offset) /
                           static_cast<double>(count);
      const cplx v = f(z + std::polar(radius, theta)) * std::polar(1.0, -m * theta);
      acc += v;
      mag = std::max(mag, std::abs(v));
    }
    return std::pair{acc, mag};
  };

  std::size_t nodes = 8;
  while (nodes < 2 * (order + 1)) nodes *= 2;
  auto [sum, mag] = node_sum(nodes, 0.0);
  cplx estimate = scale * sum / static_cast<double>(nodes);
  while (nodes < max_nodes) {
    // Midpoints of the current grid.
    auto [extra, extra_mag] = node_sum(nodes, 0.5);
    sum += extra;
    mag = std::max(mag, extra_mag);
    nodes *= 2;
    const cplx next = scale * sum / static_cast<double>(nodes);
    const double floor = 1e-14 * scale * mag;
    if (std::abs(next - estimate) <= rel_tol * std::abs(next) + floor)
      return {next, nodes, radius};
    estimate = next;
  }
  throw NumericalError("Cauchy derivative of order " + std::to_string(order) +
                       " did not converge with " + std::to_string(max_nodes) + " nodes");
}

/// Moment E[X^m] recovered from the transform as (2πi)^{-1} ∮ z^m S(z) dz on |z| = R > 1.
inline double moment_from_transform(const StieltjesFn& f, unsigned m, double contour_radius = 2.0,
                                    double tol = 1e-12) {
  detail::require(contour_radius > std::max(std::abs(f.lo), std::abs(f.hi)),
                  "moment contour must enclose the support");
  std::size_t nodes = 16;
  double prev = 0.0;
  for (; nodes <= (1u << 12); nodes *= 2) {
    cplx acc = 0.0;
    for (std::size_t j = 0; j < nodes; ++j) {
      const cplx w = std::polar(contour_radius, 2.0 * std::numbers::pi * static_cast<double>(j) /
                                                    static_cast<double>(nodes));
      acc += std::pow(w, static_cast<int>(m) + 1) * f(w);
    }
    const double est = acc.real() / static_cast<double>(nodes);
    if (nodes > 16 && std::abs(est - prev) <= tol) return est;
    prev = est;
  }
  throw NumericalError("moment contour integral did not converge");
}

// ---------------------------------------------------------------------------
// Residual checks

inline constexpr double kSupportStandoff = 0.25;

struct ResidualRow {
  unsigned n;
  double z;
  double lhs;
  double rhs;
  double residual;
};

namespace detail {

inline void require_grid(const std::vector<double>& grid) {
  for (double z : grid)
    if (!(z >= 1.0 + kSupportStandoff))
      throw InvalidParameter("grid point " + std::to_string(z) +
                             " is closer than the 0.25 standoff to the support [-1, 1]");
}

/// Contour radius for a real point z > 1: half the gap to the support.
inline double default_radius(double z) { return 0.5 * (z - 1.0); }

inline double signed_inverse_factorial(unsigned m) {
  return (m % 2 ? -1.0 : 1.0) * std::exp(-log_factorial(m));
}

}  // namespace detail

/// (z^2 - 1)^{-n/2}: the n-th power of the arcsine transform on the real axis.
inline double arcsine_power(unsigned n, double z) { return std::pow(z * z - 1.0, -0.5 * n); }

/**
 * |(-1)^{n-1}/(n-1)! · d^{n-1}/dz^{n-1} S_n(z) - (z^2 - 1)^{-n/2}| per grid point,
 * S_n the power semicircle transform.
 */
inline std::vector<ResidualRow> transform_derivative_residual(unsigned n, const std::vector<double>& grid) {
  detail::require_grid(grid);
  const StieltjesFn s = power_semicircle_fn(n);
  std::vector<ResidualRow> rows;
  for (double z : grid) {
    const cplx d = cauchy_derivative(s, z, n - 1, detail::default_radius(z)).value;
    const cplx lhs = detail::signed_inverse_factorial(n - 1) * d;
    const double rhs = arcsine_power(n, z);
    rows.push_back({n, z, lhs.real(), rhs, std::abs(lhs - rhs)});
  }
  return rows;
}

/**
 * Same identity written with the bare integral: the (n-1)-th derivative of
 * I_n(z) = ∫_0^1 (1-t)^{(n-3)/2} (z^2-t)^{-1/2} dt is taken first and the
 * prefactor (-1)^{n-1}/(n-1)! · (n-1)/2 applied afterwards.
 */
inline std::vector<ResidualRow> integral_derivative_residual(unsigned n, const std::vector<double>& grid) {
  detail::require(n >= 2, "power semicircle parameter needs n >= 2");
  detail::require_grid(grid);
  const StieltjesFn integral{[n](cplx z) { return semicircle_integral(n, z); }, -1.0, 1.0,
                             "semicircle_integral_" + std::to_string(n)};
  const double prefactor = 0.5 * (static_cast<double>(n) - 1.0);
  std::vector<ResidualRow> rows;
  for (double z : grid) {
    const cplx d = cauchy_derivative(integral, z, n - 1, detail::default_radius(z)).value;
    const cplx lhs = detail::signed_inverse_factorial(n - 1) * prefactor * d;
    const double rhs = arcsine_power(n, z);
    rows.push_back({n, z, lhs.real(), rhs, std::abs(lhs - rhs)});
  }
  return rows;
}

}  // namespace rwa
