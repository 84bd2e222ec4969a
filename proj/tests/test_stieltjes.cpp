#include <gtest/gtest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>

#include "rwa/distributions.hpp"
#include "rwa/moment_index.hpp"
#include "rwa/stieltjes.hpp"

using namespace rwa;

namespace {

// S(z) = ∫ f(x) / (z - x) dx for a density on [-1, 1], by tanh-sinh quadrature.
template <class F>
cplx transform_by_quadrature(F density, cplx z) {
  boost::math::quadrature::tanh_sinh<double> ts;
  const double re = ts.integrate([&](double x) { return (density(x) / (z - x)).real(); }, -1.0, 1.0, 1e-14);
  const double im = ts.integrate([&](double x) { return (density(x) / (z - x)).imag(); }, -1.0, 1.0, 1e-14);
  return {re, im};
}

const cplx kPoints[] = {{2.0, 0.0}, {0.3, 0.5}, {-1.5, 0.2}, {0.0, -3.0}, {1.2, 0.01}, {-4.0, 0.0}};

}  // namespace

TEST(Arcsine, MatchesQuadrature) {
  // x = cos θ turns the arcsine law into the uniform law on [0, π].
  boost::math::quadrature::tanh_sinh<double> ts;
  for (cplx z : kPoints) {
    if (std::abs(z.imag()) < 0.1 && std::abs(z.real()) < 1.5) continue;
    const auto part = [&](bool imag) {
      return ts.integrate(
                 [&](double th) {
                   const cplx v = 1.0 / (z - std::cos(th));
                   return imag ? v.imag() : v.real();
                 },
                 0.0, std::numbers::pi, 1e-14) /
             std::numbers::pi;
    };
    EXPECT_LT(std::abs(arcsine_transform(z) - cplx(part(false), part(true))), 1e-10) << z;
  }
}

TEST(Arcsine, OnSupportIsRejected) {
  EXPECT_THROW(arcsine_transform({0.5, 0.0}), BranchCutError);
  EXPECT_THROW(arcsine_transform({1.0, 0.0}), BranchCutError);
  EXPECT_NO_THROW(arcsine_transform({1.0, 1e-9}));
}

TEST(PowerSemicircle, AnalyticOracles) {
  for (cplx z : kPoints) {
    // Uniform law (n = 2) and Wigner semicircle (n = 3).
    const cplx uniform = 0.5 * std::log((z + 1.0) / (z - 1.0));
    const cplx wigner = 2.0 * (z - z * std::sqrt(1.0 - 1.0 / (z * z)));
    EXPECT_LT(std::abs(power_semicircle_transform(PowerSemicircleParams(2), z) - uniform), 1e-10) << z;
    EXPECT_LT(std::abs(power_semicircle_transform(PowerSemicircleParams(3), z) - wigner), 1e-10) << z;
  }
}

TEST(PowerSemicircle, MatchesQuadratureForHigherN) {
  for (unsigned n : {4u, 5u, 7u}) {
    const double norm = std::tgamma((n + 1) / 2.0) / (std::sqrt(std::numbers::pi) * std::tgamma(n / 2.0));
    auto density = [&](double x) { return norm * std::pow(1 - x * x, (n - 2) / 2.0); };
    for (cplx z : {cplx(2.0, 0.0), cplx(0.1, 0.7), cplx(-3.0, -0.5)})
      EXPECT_LT(std::abs(power_semicircle_transform(PowerSemicircleParams(n), z) -
                         transform_by_quadrature(density, z)),
                1e-9)
          << n << " " << z;
  }
}

TEST(PowerSemicircle, CoefficientAndValidation) {
  EXPECT_EQ(power_semicircle_coefficient(2), 0.5);
  EXPECT_EQ(power_semicircle_coefficient(3), 1.0);
  EXPECT_EQ(power_semicircle_coefficient(5), 2.0);
  EXPECT_THROW(PowerSemicircleParams(1), InvalidParameter);
  EXPECT_THROW(power_semicircle_transform(PowerSemicircleParams(3), {0.2, 0.0}), BranchCutError);
}

TEST(Stieltjes, HerglotzSignAndConjugateSymmetry) {
  for (const auto& f : {arcsine_fn(), power_semicircle_fn(2), power_semicircle_fn(3), power_semicircle_fn(6)})
    for (cplx z : {cplx(0.3, 0.5), cplx(-2.0, 0.1), cplx(5.0, 4.0)}) {
      EXPECT_LT(f(z).imag(), 0.0) << f.name << z;
      EXPECT_LT(std::abs(f(std::conj(z)) - std::conj(f(z))), 1e-12) << f.name << z;
    }
}

TEST(Stieltjes, NormalizationAtInfinity) {
  for (const auto& f : {arcsine_fn(), power_semicircle_fn(2), power_semicircle_fn(4)})
    for (double r : {10.0, 1e3, 1e6})
      for (cplx z : {cplx(r, 0), cplx(0, r), cplx(-r, 0)})
        EXPECT_LE(normalization_error(f, z), 2.0 / r) << f.name << z;
}

TEST(Stieltjes, MomentsOfUniformMatchRescaledDirichlet) {
  // n = 2 is uniform on [-1, 1], i.e. 2B - 1 with (B, 1 - B) ~ Dirichlet(1, 1).
  const auto f = power_semicircle_fn(2);
  const DirichletParams beta{1, 1};
  for (unsigned m = 0; m <= 6; ++m) {
    double oracle = 0.0;
    for (unsigned j = 0; j <= m; ++j)
      oracle += std::tgamma(m + 1.0) / (std::tgamma(j + 1.0) * std::tgamma(m - j + 1.0)) *
                std::pow(2.0, j) * (((m - j) % 2) ? -1.0 : 1.0) *
                dirichlet_mixed_moment(beta, MomentIndex({j, 0}));
    EXPECT_NEAR(moment_from_transform(f, m), oracle, 1e-10) << m;
  }
}

TEST(Stieltjes, SemicircleMomentsAreScaledCatalan) {
  const auto f = power_semicircle_fn(3);
  const double catalan[] = {1, 1, 2, 5};
  for (unsigned k = 0; k < 4; ++k) {
    EXPECT_NEAR(moment_from_transform(f, 2 * k), catalan[k] / std::pow(4.0, k), 1e-10);
    EXPECT_NEAR(moment_from_transform(f, 2 * k + 1), 0.0, 1e-10);
  }
}

TEST(CauchyDerivative, EntireFunction) {
  const StieltjesFn exp_fn{[](cplx z) { return std::exp(z); }, 100.0, 101.0, "exp"};
  for (unsigned m : {0u, 1u, 3u, 6u}) {
    const auto r = cauchy_derivative(exp_fn, 0.5, m, 1.0);
    EXPECT_NEAR(r.value.real(), std::exp(0.5), 1e-11) << m;
    EXPECT_NEAR(r.value.imag(), 0.0, 1e-11);
  }
}

TEST(CauchyDerivative, IndependentOfRadius) {
  const auto s = power_semicircle_fn(3);
  const auto a = cauchy_derivative(s, 3.0, 2, 0.5).value;
  const auto b = cauchy_derivative(s, 3.0, 2, 1.0).value;
  EXPECT_LT(std::abs(a - b), 1e-10 * std::abs(a));
  // d/dz of 2(z - sqrt(z^2 - 1)) = 2 - 2z / sqrt(z^2 - 1).
  const double exact = 2.0 - 6.0 / std::sqrt(8.0);
  EXPECT_NEAR(cauchy_derivative(s, 3.0, 1, 1.0).value.real(), exact, 1e-10);
}

TEST(CauchyDerivative, ContourMustAvoidSupport) {
  EXPECT_THROW(cauchy_derivative(arcsine_fn(), 1.5, 2, 0.6), BranchCutError);
  EXPECT_THROW(cauchy_derivative(arcsine_fn(), 1.5, 2, 0.0), InvalidParameter);
}

TEST(Residuals, DerivativeIdentityOnGrid) {
  const std::vector<double> grid{1.5, 2, 3, 5};
  for (unsigned n : {2u, 3u}) {
    for (const auto& r : transform_derivative_residual(n, grid)) EXPECT_LT(r.residual, 1e-8) << n << " " << r.z;
    for (const auto& r : integral_derivative_residual(n, grid)) EXPECT_LT(r.residual, 1e-8) << n << " " << r.z;
  }
  for (const auto& r : transform_derivative_residual(4, grid)) EXPECT_LT(r.residual, 1e-6);
  for (const auto& r : integral_derivative_residual(4, grid)) EXPECT_LT(r.residual, 1e-6);
  const auto rows = transform_derivative_residual(3, {2.0});
  EXPECT_NEAR(rows[0].rhs, 1.0 / std::pow(3.0, 1.5), 1e-15);
}

TEST(Residuals, GridTooCloseToSupport) {
  EXPECT_THROW(transform_derivative_residual(3, {1.1}), InvalidParameter);
  EXPECT_THROW(integral_derivative_residual(3, {0.5}), InvalidParameter);
}
