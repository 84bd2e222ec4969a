#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <limits>

#include "rwa/batch.hpp"
#include "rwa/distributions.hpp"
#include "rwa/moment_index.hpp"
#include "rwa/numeric.hpp"

using namespace rwa;

TEST(GammaParams, RejectsBadParameters) {
  EXPECT_THROW(GammaParams(0.0), InvalidParameter);
  EXPECT_THROW(GammaParams(-1.0), InvalidParameter);
  EXPECT_THROW(GammaParams(1.0, 0.0), InvalidParameter);
  EXPECT_THROW(GammaParams(std::numeric_limits<double>::infinity()), InvalidParameter);
  EXPECT_DOUBLE_EQ(GammaParams(3.0, 2.0).mean(), 1.5);
  EXPECT_DOUBLE_EQ(GammaParams(3.0, 2.0).variance(), 0.75);
}

TEST(DirichletParams, Validation) {
  EXPECT_THROW(DirichletParams({1.0}), InvalidParameter);
  EXPECT_THROW(DirichletParams({1.0, 0.0}), InvalidParameter);
  EXPECT_THROW(DirichletParams({1.0, -2.0}), InvalidParameter);
  EXPECT_THROW(DirichletParams({1.0, std::nan("")}), InvalidParameter);
  const DirichletParams p{0.5, 1.5, 2.0};
  EXPECT_EQ(p.size(), 3u);
  EXPECT_DOUBLE_EQ(p.sum(), 4.0);
}

TEST(SimplexPoint, Validation) {
  EXPECT_NO_THROW(SimplexPoint({0.25, 0.75}));
  EXPECT_NO_THROW(SimplexPoint({1.0, 0.0, 0.0}));
  EXPECT_THROW(SimplexPoint({0.5, 0.6}), InvalidParameter);
  EXPECT_THROW(SimplexPoint({-0.1, 1.1}), InvalidParameter);
  EXPECT_NO_THROW(SimplexPoint({0.5, 0.5 + 5e-13}));
  EXPECT_THROW(SimplexPoint({0.5, 0.5 + 5e-12}), InvalidParameter);
}

class GammaSampler : public ::testing::TestWithParam<double> {};

TEST_P(GammaSampler, MeanAndVarianceMatch) {
  const double a = GetParam();
  RngStream rng(11, static_cast<std::uint64_t>(a * 1000));
  RunningMoments m, sq;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double g = sample_gamma(GammaParams(a), rng);
    ASSERT_GT(g, 0.0);
    m.add(g);
    sq.add(g * g);
  }
  EXPECT_NEAR(m.mean(), a, 5 * m.std_error());
  // E[G^2] = a (a + 1).
  EXPECT_NEAR(sq.mean(), a * (a + 1), 5 * sq.std_error());
}

INSTANTIATE_TEST_SUITE_P(Shapes, GammaSampler, ::testing::Values(0.1, 0.5, 1.0, 2.5, 30.0));

TEST(GammaSampler, RateScalesDraws) {
  RngStream a(5), b(5);
  for (int i = 0; i < 100; ++i)
    EXPECT_NEAR(sample_gamma(GammaParams(2.0, 4.0), a), sample_gamma(GammaParams(2.0), b) / 4.0,
                1e-15);
}

TEST(GammaSampler, SmallShapeCdfMatchesIncompleteGamma) {
  // P(G <= x) for shape 0.3 against Boost's regularized lower incomplete gamma.
  RngStream rng(12);
  const int n = 100000;
  const double xs[] = {1e-3, 0.05, 0.3, 1.0};
  int counts[4] = {};
  for (int i = 0; i < n; ++i) {
    const double g = sample_gamma(GammaParams(0.3), rng);
    for (int j = 0; j < 4; ++j) counts[j] += g <= xs[j];
  }
  for (int j = 0; j < 4; ++j) {
    const double p = boost::math::gamma_p(0.3, xs[j]);
    EXPECT_NEAR(counts[j] / double(n), p, 5 * std::sqrt(p * (1 - p) / n)) << xs[j];
  }
}

TEST(Dirichlet, MixedMomentKnownValues) {
  // Beta(1/2, 1/2): E[X] = 1/2, E[X^2] = 3/8, E[X^3] = 5/16.
  const DirichletParams arcsine{0.5, 0.5};
  EXPECT_NEAR(dirichlet_mixed_moment(arcsine, MomentIndex({1, 0})), 0.5, 1e-15);
  EXPECT_NEAR(dirichlet_mixed_moment(arcsine, MomentIndex({2, 0})), 0.375, 1e-15);
  EXPECT_NEAR(dirichlet_mixed_moment(arcsine, MomentIndex({3, 0})), 0.3125, 1e-15);
  EXPECT_NEAR(dirichlet_mixed_moment(arcsine, MomentIndex({1, 1})), 0.125, 1e-15);
  // Dirichlet(1,1,1): E[X1 X2 X3] = 2! / 5! = 1/60.
  EXPECT_NEAR(dirichlet_mixed_moment({1, 1, 1}, MomentIndex({1, 1, 1})), 1.0 / 60, 1e-15);
  EXPECT_EQ(dirichlet_mixed_moment({2, 3}, MomentIndex({0, 0})), 1.0);
  EXPECT_THROW(dirichlet_mixed_moment({2, 3}, MomentIndex({1, 0, 0})), InvalidParameter);
}

TEST(Dirichlet, SamplesLieOnSimplexAndMatchMoments) {
  const DirichletParams p{0.5, 2.0, 3.5};
  const SampleBatch b = sample_dirichlet_batch(p, 100000, RngStream(21));
  for (std::size_t r = 0; r < b.size(); ++r) {
    double s = 0.0;
    for (std::size_t j = 0; j < 3; ++j) s += b.at(r, j);
    ASSERT_NEAR(s, 1.0, 1e-12);
  }
  for (const auto& s : moment_indices_up_to(3, 3)) {
    RunningMoments m;
    for (std::size_t r = 0; r < b.size(); ++r) {
      double v = 1.0;
      for (std::size_t j = 0; j < 3; ++j) v *= std::pow(b.at(r, j), s[j]);
      m.add(v);
    }
    EXPECT_NEAR(m.mean(), dirichlet_mixed_moment(p, s), 5 * m.std_error()) << s.to_string();
  }
}

TEST(Dirichlet, TinyParametersStillSample) {
  RngStream rng(3);
  for (int i = 0; i < 1000; ++i) {
    const SimplexPoint x = sample_dirichlet({1e-3, 1e-3}, rng);
    ASSERT_NEAR(x[0] + x[1], 1.0, 1e-12);
  }
}

TEST(Dirichlet, DensityIntegratesToOne) {
  // alpha = (2, 3, 5): integrate over x1 in (0,1), x2 in (0, 1 - x1).
  const DirichletParams p{2, 3, 5};
  using boost::math::quadrature::gauss_kronrod;
  auto inner = [&](double x1) {
    auto f = [&](double x2) {
      const double x3 = std::max(0.0, 1.0 - x1 - x2);
      if (x3 <= 0.0 || x2 <= 0.0) return 0.0;
      return std::exp(dirichlet_log_pdf(p, SimplexPoint({x1, x2, 1.0 - x1 - x2})));
    };
    return gauss_kronrod<double, 31>::integrate(f, 0.0, 1.0 - x1, 10, 1e-13);
  };
  const double total = gauss_kronrod<double, 31>::integrate(inner, 0.0, 1.0, 10, 1e-13);
  EXPECT_NEAR(total, 1.0, 1e-9);
}

TEST(Dirichlet, DensityMatchesBetaAtKEqualsTwo) {
  const DirichletParams p{2.5, 0.7};
  for (double x : {0.1, 0.4, 0.9}) {
    const double expected = std::pow(x, 1.5) * std::pow(1 - x, -0.3) / boost::math::beta(2.5, 0.7);
    EXPECT_NEAR(std::exp(dirichlet_log_pdf(p, SimplexPoint({x, 1 - x}))), expected, 1e-12);
  }
}

TEST(Dirichlet, BoundaryDensity) {
  EXPECT_THROW(dirichlet_log_pdf({0.5, 2}, SimplexPoint({0.0, 1.0})), InfiniteDensity);
  EXPECT_EQ(dirichlet_log_pdf({2, 2}, SimplexPoint({0.0, 1.0})),
            -std::numeric_limits<double>::infinity());
  // alpha_i = 1 contributes no factor, so the boundary is regular.
  EXPECT_NEAR(dirichlet_log_pdf({1, 1}, SimplexPoint({0.0, 1.0})), 0.0, 1e-15);
}

TEST(Dirichlet, Marginal) {
  const auto m = dirichlet_marginal({1, 2, 3}, 1);
  EXPECT_EQ(m, DirichletParams({2, 4}));
  EXPECT_THROW(dirichlet_marginal({1, 2}, 2), InvalidParameter);
}

TEST(MomentIndex, CapAndEnumeration) {
  EXPECT_THROW(MomentIndex({5, 4}), CapExceeded);
  EXPECT_NO_THROW(MomentIndex({5, 4}, 9));
  try {
    MomentIndex({9, 0});
    FAIL();
  } catch (const CapExceeded& e) {
    EXPECT_NE(std::string(e.what()).find("8"), std::string::npos);
  }
  // Number of s in N^k with 1 <= |s| <= m is C(m + k, k) - 1.
  EXPECT_EQ(moment_indices_up_to(2, 3).size(), 9u);
  EXPECT_EQ(moment_indices_up_to(3, 3).size(), 19u);
  EXPECT_EQ(moment_indices_up_to(3, 5, true).size(), 56u);
  EXPECT_TRUE(moment_indices_up_to(3, 2, true).front().is_zero());
}
