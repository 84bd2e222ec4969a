#include <gtest/gtest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/binomial.hpp>
#include <cmath>
#include <functional>
#include <numbers>

#include "rwa/moments.hpp"

using namespace rwa;

namespace {

// Brute-force expansion with tgamma only, kept independent of MomentExpander.
double brute_force_moment(const std::vector<std::vector<double>>& a, const std::vector<unsigned>& s) {
  const std::size_t n = a.size(), k = a[0].size();
  std::vector<double> r(n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (double v : a[i]) r[i] += v;
    total += r[i];
  }
  std::vector<std::vector<unsigned>> h(n, std::vector<unsigned>(k, 0));
  double sum = 0.0;
  std::function<void(std::size_t, std::size_t, unsigned)> rec = [&](std::size_t j, std::size_t i,
                                                                    unsigned left) {
    if (j == k) {
      double term = 1.0, order = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        term *= std::tgamma(s[c] + 1.0);
        for (std::size_t q = 0; q < n; ++q) term /= std::tgamma(h[q][c] + 1.0);
      }
      for (std::size_t q = 0; q < n; ++q) {
        double hq = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
          hq += h[q][c];
          term *= std::tgamma(a[q][c] + h[q][c]) / std::tgamma(a[q][c]);
        }
        term *= std::tgamma(r[q]) / std::tgamma(r[q] + hq);  // X_q moment denominator
        term *= std::tgamma(r[q] + hq) / std::tgamma(r[q]);  // W_q moment numerator
        order += hq;
      }
      sum += term * std::tgamma(total) / std::tgamma(total + order);
      return;
    }
    if (i + 1 == n) {
      h[i][j] = left;
      rec(j + 1, 0, j + 1 < k ? s[j + 1] : 0);
      return;
    }
    for (unsigned v = 0; v <= left; ++v) {
      h[i][j] = v;
      rec(j, i + 1, left - v);
    }
  };
  rec(0, 0, s[0]);
  return sum;
}

}  // namespace

TEST(Compositions, CountsAndOrder) {
  for (unsigned t = 0; t <= 6; ++t)
    for (std::size_t parts = 1; parts <= 4; ++parts)
      EXPECT_EQ(compositions(t, parts).size(),
                static_cast<std::size_t>(boost::math::binomial_coefficient<double>(t + parts - 1, parts - 1)));
  const auto c = compositions(2, 2);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[0], (Composition{0, 2}));
  EXPECT_EQ(c[2], (Composition{2, 0}));
  EXPECT_THROW(compositions(2, 0), InvalidParameter);
}

TEST(CompositionTable, SizeMatchesBinomialProduct) {
  const CompositionTable t(MomentIndex({2, 1, 3}), 3);
  EXPECT_EQ(t.size(), t.expected_size());
  EXPECT_EQ(t.size(), 6.0 * 3.0 * 10.0);
  EXPECT_EQ(t.column(1).size(), 3u);
}

TEST(CompositionTable, GrowsMonotonicallyWithOrder) {
  double prev = 0.0;
  for (unsigned m = 0; m <= 6; ++m) {
    const CompositionTable t(MomentIndex({m, 1}), 3);
    EXPECT_GT(t.size(), prev);
    prev = t.size();
  }
}

TEST(MomentExpansion, KnownValue) {
  // van Assche: Z ~ Dirichlet(1,1), so E[Z_1^2] = 1/3 and E[Z_1 Z_2] = 1/6.
  const RwaSpec spec({{0.5, 0.5}, {0.5, 0.5}});
  EXPECT_NEAR(rwa_moment_expansion(spec, MomentIndex({2, 0})), 1.0 / 3, 1e-15);
  EXPECT_NEAR(rwa_moment_expansion(spec, MomentIndex({1, 1})), 1.0 / 6, 1e-15);
  EXPECT_EQ(rwa_moment_expansion(spec, MomentIndex({0, 0})), 1.0);
}

TEST(MomentExpansion, MatchesBruteForceOracle) {
  const std::vector<std::vector<std::vector<double>>> specs{
      {{0.5, 1}, {2, 0.5}, {1, 3}}, {{1, 2, 3}, {4, 5, 6}}, {{0.5, 3.5, 1}, {2, 1, 0.5}, {1, 1, 2}}};
  for (const auto& a : specs) {
    const RwaSpec spec(a);
    for (const auto& s : moment_indices_up_to(spec.k(), 4)) {
      std::vector<unsigned> sv(s.values().begin(), s.values().end());
      const double oracle = brute_force_moment(a, sv);
      EXPECT_NEAR(rwa_moment_expansion(spec, s), oracle, 1e-12 * oracle) << spec.to_string() << s.to_string();
    }
  }
}

TEST(MomentExpansion, MatchesClosedFormOnFixtures) {
  for (const auto& a : std::vector<std::vector<std::vector<double>>>{
           {{2, 2}, {2, 2}}, {{1, 1, 1}, {1, 1, 1}, {1, 1, 1}}, {{1, 2, 3}, {4, 5, 6}}}) {
    const RwaSpec spec(a);
    const MomentExpander ex = make_expander(spec, 6);
    for (const auto& s : moment_indices_up_to(spec.k(), 6, true)) {
      const double c = rwa_moment_closed_form(spec, s);
      EXPECT_NEAR(ex.moment(s), c, 1e-12 * c) << s.to_string();
    }
  }
}

TEST(MomentExpansion, CapsAreEnforced) {
  const RwaSpec spec({{1, 1}, {1, 1}});
  EXPECT_THROW(rwa_moment_expansion(spec, MomentIndex({3, 3}), 5), CapExceeded);
  const MomentExpander ex = make_expander(spec, 3);
  EXPECT_THROW(ex.moment(MomentIndex({2, 2})), CapExceeded);
  EXPECT_THROW(ex.moment(MomentIndex({1, 1, 1})), InvalidParameter);
}

TEST(MomentExpansion, GeneralWeightsMatchDirectMixture) {
  // Free weights: E[Z_1] = Σ_i E[W_i] E[X_i1].
  const DirichletParams w{1, 3};
  const std::vector<DirichletParams> rows{{2, 1}, {1, 4}};
  const MomentExpander ex(w, rows, 2);
  const double expected = 0.25 * (2.0 / 3) + 0.75 * (1.0 / 5);
  EXPECT_NEAR(ex.moment(MomentIndex({1, 0})), expected, 1e-15);
}

TEST(WeightMoment, MatchesDirichletMoment) {
  const RwaSpec spec({{1, 2}, {0.5, 0.5}, {2, 1}});
  const std::vector<unsigned> h{2, 0, 1};
  EXPECT_NEAR(weight_moment(spec, h), dirichlet_mixed_moment(weight_params(spec), h), 1e-15);
}

TEST(DirichletMultinomial, UniformCase) {
  // alpha = (1, 1): every count is equally likely.
  for (unsigned m = 0; m <= 8; ++m)
    for (unsigned x = 0; x <= m; ++x)
      EXPECT_NEAR(dirmult_pmf({DirichletParams{1, 1}, m}, std::vector<unsigned>{x, m - x}),
                  1.0 / (m + 1), 1e-14);
}

TEST(DirichletMultinomial, MatchesBetaBinomial) {
  const double a = 0.5, b = 2.0;
  const unsigned m = 7;
  for (unsigned x = 0; x <= m; ++x) {
    const double oracle = boost::math::binomial_coefficient<double>(m, x) *
                          boost::math::beta(x + a, m - x + b) / boost::math::beta(a, b);
    EXPECT_NEAR(dirmult_pmf({DirichletParams{a, b}, m}, std::vector<unsigned>{x, m - x}), oracle,
                1e-14);
  }
}

TEST(DirichletMultinomial, NormalizationAndErrors) {
  EXPECT_NEAR(dirmult_normalization_check({DirichletParams{0.5, 1, 2, 5}, 10}), 1.0, 1e-12);
  EXPECT_NEAR(dirmult_normalization_check({DirichletParams{2, 3}, 0}), 1.0, 1e-15);
  EXPECT_THROW(dirmult_normalization_check({DirichletParams{1, 1}, 65}), CapExceeded);
  EXPECT_THROW(dirmult_pmf({DirichletParams{1, 1}, 3}, std::vector<unsigned>{1, 1}), InvalidParameter);
  EXPECT_THROW(dirmult_pmf({DirichletParams{1, 1}, 2}, std::vector<unsigned>{1, 1, 0}), InvalidParameter);
}

TEST(ProductIdentity, SeriesMatchesProduct) {
  for (const auto& a : std::vector<std::vector<double>>{{0.5, 0.5}, {1, 2}, {0.7, 1.1, 2.5}})
    for (double t1 : {-0.5, 0.0, 0.5}) {
      std::vector<double> t(a.size(), -0.25);
      t[0] = t1;
      const auto r = product_identity_check(DirichletParams(a), t);
      EXPECT_LT(r.abs_error(), 1e-7);
      EXPECT_LE(r.tail_bound, 1e-8);
      EXPECT_GE(r.order, 12u);
    }
}

TEST(ProductIdentity, QuadratureOracle) {
  // k = 2: E[(1 - t1 B - t2 (1 - B))^{-c}] over B ~ Beta(a1, a2), with B = sin^2 θ.
  boost::math::quadrature::tanh_sinh<double> ts;
  for (const auto& a : std::vector<std::vector<double>>{{0.5, 0.5}, {1, 2}})
    for (double t1 : {-0.5, 0.25, 0.5})
      for (double t2 : {-0.5, 0.5}) {
        const double c = a[0] + a[1];
        auto f = [&](double th) {
          const double s = std::sin(th), co = std::cos(th);
          return 2 * std::pow(s, 2 * a[0] - 1) * std::pow(co, 2 * a[1] - 1) *
                 std::pow(1 - t1 * s * s - t2 * co * co, -c);
        };
        const double lhs = ts.integrate(f, 0.0, std::numbers::pi / 2, 1e-14) / boost::math::beta(a[0], a[1]);
        const std::vector<double> t{t1, t2};
        const auto r = product_identity_check(DirichletParams(a), t);
        EXPECT_NEAR(r.series, lhs, 1e-7);
        EXPECT_NEAR(r.product, lhs, 1e-9);
      }
}

TEST(ProductIdentity, Validation) {
  EXPECT_THROW(product_identity_check({1, 1}, std::vector<double>{0.5}), InvalidParameter);
  EXPECT_THROW(product_identity_check({1, 1}, std::vector<double>{1.0, 0.0}), InvalidParameter);
}

TEST(VariantReading, ExactExpansionSelectsSymmetric) {
  const auto sym = check_variant_reading({1, 2, 3}, VariantReading::symmetric);
  const auto asym = check_variant_reading({1, 2, 3}, VariantReading::asymmetric);
  EXPECT_TRUE(sym.verified);
  EXPECT_LT(sym.max_rel_error, 1e-12);
  EXPECT_FALSE(asym.verified);
  EXPECT_GT(asym.max_rel_error, 0.1);
  EXPECT_TRUE(check_variant_reading({0.5, 0.5}, VariantReading::symmetric).verified);
}
