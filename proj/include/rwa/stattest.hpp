#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "rwa/batch.hpp"
#include "rwa/distributions.hpp"
#include "rwa/error.hpp"
#include "rwa/moment_index.hpp"
#include "rwa/numeric.hpp"
#include "rwa/rng.hpp"
#include "rwa/special.hpp"

namespace rwa {

inline constexpr double kDefaultZThreshold = 5.0;
inline constexpr double kDefaultKsLevel = 1e-3;
inline constexpr double kDefaultEnergyLevel = 1e-3;

// ---------------------------------------------------------------------------
// Moment z-tests

struct MomentTestResult {
  MomentIndex index;
  double empirical;
  double exact;
  double std_error;
  double z_score;
  double threshold;
  bool pass;
};

/// Empirical mean of prod_j z_j^{s_j} over the batch, with its CLT moments.
inline RunningMoments empirical_moment(const SampleBatch& batch, const MomentIndex& s) {
  detail::require(s.size() == batch.dim(), "moment index length must equal the batch dimension");
  RunningMoments acc;
  for (std::size_t r = 0; r < batch.size(); ++r) {
    double v = 1.0;
    for (std::size_t j = 0; j < s.size(); ++j)
      for (unsigned e = 0; e < s[j]; ++e) v *= batch.at(r, j);
    acc.add(v);
  }
  return acc;
}

/// One-sample z-test of a batch mixed moment against the exact Dirichlet value.
/// The zero index passes trivially with z = 0.
inline MomentTestResult moment_ztest(const SampleBatch& batch, const DirichletParams& target,
                                     const MomentIndex& s,
                                     double threshold = kDefaultZThreshold) {
  detail::require(!batch.empty(), "moment test needs a non-empty batch");
  detail::require(target.size() == batch.dim(), "target dimension must equal the batch dimension");
  if (s.is_zero()) return {s, 1.0, 1.0, 0.0, 0.0, threshold, true};

  const RunningMoments m = empirical_moment(batch, s);
  const double exact = dirichlet_mixed_moment(target, s);
  const double se = m.std_error();
  if (!(se > 0.0))
    throw NumericalError("degenerate batch: zero sample variance for moment " + s.to_string());
  const double z = (m.mean() - exact) / se;
  return {s, m.mean(), exact, se, z, threshold, std::abs(z) <= threshold};
}

struct TwoSampleMomentResult {
  MomentIndex index;
  double mean_a;
  double mean_b;
  double std_error;  ///< sqrt(se_a^2 + se_b^2)
  double z_score;
  double threshold;
  bool pass;
};

/// Two-sample z-test: do two batches agree on a mixed moment?
inline TwoSampleMomentResult moment_two_sample(const SampleBatch& a, const SampleBatch& b,
                                               const MomentIndex& s,
                                               double threshold = kDefaultZThreshold) {
  detail::require(!a.empty() && !b.empty(), "two-sample moment test needs non-empty batches");
  if (s.is_zero()) return {s, 1.0, 1.0, 0.0, 0.0, threshold, true};
  const RunningMoments ma = empirical_moment(a, s), mb = empirical_moment(b, s);
  const double se = std::hypot(ma.std_error(), mb.std_error());
  if (!(se > 0.0))
    throw NumericalError("degenerate batches: zero sample variance for moment " + s.to_string());
  const double z = (ma.mean() - mb.mean()) / se;
  return {s, ma.mean(), mb.mean(), se, z, threshold, std::abs(z) <= threshold};
}

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov

/// Asymptotic critical coefficient c(level) with P(sqrt(N) D_N > c) ~ level.
inline double ks_critical_coefficient(double level) {
  detail::require(level > 0.0 && level < 1.0, "KS level must lie in (0, 1)");
  return std::sqrt(-0.5 * std::log(level / 2.0));
}

/// sup_x |F_N(x) - x| for values already mapped through the reference CDF.
inline double ks_statistic_uniform(std::vector<double> u) {
  std::sort(u.begin(), u.end());
  const double n = static_cast<double>(u.size());
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double lo = u[i] - static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n - u[i];
    d = std::max({d, lo, hi});
  }
  return d;
}

struct KsResult {
  std::size_t coordinate;
  double statistic;
  double threshold;
  double level;
  std::size_t n;
  bool pass;
};

/// KS test of one batch coordinate against its Beta(α_c, Σα − α_c) marginal.
inline KsResult ks_marginal(const SampleBatch& batch, const DirichletParams& target,
                            std::size_t coordinate, double level = kDefaultKsLevel) {
  if (coordinate >= batch.dim() || coordinate >= target.size())
    throw InvalidParameter("KS coordinate " + std::to_string(coordinate) +
                           " out of range for dimension " + std::to_string(batch.dim()));
  detail::require(!batch.empty(), "KS test needs a non-empty batch");
  const BetaCdf cdf(target[coordinate], target.sum() - target[coordinate]);
  const auto col = batch.column(coordinate);
  std::vector<double> u(col.size());
  std::transform(col.begin(), col.end(), u.begin(), cdf);
  const double d = ks_statistic_uniform(std::move(u));
  const double thr = ks_critical_coefficient(level) / std::sqrt(static_cast<double>(col.size()));
  return {coordinate, d, thr, level, col.size(), d <= thr};
}

// ---------------------------------------------------------------------------
// Energy distance two-sample test

struct EnergyOptions {
  double level = kDefaultEnergyLevel;
  unsigned permutations = 999;
  std::size_t max_points = 600;       ///< per-sample subsample size
  std::size_t pair_cap = 10'000'000;  ///< cap on pooled pairwise distances
};

struct EnergyResult {
  double statistic;
  double permutation_p;
  unsigned permutations;
  std::size_t points_a;
  std::size_t points_b;
  std::uint64_t seed;
  std::uint64_t stream_id;
  double level;
  bool pass;
};

namespace detail {

// Evenly strided rows, so identical batches give identical subsamples.
inline std::vector<std::vector<double>> strided_rows(const SampleBatch& b, std::size_t m) {
  std::vector<std::vector<double>> rows(m, std::vector<double>(b.dim()));
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t r = i * b.size() / m;
    for (std::size_t j = 0; j < b.dim(); ++j) rows[i][j] = b.at(r, j);
  }
  return rows;
}

inline double euclid(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) s += (x[j] - y[j]) * (x[j] - y[j]);
  return std::sqrt(s);
}

}  // namespace detail

/**
 * Energy statistic 2E|A-B| - E|A-A'| - E|B-B'| (V-statistic form) with a
 * permutation p-value p = (1 + #{perm >= observed}) / (1 + permutations).
 * Batches larger than max_points are thinned to evenly strided rows.
 */
inline EnergyResult energy_two_sample(const SampleBatch& a, const SampleBatch& b,
                                      RngStream rng, const EnergyOptions& opt = {}) {
  detail::require(!a.empty() && !b.empty(), "energy test needs non-empty batches");
  if (a.dim() != b.dim())
    throw InvalidParameter("energy test dimension mismatch: " + std::to_string(a.dim()) +
                           " vs " + std::to_string(b.dim()));
  detail::require(opt.permutations >= 200, "energy test needs at least 200 permutations");

  std::size_t cap = opt.max_points;
  while (cap > 1 && 4 * cap * cap > opt.pair_cap) --cap;
  const std::size_t ma = std::min(a.size(), cap), mb = std::min(b.size(), cap);
  const auto pa = detail::strided_rows(a, ma), pb = detail::strided_rows(b, mb);

  const double fa = static_cast<double>(ma), fb = static_cast<double>(mb);
  double s_ab = 0.0, s_aa = 0.0, s_bb = 0.0;
  for (std::size_t i = 0; i < ma; ++i)
    for (std::size_t j = 0; j < mb; ++j) s_ab += detail::euclid(pa[i], pb[j]);
  for (std::size_t i = 0; i < ma; ++i)
    for (std::size_t j = 0; j < ma; ++j) s_aa += detail::euclid(pa[i], pa[j]);
  for (std::size_t i = 0; i < mb; ++i)
    for (std::size_t j = 0; j < mb; ++j) s_bb += detail::euclid(pb[i], pb[j]);
  const double observed = 2.0 * s_ab / (fa * fb) - s_aa / (fa * fa) - s_bb / (fb * fb);

  // Pooled distance matrix and row sums for the permutation replicates.
  const std::size_t m = ma + mb;
  std::vector<const std::vector<double>*> pooled;
  for (const auto& r : pa) pooled.push_back(&r);
  for (const auto& r : pb) pooled.push_back(&r);
  std::vector<double> dist(m * m, 0.0), row_sum(m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      const double d = detail::euclid(*pooled[i], *pooled[j]);
      dist[i * m + j] = dist[j * m + i] = d;
    }
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) row_sum[i] += dist[i * m + j];
    total += row_sum[i];
  }

  const RngStream origin = rng;
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  unsigned at_least = 0;
  for (unsigned p = 0; p < opt.permutations; ++p) {
    // Partial Fisher-Yates: the first ma slots become group A.
    for (std::size_t i = 0; i < ma; ++i) std::swap(perm[i], perm[i + rng.below(m - i)]);
    double aa = 0.0, a_all = 0.0;
    for (std::size_t x = 0; x < ma; ++x) {
      const double* row = &dist[perm[x] * m];
      a_all += row_sum[perm[x]];
      for (std::size_t y = 0; y < ma; ++y) aa += row[perm[y]];
    }
    const double ab = a_all - aa;
    const double bb = total - 2.0 * a_all + aa;
    const double stat = 2.0 * ab / (fa * fb) - aa / (fa * fa) - bb / (fb * fb);
    if (stat >= observed) ++at_least;
  }
  const double p_value = (1.0 + at_least) / (1.0 + opt.permutations);
  return {observed, p_value, opt.permutations, ma, mb, origin.seed(), origin.stream_id(),
          opt.level, p_value > opt.level};
}

}  // namespace rwa
