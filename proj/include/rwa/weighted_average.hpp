#pragma once

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "rwa/batch.hpp"
#include "rwa/distributions.hpp"
#include "rwa/error.hpp"
#include "rwa/rng.hpp"

namespace rwa {

/**
 * An instance of the randomly weighted average Z = Σ_j W_j X_j with
 * X_j ~ Dirichlet(row j of the α-matrix) independent, and W independent of
 * the X_j with W ~ Dirichlet(row sums).
 *
 * The α-matrix is n × k (n summands, each a point of the k-simplex), n, k >= 2.
 */
class RwaSpec {
 public:
  explicit RwaSpec(std::vector<std::vector<double>> alphas) : alphas_(std::move(alphas)) {
    detail::require(alphas_.size() >= 2, "an RWA spec needs n >= 2 rows");
    detail::require(alphas_.front().size() >= 2, "an RWA spec needs k >= 2 columns");
    for (const auto& row : alphas_) {
      detail::require(row.size() == alphas_.front().size(), "all alpha rows must have length k");
      for (double a : row)
        detail::require(a > 0.0 && std::isfinite(a), "alpha entries must be positive and finite");
    }
  }

  std::size_t n() const noexcept { return alphas_.size(); }
  std::size_t k() const noexcept { return alphas_.front().size(); }
  double alpha(std::size_t row, std::size_t col) const { return alphas_[row][col]; }
  const std::vector<std::vector<double>>& alphas() const noexcept { return alphas_; }

  /// Law of X_row.
  DirichletParams row_params(std::size_t row) const { return DirichletParams(alphas_.at(row)); }

  std::string to_string() const {
    std::string out = "[";
    for (std::size_t j = 0; j < n(); ++j) {
      out += j ? ",[" : "[";
      for (std::size_t i = 0; i < k(); ++i) {
        if (i) out += ',';
        std::string v = std::to_string(alphas_[j][i]);
        v.erase(v.find_last_not_of('0') + 1);
        if (v.back() == '.') v.pop_back();
        out += v;
      }
      out += ']';
    }
    return out + ']';
  }

  friend bool operator==(const RwaSpec&, const RwaSpec&) = default;

 private:
  std::vector<std::vector<double>> alphas_;
};

/// Law of the weight vector W: Dirichlet of the row sums.
inline DirichletParams weight_params(const RwaSpec& spec) {
  std::vector<double> w(spec.n(), 0.0);
  for (std::size_t j = 0; j < spec.n(); ++j)
    for (std::size_t i = 0; i < spec.k(); ++i) w[j] += spec.alpha(j, i);
  return DirichletParams(std::move(w));
}

/// Claimed law of Z: Dirichlet of the column sums.
inline DirichletParams target_params(const RwaSpec& spec) {
  std::vector<double> c(spec.k(), 0.0);
  for (std::size_t j = 0; j < spec.n(); ++j)
    for (std::size_t i = 0; i < spec.k(); ++i) c[i] += spec.alpha(j, i);
  return DirichletParams(std::move(c));
}

/// One draw of the construction, keeping the ingredients.
struct RwaSample {
  SimplexPoint z;
  SimplexPoint w;
  std::vector<SimplexPoint> xs;
};

inline constexpr double kConservationTolerance = 1e-10;

/// Throws NumericalError unless z == Σ w_j x_j componentwise within 1e-10.
inline void check_conservation(const RwaSample& s) {
  for (std::size_t i = 0; i < s.z.size(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < s.w.size(); ++j) acc += s.w[j] * s.xs[j][i];
    if (std::abs(acc - s.z[i]) > kConservationTolerance)
      throw NumericalError("RWA sample violates z = sum_j w_j x_j at coordinate " +
                           std::to_string(i));
  }
}

/// Z = Σ W_j X_j for arbitrary Dirichlet weights and component laws (no parameter coupling).
inline RwaSample sample_weighted_average(const DirichletParams& weights,
                                         const std::vector<DirichletParams>& rows,
                                         RngStream& rng) {
  detail::require(weights.size() == rows.size(), "one weight per component vector is required");
  const std::size_t k = rows.front().size();
  SimplexPoint w = sample_dirichlet(weights, rng);
  std::vector<SimplexPoint> xs;
  xs.reserve(rows.size());
  for (const auto& row : rows) {
    detail::require(row.size() == k, "component vectors must share the dimension k");
    xs.push_back(sample_dirichlet(row, rng));
  }
  std::vector<double> z(k, 0.0);
  for (std::size_t j = 0; j < xs.size(); ++j)
    for (std::size_t i = 0; i < k; ++i) z[i] += w[j] * xs[j][i];
  RwaSample out{SimplexPoint(std::move(z)), std::move(w), std::move(xs)};
  check_conservation(out);
  return out;
}

/// Direct path: W ~ Dirichlet(weight_params), X_j ~ Dirichlet(row j), Z = Σ W_j X_j.
inline RwaSample sample_rwa_direct(const RwaSpec& spec, RngStream& rng) {
  std::vector<DirichletParams> rows;
  rows.reserve(spec.n());
  for (std::size_t j = 0; j < spec.n(); ++j) rows.push_back(spec.row_params(j));
  return sample_weighted_average(weight_params(spec), rows, rng);
}

/**
 * Gamma path: Y_j ~ Gamma(Σ_i α_i^(j), 1) independent of the X_j; the weights
 * are W_j = Y_j / Σ_l Y_l. Shares no post-processing with the direct path.
 */
inline RwaSample sample_rwa_gamma_path(const RwaSpec& spec, RngStream& rng) {
  const std::size_t n = spec.n(), k = spec.k();
  std::vector<double> y(n);
  double y_total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double shape = 0.0;
    for (std::size_t i = 0; i < k; ++i) shape += spec.alpha(j, i);
    y[j] = sample_gamma(GammaParams(shape, 1.0), rng);
    y_total += y[j];
  }
  if (!(y_total > 0.0)) throw NumericalError("gamma path: all weight gammas underflowed");

  std::vector<double> w(n);
  std::vector<SimplexPoint> xs;
  xs.reserve(n);
  std::vector<double> z(k, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    w[j] = y[j] / y_total;
    xs.push_back(sample_dirichlet(spec.row_params(j), rng));
    for (std::size_t i = 0; i < k; ++i) z[i] += (y[j] / y_total) * xs.back()[i];
  }
  RwaSample out{SimplexPoint(std::move(z)), SimplexPoint(std::move(w)), std::move(xs)};
  check_conservation(out);
  return out;
}

/**
 * Gamma-ratio path: one n × k matrix of independent Γ(α_i^(j)) draws yields
 * every ingredient at once. X_j is row j over its row sum, W the row sums over
 * the grand total, and Z the column sums over the grand total.
 */
inline RwaSample sample_rwa_gamma_ratio(const RwaSpec& spec, RngStream& rng) {
  const std::size_t n = spec.n(), k = spec.k();
  std::vector<double> g(n * k), row_sum(n, 0.0), col_sum(k, 0.0);
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < k; ++i) {
      const double v = sample_gamma(GammaParams(spec.alpha(j, i)), rng);
      g[j * k + i] = v;
      row_sum[j] += v;
      col_sum[i] += v;
    }
  for (double r : row_sum) {
    if (!(r > 0.0)) throw NumericalError("gamma-ratio path: a row of gammas underflowed");
    total += r;
  }
  std::vector<SimplexPoint> xs;
  xs.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> x(k);
    for (std::size_t i = 0; i < k; ++i) x[i] = g[j * k + i] / row_sum[j];
    xs.emplace_back(std::move(x));
  }
  std::vector<double> w(n), z(k);
  for (std::size_t j = 0; j < n; ++j) w[j] = row_sum[j] / total;
  double col_total = 0.0;
  for (double c : col_sum) col_total += c;
  for (std::size_t i = 0; i < k; ++i) z[i] = col_sum[i] / col_total;
  RwaSample out{SimplexPoint(std::move(z)), SimplexPoint(std::move(w)), std::move(xs)};
  check_conservation(out);
  return out;
}

enum class SamplingPath { direct, gamma, gamma_ratio };

inline std::string_view to_string(SamplingPath p) {
  switch (p) {
    case SamplingPath::direct: return "direct";
    case SamplingPath::gamma: return "gamma";
    case SamplingPath::gamma_ratio: return "gamma_ratio";
  }
  return "?";
}

inline SamplingPath parse_sampling_path(std::string_view s) {
  if (s == "direct") return SamplingPath::direct;
  if (s == "gamma") return SamplingPath::gamma;
  if (s == "gamma_ratio") return SamplingPath::gamma_ratio;
  throw InvalidParameter("unknown sampling path '" + std::string(s) +
                         "' (expected direct, gamma or gamma_ratio)");
}

inline RwaSample sample_rwa(const RwaSpec& spec, SamplingPath path, RngStream& rng) {
  switch (path) {
    case SamplingPath::direct: return sample_rwa_direct(spec, rng);
    case SamplingPath::gamma: return sample_rwa_gamma_path(spec, rng);
    case SamplingPath::gamma_ratio: return sample_rwa_gamma_ratio(spec, rng);
  }
  throw InvalidParameter("unknown sampling path");
}

inline constexpr std::size_t kBatchChunk = 4096;

/**
 * Fill a batch with `count` z-draws. Chunk c of kBatchChunk rows uses
 * root.child(c), so the result depends on (root, count) and never on `workers`.
 * `draw` maps an RngStream& to an RwaSample.
 */
template <class Draw>
SampleBatch sample_z_batch(std::size_t dim, std::size_t count, const RngStream& root,
                           unsigned workers, std::string label, Draw draw) {
  SampleBatch batch(dim, count, root.seed(), root.stream_id(), std::move(label));
  const std::size_t chunks = (count + kBatchChunk - 1) / kBatchChunk;
  auto run = [&](std::size_t first) {
    for (std::size_t c = first; c < chunks; c += std::max(1u, workers)) {
      RngStream rng = root.child(c);
      const std::size_t end = std::min(count, (c + 1) * kBatchChunk);
      for (std::size_t row = c * kBatchChunk; row < end; ++row) {
        const RwaSample s = draw(rng);
        batch.set_row(row, s.z.coords());
      }
    }
  };
  if (workers <= 1 || chunks <= 1) {
    run(0);
  } else {
    std::vector<std::jthread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned t = 0; t < workers; ++t)
      pool.emplace_back([&, t] {
        try {
          run(t);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    pool.clear();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  return batch;
}

inline SampleBatch sample_rwa_batch(const RwaSpec& spec, SamplingPath path, std::size_t count,
                                    const RngStream& root, unsigned workers = 1) {
  return sample_z_batch(spec.k(), count, root, workers, std::string(to_string(path)),
                        [&](RngStream& rng) { return sample_rwa(spec, path, rng); });
}

// ---------------------------------------------------------------------------
// Two-dimensional variant: X_j ~ Dirichlet(1/2 + α_j, ...), W ~ Dirichlet(α).

/// Which two-parameter law "Dirichlet(1/2 + α_j)" denotes.
enum class VariantReading {
  symmetric,   ///< Dirichlet(1/2 + α_j, 1/2 + α_j), target Dirichlet(1/2 + Σα, 1/2 + Σα)
  asymmetric,  ///< Dirichlet(1/2 + α_j, 1/2),       target Dirichlet(1/2 + Σα, 1/2)
};

inline std::string_view to_string(VariantReading r) {
  return r == VariantReading::symmetric ? "symmetric" : "asymmetric";
}

struct VariantScenario {
  VariantReading reading;
  DirichletParams weights;
  std::vector<DirichletParams> rows;
  DirichletParams target;
};

inline VariantScenario variant_spec(const std::vector<double>& alpha,
                                    VariantReading reading = VariantReading::symmetric,
                                    std::size_t k = 2) {
  detail::require(k == 2, "the variant construction is two-dimensional (k = 2)");
  detail::require(alpha.size() >= 2, "the variant construction needs n >= 2");
  std::vector<DirichletParams> rows;
  double total = 0.0;
  for (double a : alpha) {
    detail::require(a > 0.0 && std::isfinite(a), "variant alphas must be positive and finite");
    total += a;
    rows.push_back(reading == VariantReading::symmetric ? DirichletParams{0.5 + a, 0.5 + a}
                                                        : DirichletParams{0.5 + a, 0.5});
  }
  DirichletParams target = reading == VariantReading::symmetric
                               ? DirichletParams{0.5 + total, 0.5 + total}
                               : DirichletParams{0.5 + total, 0.5};
  return VariantScenario{reading, DirichletParams(alpha), std::move(rows), std::move(target)};
}

inline RwaSample sample_variant(const VariantScenario& v, RngStream& rng) {
  return sample_weighted_average(v.weights, v.rows, rng);
}

}  // namespace rwa
