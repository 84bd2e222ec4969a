#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "rwa/distributions.hpp"
#include "rwa/error.hpp"
#include "rwa/moment_index.hpp"
#include "rwa/numeric.hpp"
#include "rwa/weighted_average.hpp"

namespace rwa {

using Composition = std::vector<unsigned>;

/// All compositions of `total` into `parts` non-negative parts, in lexicographic order.
inline std::vector<Composition> compositions(unsigned total, std::size_t parts) {
  detail::require(parts >= 1, "a composition needs at least one part");
  std::vector<Composition> out;
  Composition cur(parts, 0);
  auto fill = [&](auto&& self, std::size_t pos, unsigned remaining) -> void {
    if (pos + 1 == parts) {
      cur[pos] = remaining;
      out.push_back(cur);
      return;
    }
    for (unsigned v = 0; v <= remaining; ++v) {
      cur[pos] = v;
      self(self, pos + 1, remaining - v);
    }
  };
  fill(fill, 0, total);
  return out;
}

/// C(a, b) as a double (exact for the small arguments used here).
inline double binomial(unsigned a, unsigned b) {
  if (b > a) return 0.0;
  double r = 1.0;
  for (unsigned i = 1; i <= b; ++i) r = r * (a - b + i) / i;
  return r;
}

/**
 * Index set of the multinomial expansion of E[prod_j Z_j^{s_j}]: for each
 * column j, every composition h_j = (h_1j, ..., h_nj) of s_j into n parts.
 * The expansion runs over the Cartesian product of the columns.
 */
class CompositionTable {
 public:
  CompositionTable(const MomentIndex& s, std::size_t n) : n_(n) {
    columns_.reserve(s.size());
    for (std::size_t j = 0; j < s.size(); ++j) columns_.push_back(compositions(s[j], n));
    for (std::size_t j = 0; j < s.size(); ++j) expected_ *= binomial(s[j] + n - 1, n - 1);
  }

  std::size_t n() const noexcept { return n_; }
  std::size_t k() const noexcept { return columns_.size(); }
  const std::vector<Composition>& column(std::size_t j) const { return columns_.at(j); }

  /// Number of composition tuples, i.e. terms of the expansion.
  double size() const noexcept {
    double total = 1.0;
    for (const auto& c : columns_) total *= static_cast<double>(c.size());
    return total;
  }
  /// prod_j C(s_j + n - 1, n - 1).
  double expected_size() const noexcept { return expected_; }

 private:
  std::size_t n_;
  std::vector<std::vector<Composition>> columns_;
  double expected_ = 1.0;
};

/**
 * Exact mixed moments of Z = Σ_i W_i X_i by enumerating the multinomial
 * expansion
 *
 *   E[prod_j Z_j^{s_j}] = Σ_{h_1} ... Σ_{h_k} prod_j (s_j; h_1j, ..., h_nj)
 *                         · E[prod_i W_i^{h_i*}] · prod_i E[prod_j X_ij^{h_ij}],
 *
 * with h_i* = Σ_j h_ij, W ~ Dirichlet(weights) and X_i ~ Dirichlet(rows[i]).
 * The weights are free here; the RWA instance couples them to the row sums.
 *
 * Gamma ratios are tabulated once per instance up to `max_order` (as
 * exp of log-gamma differences) so that repeated calls are cheap. Terms are
 * accumulated in enumeration order (columns nested outer to inner, each
 * lexicographic) with compensated summation.
 */
class MomentExpander {
 public:
  MomentExpander(const DirichletParams& weights, const std::vector<DirichletParams>& rows,
                 unsigned max_order = kDefaultOrderCap)
      : n_(rows.size()), k_(rows.empty() ? 0 : rows.front().size()), max_order_(max_order) {
    detail::require(weights.size() == n_, "one weight parameter per component vector");
    detail::require(n_ >= 1 && k_ >= 2, "expansion needs at least one component of dimension >= 2");
    const std::size_t width = max_order + 1;
    log_fact_.resize(width);
    for (unsigned h = 0; h <= max_order; ++h) log_fact_[h] = log_factorial(h);

    log_w_total_.resize(width);
    for (unsigned h = 0; h <= max_order; ++h) log_w_total_[h] = log_rising(weights.sum(), h);

    // ratio_[i][h] = E-numerator of W_i^h over the X_i denominator Γ(r_i + h)/Γ(r_i).
    ratio_.assign(n_ * width, 0.0);
    log_x_.assign(n_ * k_ * width, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      detail::require(rows[i].size() == k_, "component vectors must share the dimension k");
      for (unsigned h = 0; h <= max_order; ++h) {
        ratio_[i * width + h] =
            std::exp(log_rising(weights[i], h) - log_rising(rows[i].sum(), h));
        for (std::size_t j = 0; j < k_; ++j)
          log_x_[(i * k_ + j) * width + h] = log_rising(rows[i][j], h);
      }
    }
    comps_.reserve(width);
    for (unsigned t = 0; t <= max_order; ++t) {
      std::vector<unsigned> flat;
      for (const auto& c : compositions(t, n_)) flat.insert(flat.end(), c.begin(), c.end());
      comps_.push_back(std::move(flat));
    }

    // coef_[j * width + t][c]: multinomial(t; h) times the numerators
    // Γ(α_ij + h_i)/Γ(α_ij) of each X_i moment, for composition c = h of t.
    coef_.resize(k_ * width);
    for (std::size_t j = 0; j < k_; ++j)
      for (unsigned t = 0; t <= max_order; ++t) {
        const auto& flat = comps_[t];
        auto& out = coef_[j * width + t];
        out.reserve(flat.size() / n_);
        for (std::size_t c = 0; c < flat.size(); c += n_) {
          double v = log_fact_[t];
          for (std::size_t i = 0; i < n_; ++i)
            v += log_x_[(i * k_ + j) * width + flat[c + i]] - log_fact_[flat[c + i]];
          out.push_back(std::exp(v));
        }
      }
  }

  unsigned max_order() const noexcept { return max_order_; }

  double moment(const MomentIndex& s) const {
    detail::require(s.size() == k_, "moment index length must equal k");
    if (s.total_order() > max_order_)
      throw CapExceeded("moment total order " + std::to_string(s.total_order()) +
                        " exceeds the expansion order cap " + std::to_string(max_order_));
    const std::size_t width = max_order_ + 1;

    // h_star[j * n + i]: partial h*_i over the columns before j.
    std::vector<unsigned> h_star(n_ * k_, 0);
    CompensatedSum acc;
    auto walk = [&](auto&& self, std::size_t j, double partial) -> void {
      const auto& flat = comps_[s[j]];
      const double* coef = coef_[j * width + s[j]].data();
      const unsigned* before = &h_star[j * n_];
      if (j + 1 == k_) {
        for (std::size_t c = 0; c < flat.size(); c += n_) {
          double term = partial * *coef++;
          for (std::size_t i = 0; i < n_; ++i) term *= ratio_[i * width + before[i] + flat[c + i]];
          acc += term;
        }
        return;
      }
      unsigned* next = &h_star[(j + 1) * n_];
      for (std::size_t c = 0; c < flat.size(); c += n_) {
        for (std::size_t i = 0; i < n_; ++i) next[i] = before[i] + flat[c + i];
        self(self, j + 1, partial * *coef++);
      }
    };
    walk(walk, 0, std::exp(-log_w_total_[s.total_order()]));
    return acc.value();
  }

 private:
  std::size_t n_, k_;
  unsigned max_order_;
  std::vector<double> log_fact_, log_w_total_, ratio_, log_x_;
  std::vector<std::vector<unsigned>> comps_;  ///< comps_[t]: compositions of t into n parts, flattened
  std::vector<std::vector<double>> coef_;
};

inline MomentExpander make_expander(const RwaSpec& spec, unsigned max_order = kDefaultOrderCap) {
  std::vector<DirichletParams> rows;
  for (std::size_t j = 0; j < spec.n(); ++j) rows.push_back(spec.row_params(j));
  return MomentExpander(weight_params(spec), rows, max_order);
}

/// E[prod_j Z_j^{s_j}] of an RWA instance through the multinomial expansion.
inline double rwa_moment_expansion(const RwaSpec& spec, const MomentIndex& s,
                                   unsigned order_cap = kDefaultOrderCap) {
  if (s.total_order() > order_cap)
    throw CapExceeded("moment total order " + std::to_string(s.total_order()) +
                      " exceeds the expansion order cap " + std::to_string(order_cap));
  return make_expander(spec, s.total_order()).moment(s);
}

/// Γ(ΣΣα)/Γ(ΣΣα+Σs) · prod_j Γ(Σ_i α_j^(i) + s_j)/Γ(Σ_i α_j^(i)), straight from the α-matrix.
inline double rwa_moment_closed_form(const RwaSpec& spec, const MomentIndex& s) {
  detail::require(s.size() == spec.k(), "moment index length must equal k");
  double grand = 0.0;
  double log_m = 0.0;
  for (std::size_t j = 0; j < spec.k(); ++j) {
    double column = 0.0;
    for (std::size_t i = 0; i < spec.n(); ++i) column += spec.alpha(i, j);
    grand += column;
    log_m += std::lgamma(column + s[j]) - std::lgamma(column);
  }
  log_m += std::lgamma(grand) - std::lgamma(grand + s.total_order());
  return std::exp(log_m);
}

/// E[prod_i W_i^{h*_i}] for the weight law of an RWA instance.
inline double weight_moment(const RwaSpec& spec, std::span<const unsigned> h_star) {
  detail::require(h_star.size() == spec.n(), "h_star must have one entry per row");
  double total = 0.0, order = 0.0, log_m = 0.0;
  for (std::size_t i = 0; i < spec.n(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < spec.k(); ++j) row += spec.alpha(i, j);
    total += row;
    order += h_star[i];
    log_m += std::lgamma(row + h_star[i]) - std::lgamma(row);
  }
  log_m += std::lgamma(total) - std::lgamma(total + order);
  return std::exp(log_m);
}

// ---------------------------------------------------------------------------
// Dirichlet-multinomial

inline constexpr unsigned kDirMultTrialCap = 64;

struct DirMultParams {
  DirichletParams alpha;
  unsigned trials;
};

inline double dirmult_pmf(const DirMultParams& p, std::span<const unsigned> counts) {
  detail::require(counts.size() == p.alpha.size(), "count vector length must equal k");
  unsigned total = 0;
  for (unsigned c : counts) total += c;
  if (total != p.trials)
    throw InvalidParameter("counts sum to " + std::to_string(total) + " but trials = " +
                           std::to_string(p.trials));
  double log_p = log_factorial(p.trials) - log_rising(p.alpha.sum(), p.trials);
  for (std::size_t i = 0; i < counts.size(); ++i)
    log_p += log_rising(p.alpha[i], counts[i]) - log_factorial(counts[i]);
  return std::exp(log_p);
}

/// Σ of dirmult_pmf over every count vector; equals 1 up to rounding.
inline double dirmult_normalization_check(const DirMultParams& p,
                                          unsigned trial_cap = kDirMultTrialCap) {
  if (p.trials > trial_cap)
    throw CapExceeded("Dirichlet-multinomial trials " + std::to_string(p.trials) +
                      " exceed the enumeration cap " + std::to_string(trial_cap));
  CompensatedSum acc;
  for (const auto& counts : compositions(p.trials, p.alpha.size())) acc += dirmult_pmf(p, counts);
  return acc.value();
}

// ---------------------------------------------------------------------------
// Product identity E[(1 - t'X)^{-Σα}] = prod_i (1 - t_i)^{-α_i}, X ~ Dirichlet(α).

struct ProductIdentityResult {
  double series;      ///< truncated moment series for the left side
  double product;     ///< prod_i (1 - t_i)^{-α_i}
  double tail_bound;  ///< bound on the neglected series terms
  unsigned order;     ///< highest power of t'X kept
  double abs_error() const { return std::abs(series - product); }
};

/**
 * Left side via (1 - u)^{-c} = Σ_m (c)_m / m! · u^m with u = t'X, where each
 * E[u^m] expands into Dirichlet mixed moments. On the simplex |u| <= q = max|t_i|,
 * so the neglected tail is dominated by a geometric series; the order grows
 * from `min_order` until that bound drops below `tail_tolerance`.
 */
inline ProductIdentityResult product_identity_check(const DirichletParams& alpha,
                                                    std::span<const double> t,
                                                    double tail_tolerance = 1e-8,
                                                    unsigned min_order = 12,
                                                    unsigned max_order = 400) {
  detail::require(t.size() == alpha.size(), "t must have one entry per Dirichlet coordinate");
  double q = 0.0;
  for (double ti : t) q = std::max(q, std::abs(ti));
  detail::require(q < 1.0, "the series needs max|t_i| < 1");

  const double c = alpha.sum();
  ProductIdentityResult r{};
  r.product = 1.0;
  for (std::size_t i = 0; i < t.size(); ++i) r.product *= std::pow(1.0 - t[i], -alpha[i]);

  CompensatedSum series;
  for (unsigned m = 0; m <= max_order; ++m) {
    // Σ_{|h| = m} prod_i t_i^{h_i} / h_i! · E[X^h], times (c)_m.
    CompensatedSum inner;
    for (const auto& h : compositions(m, t.size())) {
      double coef = 1.0;
      for (std::size_t i = 0; i < h.size(); ++i)
        coef *= std::pow(t[i], h[i]) / std::exp(log_factorial(h[i]));
      inner += coef * dirichlet_mixed_moment(alpha, h);
    }
    series += std::exp(log_rising(c, m)) * inner.value();

    if (m < min_order) continue;
    // Σ_{m' > m} (c)_{m'}/m'! q^{m'} <= b_{m+1} / (1 - ρ).
    const double next = std::exp(log_rising(c, m + 1) - log_factorial(m + 1)) * std::pow(q, m + 1);
    const double rho = q * std::max(1.0, (c + m + 1) / (m + 2.0));
    if (rho < 1.0) {
      const double bound = next / (1.0 - rho);
      if (bound <= tail_tolerance || m == max_order) {
        r.series = series.value();
        r.tail_bound = bound;
        r.order = m;
        return r;
      }
    }
  }
  throw NumericalError("product identity series did not reach tail bound " +
                       std::to_string(tail_tolerance) + " by order " + std::to_string(max_order));
}

// ---------------------------------------------------------------------------
// Variant reading resolution

struct VariantReadingCheck {
  VariantReading reading;
  double max_rel_error;  ///< over all moment indices of order <= max_order
  bool verified;
};

/// Exact expansion of the variant's Z moments against its claimed target, for one reading.
inline VariantReadingCheck check_variant_reading(const std::vector<double>& alpha,
                                                 VariantReading reading, unsigned max_order = 5,
                                                 double rel_tol = 1e-9) {
  const VariantScenario v = variant_spec(alpha, reading);
  const MomentExpander ex(v.weights, v.rows, max_order);
  double worst = 0.0;
  for (const auto& s : moment_indices_up_to(2, max_order)) {
    const double exact = dirichlet_mixed_moment(v.target, s);
    worst = std::max(worst, std::abs(ex.moment(s) - exact) / exact);
  }
  return {reading, worst, worst < rel_tol};
}

}  // namespace rwa
