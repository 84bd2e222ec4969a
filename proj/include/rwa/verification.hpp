#pragma once

// Verification suites that combine the sampling, moment, statistical and
// Stieltjes modules. Each suite returns typed outcomes; the experiment runner
// serializes them and the acceptance tests inspect them directly.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "rwa/distributions.hpp"
#include "rwa/moment_index.hpp"
#include "rwa/moments.hpp"
#include "rwa/stattest.hpp"
#include "rwa/stieltjes.hpp"
#include "rwa/weighted_average.hpp"

namespace rwa {

// ---------------------------------------------------------------------------
// Theorem suite: sample Z along two paths and test it against the target law.

struct TheoremFixture {
  std::string name;
  RwaSpec spec;
  /// Law to test against; defaults to target_params(spec). Set to plant an alternative.
  std::optional<DirichletParams> target_override;

  DirichletParams target() const { return target_override.value_or(target_params(spec)); }
};

struct TheoremSettings {
  std::size_t samples = 200'000;
  unsigned moment_order = 3;
  double z_threshold = kDefaultZThreshold;
  double ks_level = kDefaultKsLevel;
  EnergyOptions energy{};
};

struct PathMomentTest {
  SamplingPath path;
  MomentTestResult result;
};

struct PathKsTest {
  SamplingPath path;
  KsResult result;
};

struct TheoremOutcome {
  std::string name;
  RwaSpec spec;
  DirichletParams target;
  bool planted;
  std::vector<PathMomentTest> moments;
  std::vector<PathKsTest> ks;
  EnergyResult energy;

  bool moments_pass() const {
    return std::all_of(moments.begin(), moments.end(), [](auto& m) { return m.result.pass; });
  }
  bool ks_pass() const {
    return std::all_of(ks.begin(), ks.end(), [](auto& t) { return t.result.pass; });
  }
  bool pass() const { return moments_pass() && ks_pass() && energy.pass; }
  std::size_t failures() const {
    std::size_t f = energy.pass ? 0 : 1;
    for (const auto& m : moments) f += !m.result.pass;
    for (const auto& t : ks) f += !t.result.pass;
    return f;
  }
};

/// Stream layout: root.child(0) direct path, child(1) gamma path, child(2) energy permutations.
inline TheoremOutcome verify_theorem_fixture(const TheoremFixture& fx, const TheoremSettings& cfg,
                                             const RngStream& root, unsigned workers = 1) {
  const DirichletParams target = fx.target();
  detail::require(target.size() == fx.spec.k(), "target dimension must equal k");
  const SamplingPath paths[] = {SamplingPath::direct, SamplingPath::gamma};
  std::vector<SampleBatch> batches;
  for (std::uint64_t p = 0; p < 2; ++p)
    batches.push_back(sample_rwa_batch(fx.spec, paths[p], cfg.samples, root.child(p), workers));

  TheoremOutcome out{fx.name, fx.spec, target, fx.target_override.has_value(), {}, {}, {}};
  const auto indices = moment_indices_up_to(fx.spec.k(), cfg.moment_order);
  for (std::size_t p = 0; p < 2; ++p) {
    for (const auto& s : indices)
      out.moments.push_back({paths[p], moment_ztest(batches[p], target, s, cfg.z_threshold)});
    for (std::size_t c = 0; c < fx.spec.k(); ++c)
      out.ks.push_back({paths[p], ks_marginal(batches[p], target, c, cfg.ks_level)});
  }
  out.energy = energy_two_sample(batches[0], batches[1], root.child(2), cfg.energy);
  return out;
}

/// The five reference instances of the theorem suite.
inline std::vector<TheoremFixture> standard_theorem_fixtures() {
  return {
      {"van_assche", RwaSpec({{0.5, 0.5}, {0.5, 0.5}}), std::nullopt},
      {"johnson_kotz", RwaSpec({{2, 2}, {2, 2}}), std::nullopt},
      {"symmetric_n3_k3", RwaSpec({{1, 1, 1}, {1, 1, 1}, {1, 1, 1}}), std::nullopt},
      {"asymmetric", RwaSpec({{1, 2, 3}, {4, 5, 6}}), std::nullopt},
      {"half_integer", RwaSpec({{0.5, 1}, {2, 0.5}, {1, 3}}), std::nullopt},
  };
}

// ---------------------------------------------------------------------------
// Moment oracle sweep: expansion versus closed form over a parameter grid.

struct MomentSweepSettings {
  std::vector<double> values{0.5, 1.0, 2.0, 3.5};
  std::size_t max_n = 3;
  std::size_t max_k = 3;
  unsigned max_order = 5;
  double rel_tol = 1e-9;
};

struct MomentSweepShape {
  std::size_t n, k;
  std::size_t specs = 0;
  std::size_t evaluations = 0;
  double max_rel_error = 0.0;
  std::vector<std::vector<double>> worst_alphas;
  std::string worst_index;
};

struct MomentSweepOutcome {
  std::vector<MomentSweepShape> shapes;
  double rel_tol;
  double max_rel_error() const {
    double m = 0.0;
    for (const auto& s : shapes) m = std::max(m, s.max_rel_error);
    return m;
  }
  bool pass() const { return max_rel_error() < rel_tol; }
};

/// Every n × k matrix with n, k in [2, max] and entries from `values`, every s with Σs <= max_order.
inline MomentSweepOutcome sweep_moment_oracle(const MomentSweepSettings& cfg) {
  MomentSweepOutcome out{{}, cfg.rel_tol};
  const std::size_t v = cfg.values.size();
  detail::require(v > 0, "moment sweep needs at least one alpha value");
  for (std::size_t n = 2; n <= cfg.max_n; ++n)
    for (std::size_t k = 2; k <= cfg.max_k; ++k) {
      MomentSweepShape shape;
      shape.n = n;
      shape.k = k;
      const auto indices = moment_indices_up_to(k, cfg.max_order, true);
      std::vector<std::size_t> digits(n * k, 0);
      for (;;) {
        std::vector<std::vector<double>> a(n, std::vector<double>(k));
        for (std::size_t e = 0; e < n * k; ++e) a[e / k][e % k] = cfg.values[digits[e]];
        const RwaSpec spec(a);
        const MomentExpander ex = make_expander(spec, cfg.max_order);
        for (const auto& s : indices) {
          const double closed = rwa_moment_closed_form(spec, s);
          const double err = std::abs(ex.moment(s) - closed) / closed;
          ++shape.evaluations;
          if (err > shape.max_rel_error || shape.worst_alphas.empty()) {
            shape.max_rel_error = std::max(err, shape.max_rel_error);
            shape.worst_alphas = a;
            shape.worst_index = s.to_string();
          }
        }
        ++shape.specs;
        std::size_t e = 0;
        while (e < digits.size() && ++digits[e] == v) digits[e++] = 0;
        if (e == digits.size()) break;
      }
      out.shapes.push_back(std::move(shape));
    }
  return out;
}

struct MomentComparison {
  MomentIndex index;
  double expansion;
  double closed_form;
  double rel_error;
};

/// Expansion against closed form for one spec, every s with Σs <= max_order.
inline std::vector<MomentComparison> compare_moments(const RwaSpec& spec, unsigned max_order) {
  const MomentExpander ex = make_expander(spec, max_order);
  std::vector<MomentComparison> out;
  for (const auto& s : moment_indices_up_to(spec.k(), max_order, true)) {
    const double e = ex.moment(s), c = rwa_moment_closed_form(spec, s);
    out.push_back({s, e, c, std::abs(e - c) / c});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dirichlet-multinomial normalization sweep.

struct DirMultSweepSettings {
  std::vector<double> values{0.5, 1.0, 2.0, 5.0};
  std::size_t max_k = 4;
  unsigned max_trials = 10;
  double tol = 1e-10;
};

struct DirMultSweepOutcome {
  std::size_t cases = 0;
  double max_abs_error = 0.0;
  std::vector<double> worst_alpha;
  unsigned worst_trials = 0;
  double tol;
  bool pass() const { return max_abs_error <= tol; }
};

inline DirMultSweepOutcome sweep_dirmult(const DirMultSweepSettings& cfg) {
  DirMultSweepOutcome out;
  out.tol = cfg.tol;
  const std::size_t v = cfg.values.size();
  for (std::size_t k = 2; k <= cfg.max_k; ++k) {
    std::vector<std::size_t> digits(k, 0);
    for (;;) {
      std::vector<double> alpha(k);
      for (std::size_t i = 0; i < k; ++i) alpha[i] = cfg.values[digits[i]];
      for (unsigned trials = 0; trials <= cfg.max_trials; ++trials) {
        const double err =
            std::abs(dirmult_normalization_check({DirichletParams(alpha), trials}) - 1.0);
        ++out.cases;
        if (err >= out.max_abs_error) {
          out.max_abs_error = err;
          out.worst_alpha = alpha;
          out.worst_trials = trials;
        }
      }
      std::size_t i = 0;
      while (i < k && ++digits[i] == v) digits[i++] = 0;
      if (i == k) break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stieltjes residual suite.

struct StieltjesCase {
  unsigned n;
  std::vector<double> grid;
  double tol;
};

struct StieltjesSettings {
  std::vector<StieltjesCase> cases{{2, {1.5, 2, 3, 5}, 1e-8},
                                   {3, {1.5, 2, 3, 5}, 1e-8},
                                   {4, {1.5, 2, 3, 5}, 1e-6}};
  std::vector<double> normalization_moduli{10.0, 1e3, 1e6};
};

struct ResidualCheck {
  std::string form;  ///< "transform" or "integral"
  ResidualRow row;
  double tol;
  bool pass() const { return row.residual < tol; }
};

struct NormalizationCheck {
  std::string transform;
  cplx z;
  double error;
  double bound;
  bool pass() const { return error <= bound; }
};

struct StieltjesOutcome {
  std::vector<ResidualCheck> residuals;
  std::vector<NormalizationCheck> normalization;
  bool pass() const {
    return std::all_of(residuals.begin(), residuals.end(), [](auto& r) { return r.pass(); }) &&
           std::all_of(normalization.begin(), normalization.end(),
                       [](auto& c) { return c.pass(); });
  }
};

inline StieltjesOutcome verify_stieltjes(const StieltjesSettings& cfg) {
  StieltjesOutcome out;
  for (const auto& c : cfg.cases) {
    for (const auto& row : transform_derivative_residual(c.n, c.grid)) out.residuals.push_back({"transform", row, c.tol});
    for (const auto& row : integral_derivative_residual(c.n, c.grid)) out.residuals.push_back({"integral", row, c.tol});
  }
  std::vector<StieltjesFn> transforms{arcsine_fn()};
  for (const auto& c : cfg.cases) transforms.push_back(power_semicircle_fn(c.n));
  for (const auto& f : transforms)
    for (double r : cfg.normalization_moduli)
      for (cplx z : {cplx(r, 0.0), cplx(0.0, r), cplx(-r, 0.0)})
        out.normalization.push_back({f.name, z, normalization_error(f, z), 2.0 / r});
  return out;
}

// ---------------------------------------------------------------------------
// Product identity E[(1 - t'X)^{-Σα}] = prod (1 - t_i)^{-α_i}.

struct ProductIdentitySettings {
  std::vector<std::vector<double>> alphas{{0.5, 0.5}, {1.0, 2.0}};
  std::vector<double> t_values{-0.5, -0.25, 0.0, 0.25, 0.5};
  double tol = 1e-6;
};

struct ProductIdentityCheck {
  std::vector<double> alpha;
  std::vector<double> t;
  ProductIdentityResult result;
  double tol;
  bool pass() const { return result.abs_error() <= tol; }
};

inline std::vector<ProductIdentityCheck> verify_product_identity(const ProductIdentitySettings& cfg) {
  std::vector<ProductIdentityCheck> out;
  for (const auto& a : cfg.alphas) {
    const DirichletParams alpha(a);
    std::vector<std::size_t> digits(a.size(), 0);
    for (;;) {
      std::vector<double> t(a.size());
      for (std::size_t i = 0; i < t.size(); ++i) t[i] = cfg.t_values[digits[i]];
      // Keep the tail bound two orders below the tolerance.
      out.push_back({a, t, product_identity_check(alpha, t, cfg.tol * 1e-2), cfg.tol});
      std::size_t i = 0;
      while (i < digits.size() && ++digits[i] == cfg.t_values.size()) digits[i++] = 0;
      if (i == digits.size()) break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Two-dimensional variant: decide the reading exactly, then confirm by sampling.

struct VariantSettings {
  std::vector<double> alpha{1.0, 2.0, 3.0};
  std::size_t samples = 200'000;
  unsigned exact_order = 5;
  unsigned moment_order = 3;
  double z_threshold = kDefaultZThreshold;
  double ks_level = kDefaultKsLevel;
};

struct VariantOutcome {
  std::vector<VariantReadingCheck> readings;
  std::optional<VariantReading> enabled;  ///< the unique verified reading, if any
  std::vector<MomentTestResult> moments;  ///< Monte Carlo checks of the enabled reading
  std::vector<KsResult> ks;
  bool quarantined() const { return !enabled.has_value(); }
  bool pass() const {
    if (quarantined()) return false;
    return std::all_of(moments.begin(), moments.end(), [](auto& m) { return m.pass; }) &&
           std::all_of(ks.begin(), ks.end(), [](auto& k) { return k.pass; });
  }
};

inline VariantOutcome verify_variant(const VariantSettings& cfg, const RngStream& root,
                                     unsigned workers = 1) {
  VariantOutcome out;
  for (auto r : {VariantReading::symmetric, VariantReading::asymmetric})
    out.readings.push_back(check_variant_reading(cfg.alpha, r, cfg.exact_order));
  const auto verified = std::count_if(out.readings.begin(), out.readings.end(),
                                      [](auto& r) { return r.verified; });
  if (verified != 1) return out;
  for (const auto& r : out.readings)
    if (r.verified) out.enabled = r.reading;

  const VariantScenario v = variant_spec(cfg.alpha, *out.enabled);
  const SampleBatch batch = sample_z_batch(2, cfg.samples, root, workers, "variant",
                                           [&](RngStream& rng) { return sample_variant(v, rng); });
  for (const auto& s : moment_indices_up_to(2, cfg.moment_order))
    out.moments.push_back(moment_ztest(batch, v.target, s, cfg.z_threshold));
  out.ks.push_back(ks_marginal(batch, v.target, 0, cfg.ks_level));
  return out;
}

}  // namespace rwa
