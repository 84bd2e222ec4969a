// Acceptance criteria at pinned tolerances; one PASS/FAIL line per criterion.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "rwa/experiment.hpp"

namespace fs = std::filesystem;
using namespace rwa;
using namespace rwa::experiment;

namespace {

struct Verdict {
  bool ok;
  std::string detail;
};

// Same seeds as configs/acceptance.json.
constexpr std::uint64_t kTheoremSeed = 20240611;
constexpr std::uint64_t kPlantedSeed = 20240612;

Verdict theorem_suite() {
  TheoremSettings cfg;
  cfg.samples = 200'000;
  cfg.moment_order = 3;
  cfg.z_threshold = 5.0;
  cfg.ks_level = 1e-3;
  cfg.energy.level = 1e-3;
  const auto fixtures = standard_theorem_fixtures();
  const RngStream root(kTheoremSeed);
  std::size_t failures = 0, tests = 0;
  double min_p = 1.0;
  for (std::size_t i = 0; i < fixtures.size(); ++i) {
    const auto o = verify_theorem_fixture(fixtures[i], cfg, root.child(i));
    failures += o.failures();
    tests += o.moments.size() + o.ks.size() + 1;
    min_p = std::min(min_p, o.energy.permutation_p);
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu fixtures, %zu tests, %zu failures, min energy p %.3f",
                fixtures.size(), tests, failures, min_p);
  return {failures == 0, buf};
}

Verdict planted_power() {
  TheoremSettings cfg;
  cfg.samples = 100'000;
  TheoremFixture fx = standard_theorem_fixtures()[3];
  fx.target_override = DirichletParams{6, 7, 9};
  const auto o = verify_theorem_fixture(fx, cfg, RngStream(kPlantedSeed));
  std::size_t m = 0, k = 0;
  for (const auto& t : o.moments) m += !t.result.pass;
  for (const auto& t : o.ks) k += !t.result.pass;
  char buf[160];
  std::snprintf(buf, sizeof buf, "target (6,7,9) vs (5,7,9): %zu moment and %zu KS failures", m, k);
  return {m + k > 0, buf};
}

Verdict moment_oracle() {
  MomentSweepSettings cfg;  // n, k <= 3, entries {1/2, 1, 2, 7/2}, Σs <= 5
  cfg.values = {0.5, 1.0, 2.0, 3.5};
  cfg.max_n = cfg.max_k = 3;
  cfg.max_order = 5;
  cfg.rel_tol = 1e-9;
  const auto o = sweep_moment_oracle(cfg);
  std::size_t specs = 0, evals = 0;
  for (const auto& s : o.shapes) specs += s.specs, evals += s.evaluations;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu specs, %zu moments, max rel error %.2e (< 1e-9)", specs, evals,
                o.max_rel_error());
  return {o.pass(), buf};
}

Verdict dirmult() {
  DirMultSweepSettings cfg;
  cfg.values = {0.5, 1.0, 2.0, 5.0};
  cfg.max_k = 4;
  cfg.max_trials = 10;
  cfg.tol = 1e-10;
  const auto o = sweep_dirmult(cfg);
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu cases, max |sum - 1| %.2e (<= 1e-10)", o.cases, o.max_abs_error);
  return {o.pass(), buf};
}

Verdict stieltjes() {
  StieltjesSettings cfg;
  cfg.cases = {{2, {1.5, 2, 3, 5}, 1e-8}, {3, {1.5, 2, 3, 5}, 1e-8}, {4, {1.5, 2, 3, 5}, 1e-6}};
  cfg.normalization_moduli = {10.0, 1e3, 1e6};
  const auto o = verify_stieltjes(cfg);
  double worst23 = 0.0, worst4 = 0.0;
  for (const auto& r : o.residuals) {
    double& w = r.row.n == 4 ? worst4 : worst23;
    w = std::max(w, r.row.residual);
  }
  char buf[200];
  std::snprintf(buf, sizeof buf, "%zu residuals (n<=3 max %.1e, n=4 max %.1e), %zu normalization checks",
                o.residuals.size(), worst23, worst4, o.normalization.size());
  return {o.pass(), buf};
}

Verdict product_identity() {
  ProductIdentitySettings cfg;
  cfg.alphas = {{0.5, 0.5}, {1.0, 2.0}};
  cfg.t_values = {-0.5, -0.25, 0.0, 0.25, 0.5};
  cfg.tol = 1e-6;
  const auto checks = verify_product_identity(cfg);
  double worst = 0.0;
  bool ok = true;
  for (const auto& c : checks) {
    worst = std::max(worst, c.result.abs_error());
    ok = ok && c.pass();
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu points, max abs error %.2e (<= 1e-6)", checks.size(), worst);
  return {ok, buf};
}

std::string strip_timing(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  if (p.extension() != ".json") return s.str();
  auto doc = ordered_json::parse(s.str());
  doc.erase("wall_seconds");
  return doc.dump();
}

Verdict determinism() {
  const auto cfg = load_config(std::string(RWA_CONFIG_DIR) + "/acceptance.json");
  const fs::path base = fs::temp_directory_path() / "rwa_acceptance";
  fs::remove_all(base);
  const auto a = run_experiment(cfg, base / "a", 1);
  const auto b = run_experiment(cfg, base / "b", 1);
  std::size_t json_reports = 0, identical = 0;
  for (const auto& p : a.written) {
    json_reports += p.extension() == ".json";
    identical += strip_timing(p) == strip_timing(base / "b" / p.filename());
  }
  const bool ok = a.exit_code == kExitPass && b.exit_code == kExitPass && json_reports == 5 &&
                  identical == a.written.size() && a.written.size() == b.written.size();
  char buf[160];
  std::snprintf(buf, sizeof buf, "exit %d/%d, %zu reports, %zu of %zu files identical modulo timing",
                a.exit_code, b.exit_code, json_reports, identical, a.written.size());
  return {ok, buf};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_seconds;  ///< 0: no runtime bound
    std::function<Verdict()> run;
  };
  const Criterion criteria[] = {
      {1, "theorem statistical suite", 60.0, theorem_suite},
      {2, "planted-alternative power", 15.0, planted_power},
      {3, "moment-oracle equality", 30.0, moment_oracle},
      {4, "dirichlet-multinomial normalization", 5.0, dirmult},
      {5, "stieltjes residuals", 10.0, stieltjes},
      {6, "product identity", 5.0, product_identity},
      {7, "determinism", 0.0, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v{false, ""};
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.budget_seconds == 0.0 || secs < c.budget_seconds;
    const bool ok = v.ok && in_time;
    failed += !ok;
    std::printf("%s  criterion %d  %-36s %7.2f s%s  %s\n", ok ? "PASS" : "FAIL", c.id, c.name, secs,
                in_time ? "" : " (over budget)", v.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
