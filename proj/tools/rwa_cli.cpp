// rwa_cli: experiment runner and single-purpose checks for random weighted averages.
//
// Exit codes: 0 pass, 1 test failure, 2 config/IO error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "rwa/experiment.hpp"

namespace fs = std::filesystem;
using namespace rwa;
using namespace rwa::experiment;

namespace {

struct SpecFlags {
  std::string alphas;
  std::string fixture;

  void attach(CLI::App* cmd) {
    auto* a = cmd->add_option("--alphas", alphas, "alpha matrix, rows separated by ';', e.g. \"2,2;2,2\"");
    auto* f = cmd->add_option("--fixture", fixture, "named fixture: van_assche, johnson_kotz, "
                                                    "symmetric_n3_k3, asymmetric, half_integer");
    a->excludes(f);
  }

  bool given() const { return !alphas.empty() || !fixture.empty(); }

  TheoremFixture resolve() const {
    if (!given()) throw ConfigError("one of --alphas or --fixture is required");
    if (!fixture.empty()) {
      auto fx = find_fixture(fixture);
      if (!fx) throw ConfigError("--fixture: unknown fixture \"" + fixture + "\"");
      return *fx;
    }
    return {"custom", RwaSpec(parse_alpha_matrix(alphas)), std::nullopt};
  }
};

std::vector<double> parse_list(const std::string& flag, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
      if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw ConfigError(flag + ": cannot parse \"" + cell + "\" as a number");
    }
  }
  if (out.empty()) throw ConfigError(flag + ": empty list");
  return out;
}

void write_report(const std::string& dir, const std::string& name, const ordered_json& doc) {
  if (dir.empty()) return;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError(dir + ": cannot create output directory: " + ec.message());
  write_text(fs::path(dir) / name, doc.dump(2) + "\n");
}

ordered_json header(const std::string& kind) {
  return {{"format_version", kFormatVersion}, {"tool_version", kToolVersion}, {"kind", kind}};
}

int cmd_run(const std::string& config, const std::string& out, unsigned workers,
            std::optional<std::uint64_t> seed) {
  ExperimentConfig cfg = load_config(config);
  if (seed) override_seeds(cfg, *seed);
  const fs::path dir = out.empty() ? fs::path(cfg.output_dir) : fs::path(out);
  const RunResult r = run_experiment(cfg, dir, workers);
  for (const auto& rep : r.reports) {
    std::printf("%-28s %s  (%.2f s)\n", rep.id.c_str(),
                rep.config_error ? "ERROR" : rep.pass ? "PASS" : "FAIL", rep.wall_seconds);
    if (rep.body["results"].contains("error"))
      std::printf("  %s\n", rep.body["results"]["error"].get<std::string>().c_str());
  }
  std::printf("%zu reports written to %s\n", r.reports.size(), dir.string().c_str());
  return r.exit_code;
}

int cmd_sample(const SpecFlags& spec, std::size_t count, std::uint64_t seed, const std::string& out,
               const std::string& path, unsigned workers) {
  const TheoremFixture fx = spec.resolve();
  SamplingPath p;
  try {
    p = parse_sampling_path(path);
  } catch (const InvalidParameter& e) {
    throw ConfigError(std::string("--path: ") + e.what());
  }
  const SampleBatch b = sample_rwa_batch(fx.spec, p, count, RngStream(seed), workers);
  std::string csv;
  for (std::size_t j = 0; j < b.dim(); ++j) csv += (j ? ",z_" : "z_") + std::to_string(j + 1);
  csv += '\n';
  for (std::size_t r = 0; r < b.size(); ++r) {
    for (std::size_t j = 0; j < b.dim(); ++j) {
      if (j) csv += ',';
      csv += format_double(b.at(r, j));
    }
    csv += '\n';
  }
  const fs::path target = fs::is_directory(out) ? fs::path(out) / "sample.csv" : fs::path(out);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  write_text(target, csv);
  std::printf("%zu rows of %s written to %s\n", b.size(), fx.spec.to_string().c_str(),
              target.string().c_str());
  return kExitPass;
}

int cmd_verify_theorem(const SpecFlags& spec, const std::string& target, std::size_t samples,
                       std::uint64_t seed, const std::string& out, unsigned workers) {
  TheoremFixture fx = spec.resolve();
  if (!target.empty()) {
    try {
      fx.target_override = DirichletParams(parse_list("--target", target));
    } catch (const InvalidParameter& e) {
      throw ConfigError(std::string("--target: ") + e.what());
    }
    if (fx.target_override->size() != fx.spec.k())
      throw ConfigError("--target: length must equal the number of columns");
  }
  TheoremSettings cfg;
  cfg.samples = samples;
  const TheoremOutcome o = verify_theorem_fixture(fx, cfg, RngStream(seed), workers);

  std::printf("spec %s  target Dirichlet(", fx.spec.to_string().c_str());
  for (std::size_t j = 0; j < o.target.size(); ++j) std::printf(j ? ", %g" : "%g", o.target[j]);
  std::printf(")  N = %zu per path\n", samples);
  double worst_z = 0.0;
  for (const auto& m : o.moments) worst_z = std::max(worst_z, std::abs(m.result.z_score));
  std::printf("  moments  %zu tests, max |z| = %.3f (threshold %.1f)  %s\n", o.moments.size(),
              worst_z, cfg.z_threshold, o.moments_pass() ? "pass" : "FAIL");
  for (const auto& k : o.ks)
    std::printf("  ks %-11s z_%zu  D = %.5f (threshold %.5f)  %s\n",
                std::string(to_string(k.path)).c_str(), k.result.coordinate + 1, k.result.statistic,
                k.result.threshold, k.result.pass ? "pass" : "FAIL");
  std::printf("  energy   statistic %.3g, p = %.4f  %s\n", o.energy.statistic,
              o.energy.permutation_p, o.energy.pass ? "pass" : "FAIL");
  std::printf("%s\n", o.pass() ? "PASS" : "FAIL");

  ordered_json doc = header("verify-theorem");
  doc["seed"] = seed;
  doc["pass"] = o.pass();
  doc["results"] = to_json(o);
  write_report(out, "verify_theorem.json", doc);
  return o.pass() ? kExitPass : kExitFailure;
}

int cmd_verify_moments(const SpecFlags& spec, unsigned max_order, double tol, bool sweep,
                       const std::string& out) {
  ordered_json doc = header("verify-moments");
  doc["max_order"] = max_order;
  doc["rel_tol"] = tol;
  bool pass = true;
  if (sweep) {
    MomentSweepSettings cfg;
    cfg.max_order = max_order;
    cfg.rel_tol = tol;
    const auto o = sweep_moment_oracle(cfg);
    ordered_json shapes = ordered_json::array();
    for (const auto& s : o.shapes) {
      std::printf("n=%zu k=%zu  %zu specs, %zu moments, max rel error %.3g\n", s.n, s.k, s.specs,
                  s.evaluations, s.max_rel_error);
      shapes.push_back({{"n", s.n}, {"k", s.k}, {"specs", s.specs},
                        {"evaluations", s.evaluations}, {"max_rel_error", s.max_rel_error}});
    }
    pass = o.pass();
    doc["shapes"] = std::move(shapes);
  } else {
    std::vector<TheoremFixture> fixtures;
    if (spec.given()) fixtures.push_back(spec.resolve());
    else fixtures = standard_theorem_fixtures();
    ordered_json specs = ordered_json::array();
    for (const auto& fx : fixtures) {
      ordered_json rows = ordered_json::array();
      double worst = 0.0;
      for (const auto& c : compare_moments(fx.spec, max_order)) {
        worst = std::max(worst, c.rel_error);
        const auto idx = c.index.values();
        rows.push_back({{"index", std::vector<unsigned>(idx.begin(), idx.end())},
                        {"expansion", c.expansion},
                        {"closed_form", c.closed_form},
                        {"rel_error", c.rel_error}});
      }
      std::printf("%-16s %s  %zu moments, max rel error %.3g  %s\n", fx.name.c_str(),
                  fx.spec.to_string().c_str(), rows.size(), worst, worst < tol ? "pass" : "FAIL");
      pass = pass && worst < tol;
      specs.push_back({{"name", fx.name}, {"alphas", fx.spec.alphas()}, {"max_rel_error", worst},
                       {"moments", std::move(rows)}});
    }
    doc["specs"] = std::move(specs);
  }
  doc["pass"] = pass;
  std::printf("%s\n", pass ? "PASS" : "FAIL");
  write_report(out, "verify_moments.json", doc);
  return pass ? kExitPass : kExitFailure;
}

int cmd_stieltjes(unsigned n, const std::string& grid_text, const std::string& form,
                  std::optional<double> tol_flag, const std::string& out) {
  const auto grid = parse_list("--grid", grid_text);
  if (form != "transform" && form != "integral") throw ConfigError("--form: expected transform or integral");
  const double tol = tol_flag.value_or(n <= 3 ? 1e-8 : 1e-6);
  std::vector<ResidualRow> rows;
  try {
    rows = form == "transform" ? transform_derivative_residual(n, grid) : integral_derivative_residual(n, grid);
  } catch (const InvalidParameter& e) {
    throw ConfigError(e.what());
  }
  std::string csv = "n,z,lhs,rhs,residual\n";
  double worst = 0.0;
  for (const auto& r : rows) {
    worst = std::max(worst, r.residual);
    csv += std::to_string(r.n) + "," + format_double(r.z) + "," + format_double(r.lhs) + "," +
           format_double(r.rhs) + "," + format_double(r.residual) + "\n";
    std::printf("n=%u z=%-5g lhs=%.15g rhs=%.15g residual=%.3g\n", r.n, r.z, r.lhs, r.rhs, r.residual);
  }
  const bool pass = worst < tol;
  std::printf("max residual %.3g (tolerance %.0e)  %s\n", worst, tol, pass ? "PASS" : "FAIL");
  if (!out.empty()) {
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw ConfigError(out + ": cannot create output directory: " + ec.message());
    const std::string stem = "stieltjes_" + form + "_n" + std::to_string(n);
    write_text(fs::path(out) / (stem + ".csv"), csv);
    ordered_json doc = header("stieltjes");
    doc["n"] = n;
    doc["form"] = form;
    doc["grid"] = grid;
    doc["tol"] = tol;
    doc["max_residual"] = worst;
    doc["pass"] = pass;
    write_report(out, stem + ".json", doc);
  }
  return pass ? kExitPass : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random weighted averages of Dirichlet vectors: sampling and verification"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  unsigned workers = 1;
  std::string out;
  std::optional<std::uint64_t> seed;

  std::string config;
  auto* run = app.add_subcommand("run", "run every scenario of a JSON experiment config");
  run->add_option("--config", config, "experiment config")->required();
  run->add_option("--out", out, "report directory (overrides output_dir)");
  run->add_option("--workers", workers, "worker threads")->check(CLI::Range(1u, 1024u));
  run->add_option("--seed", seed, "replace every scenario seed");

  SpecFlags sample_spec;
  std::size_t n_samples = 1000;
  std::uint64_t sample_seed = 0;
  std::string sample_out, path = "direct";
  auto* sample = app.add_subcommand("sample", "write Z draws as CSV");
  sample_spec.attach(sample);
  sample->add_option("--n-samples", n_samples, "number of rows")->check(CLI::Range(std::size_t{1}, std::size_t{100'000'000}));
  sample->add_option("--seed", sample_seed, "stream seed")->required();
  sample->add_option("--out", sample_out, "CSV file (or directory for sample.csv)")->required();
  sample->add_option("--path", path, "direct, gamma or gamma_ratio");
  sample->add_option("--workers", workers, "worker threads")->check(CLI::Range(1u, 1024u));

  SpecFlags theorem_spec;
  std::string target;
  std::size_t theorem_samples = 200'000;
  std::uint64_t theorem_seed = 0;
  auto* theorem = app.add_subcommand("verify-theorem", "moment, KS and energy tests of one spec");
  theorem_spec.attach(theorem);
  theorem->add_option("--target", target, "test against Dirichlet(target) instead of the column sums");
  theorem->add_option("--samples", theorem_samples, "draws per path")->check(CLI::Range(std::size_t{10}, std::size_t{100'000'000}));
  theorem->add_option("--seed", theorem_seed, "stream seed")->required();
  theorem->add_option("--out", out, "report directory");
  theorem->add_option("--workers", workers, "worker threads")->check(CLI::Range(1u, 1024u));

  SpecFlags moment_spec;
  unsigned max_order = 5;
  double moment_tol = 1e-9;
  bool sweep = false;
  auto* moments = app.add_subcommand("verify-moments", "expansion against closed-form moments");
  moment_spec.attach(moments);
  moments->add_option("--max-order", max_order, "largest total order")->check(CLI::Range(0u, kDefaultOrderCap));
  moments->add_option("--tol", moment_tol, "relative tolerance");
  auto* sweep_flag = moments->add_flag("--sweep", sweep, "every n, k <= 3 spec with entries in {0.5, 1, 2, 3.5}");
  sweep_flag->excludes("--alphas")->excludes("--fixture");
  moments->add_option("--out", out, "report directory");

  unsigned st_n = 3;
  std::string grid = "1.5,2,3,5", form = "transform";
  std::optional<double> st_tol;
  auto* stieltjes = app.add_subcommand("stieltjes", "power semicircle residuals on a real grid");
  stieltjes->add_option("--n", st_n, "power semicircle index")->check(CLI::Range(2u, 12u));
  stieltjes->add_option("--grid", grid, "comma-separated points z > 1.25");
  stieltjes->add_option("--form", form, "transform: derivative of the closed transform; integral: derivative of the bare integral");
  stieltjes->add_option("--tol", st_tol, "residual tolerance");
  stieltjes->add_option("--out", out, "directory for CSV and report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfigError;
  }

  try {
    if (*run) return cmd_run(config, out, workers, seed);
    if (*sample) return cmd_sample(sample_spec, n_samples, sample_seed, sample_out, path, workers);
    if (*theorem)
      return cmd_verify_theorem(theorem_spec, target, theorem_samples, theorem_seed, out, workers);
    if (*moments) return cmd_verify_moments(moment_spec, max_order, moment_tol, sweep, out);
    if (*stieltjes) return cmd_stieltjes(st_n, grid, form, st_tol, out);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const InvalidParameter& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  return kExitConfigError;
}
