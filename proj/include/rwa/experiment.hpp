#pragma once

// JSON experiment configs in, JSON reports (and CSV data) out.
//
// A config is
//
//   { "format_version": 1, "output_dir": "reports", "scenarios": [ ... ] }
//
// and each scenario is an object with "id", "kind" and a mandatory "seed",
// plus kind-specific keys. Unknown keys anywhere are rejected.

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <json.hpp>

#include "rwa/error.hpp"
#include "rwa/verification.hpp"

namespace rwa::experiment {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kExitPass = 0, kExitFailure = 1, kExitConfigError = 2 };

/// Malformed, unreadable or semantically invalid configuration; also IO trouble.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Strict JSON reader

/// A JSON value together with its JSON pointer, for anchored error messages.
class Node {
 public:
  Node(const json& v, std::string where) : v_(&v), where_(std::move(where)) {}

  const json& value() const noexcept { return *v_; }
  const std::string& where() const noexcept { return where_; }

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError((where_.empty() ? std::string("/") : where_) + ": " + what);
  }

  /// Rejects keys outside `allowed`.
  void expect_object(std::initializer_list<const char*> allowed) const {
    if (!v_->is_object()) fail("expected an object");
    for (const auto& [key, _] : v_->items()) {
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
        Node(*v_, where_ + "/" + key).fail("unknown key");
    }
  }

  bool has(const char* key) const { return v_->contains(key); }

  Node at(const char* key) const {
    if (!v_->contains(key)) fail(std::string("missing required key \"") + key + "\"");
    return Node((*v_)[key], where_ + "/" + key);
  }

  Node at(std::size_t i) const { return Node((*v_)[i], where_ + "/" + std::to_string(i)); }

  std::size_t array_size() const {
    if (!v_->is_array()) fail("expected an array");
    return v_->size();
  }

  double number() const {
    if (!v_->is_number()) fail("expected a number");
    return v_->get<double>();
  }

  double positive() const {
    const double x = number();
    if (!(x > 0.0) || !std::isfinite(x)) fail("expected a positive finite number");
    return x;
  }

  std::uint64_t uint() const {
    if (v_->is_number_unsigned()) return v_->get<std::uint64_t>();
    if (v_->is_number_integer()) fail("expected a non-negative integer");
    fail("expected an unsigned integer");
  }

  std::uint64_t uint_in(std::uint64_t lo, std::uint64_t hi) const {
    const auto x = uint();
    if (x < lo || x > hi)
      fail("expected an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return x;
  }

  std::string string() const {
    if (!v_->is_string()) fail("expected a string");
    return v_->get<std::string>();
  }

  std::vector<double> numbers() const {
    std::vector<double> out;
    for (std::size_t i = 0; i < array_size(); ++i) out.push_back(at(i).number());
    return out;
  }

  std::vector<std::vector<double>> matrix() const {
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < array_size(); ++i) out.push_back(at(i).numbers());
    return out;
  }

  double level() const {
    const double x = number();
    if (!(x > 0.0 && x < 1.0)) fail("expected a level in (0, 1)");
    return x;
  }

 private:
  const json* v_;
  std::string where_;
};

/// Runs `make` and converts parameter violations into errors anchored at `n`.
template <class F>
auto checked(const Node& n, F&& make) -> decltype(make()) {
  try {
    return make();
  } catch (const InvalidParameter& e) {
    n.fail(e.what());
  }
}

// ---------------------------------------------------------------------------
// Scenario descriptors

struct FixtureConfig {
  std::string name;
  RwaSpec spec;
  std::optional<DirichletParams> target;
};

struct TheoremScenario {
  std::vector<FixtureConfig> fixtures;
  TheoremSettings settings;
};
struct MomentOracleScenario {
  MomentSweepSettings settings;
};
struct DirMultScenario {
  DirMultSweepSettings settings;
};
struct StieltjesScenario {
  StieltjesSettings settings;
};
struct ProductIdentityScenario {
  ProductIdentitySettings settings;
};
struct VariantScenarioConfig {
  VariantSettings settings;
};

using ScenarioBody = std::variant<TheoremScenario, MomentOracleScenario, DirMultScenario,
                                  StieltjesScenario, ProductIdentityScenario, VariantScenarioConfig>;

struct Scenario {
  std::string id;
  std::string kind;
  std::uint64_t seed;
  ScenarioBody body;
};

struct ExperimentConfig {
  int format_version = kFormatVersion;
  std::string output_dir = "reports";
  std::vector<Scenario> scenarios;
  json source;  ///< parsed document, hashed into every report
};

namespace detail {

inline EnergyOptions parse_energy(const Node& n) {
  n.expect_object({"level", "permutations", "max_points", "pair_cap"});
  EnergyOptions e;
  if (n.has("level")) e.level = n.at("level").level();
  if (n.has("permutations")) e.permutations = static_cast<unsigned>(n.at("permutations").uint_in(200, 1'000'000));
  if (n.has("max_points")) e.max_points = n.at("max_points").uint_in(2, 100'000);
  if (n.has("pair_cap")) e.pair_cap = n.at("pair_cap").uint_in(16, 1'000'000'000);
  return e;
}

inline FixtureConfig parse_fixture(const Node& n) {
  n.expect_object({"name", "alphas", "target"});
  const Node a = n.at("alphas");
  FixtureConfig fx{n.at("name").string(), checked(a, [&] { return RwaSpec(a.matrix()); }), {}};
  if (n.has("target")) {
    const Node t = n.at("target");
    fx.target = checked(t, [&] { return DirichletParams(t.numbers()); });
    if (fx.target->size() != fx.spec.k()) t.fail("target length must equal the number of columns");
  }
  return fx;
}

inline TheoremScenario parse_theorem(const Node& n) {
  n.expect_object({"id", "kind", "seed", "samples", "moment_order", "z_threshold", "ks_level",
                   "energy", "fixtures"});
  TheoremScenario s;
  auto& c = s.settings;
  if (n.has("samples")) c.samples = n.at("samples").uint_in(10, 100'000'000);
  if (n.has("moment_order")) c.moment_order = static_cast<unsigned>(n.at("moment_order").uint_in(1, kDefaultOrderCap));
  if (n.has("z_threshold")) c.z_threshold = n.at("z_threshold").positive();
  if (n.has("ks_level")) c.ks_level = n.at("ks_level").level();
  if (n.has("energy")) c.energy = parse_energy(n.at("energy"));
  const Node f = n.at("fixtures");
  if (f.array_size() == 0) f.fail("at least one fixture is required");
  for (std::size_t i = 0; i < f.array_size(); ++i) s.fixtures.push_back(parse_fixture(f.at(i)));
  return s;
}

inline MomentOracleScenario parse_moment_oracle(const Node& n) {
  n.expect_object({"id", "kind", "seed", "values", "max_n", "max_k", "max_order", "rel_tol"});
  MomentOracleScenario s;
  auto& c = s.settings;
  if (n.has("values")) {
    const Node v = n.at("values");
    c.values = v.numbers();
    if (c.values.empty()) v.fail("at least one value is required");
    for (std::size_t i = 0; i < c.values.size(); ++i) v.at(i).positive();
  }
  if (n.has("max_n")) c.max_n = n.at("max_n").uint_in(2, 4);
  if (n.has("max_k")) c.max_k = n.at("max_k").uint_in(2, 4);
  if (n.has("max_order")) c.max_order = static_cast<unsigned>(n.at("max_order").uint_in(0, kDefaultOrderCap));
  if (n.has("rel_tol")) c.rel_tol = n.at("rel_tol").positive();
  return s;
}

inline DirMultScenario parse_dirmult(const Node& n) {
  n.expect_object({"id", "kind", "seed", "values", "max_k", "max_trials", "tol"});
  DirMultScenario s;
  auto& c = s.settings;
  if (n.has("values")) {
    const Node v = n.at("values");
    c.values = v.numbers();
    if (c.values.empty()) v.fail("at least one value is required");
    for (std::size_t i = 0; i < c.values.size(); ++i) v.at(i).positive();
  }
  if (n.has("max_k")) c.max_k = n.at("max_k").uint_in(2, 6);
  if (n.has("max_trials")) c.max_trials = static_cast<unsigned>(n.at("max_trials").uint_in(0, kDirMultTrialCap));
  if (n.has("tol")) c.tol = n.at("tol").positive();
  return s;
}

inline StieltjesScenario parse_stieltjes(const Node& n) {
  n.expect_object({"id", "kind", "seed", "cases", "normalization_moduli"});
  StieltjesScenario s;
  auto& c = s.settings;
  if (n.has("cases")) {
    c.cases.clear();
    const Node cs = n.at("cases");
    for (std::size_t i = 0; i < cs.array_size(); ++i) {
      const Node e = cs.at(i);
      e.expect_object({"n", "grid", "tol"});
      StieltjesCase sc{static_cast<unsigned>(e.at("n").uint_in(2, 12)), e.at("grid").numbers(),
                       e.at("tol").positive()};
      const Node g = e.at("grid");
      for (std::size_t j = 0; j < sc.grid.size(); ++j)
        if (!(sc.grid[j] > 1.0 + kSupportStandoff) || !std::isfinite(sc.grid[j]))
          g.at(j).fail("grid points must exceed 1 + " + std::to_string(kSupportStandoff));
      c.cases.push_back(std::move(sc));
    }
  }
  if (n.has("normalization_moduli")) {
    const Node m = n.at("normalization_moduli");
    c.normalization_moduli = m.numbers();
    for (std::size_t i = 0; i < c.normalization_moduli.size(); ++i)
      if (!(c.normalization_moduli[i] > 2.0)) m.at(i).fail("moduli must exceed 2");
  }
  return s;
}

inline ProductIdentityScenario parse_product_identity(const Node& n) {
  n.expect_object({"id", "kind", "seed", "alphas", "t_values", "tol"});
  ProductIdentityScenario s;
  auto& c = s.settings;
  if (n.has("alphas")) {
    const Node a = n.at("alphas");
    c.alphas = a.matrix();
    for (std::size_t i = 0; i < c.alphas.size(); ++i)
      checked(a.at(i), [&] { return DirichletParams(c.alphas[i]); });
  }
  if (n.has("t_values")) {
    const Node t = n.at("t_values");
    c.t_values = t.numbers();
    if (c.t_values.empty()) t.fail("at least one t value is required");
    for (std::size_t i = 0; i < c.t_values.size(); ++i)
      if (!(std::abs(c.t_values[i]) < 1.0)) t.at(i).fail("t values must satisfy |t| < 1");
  }
  if (n.has("tol")) c.tol = n.at("tol").positive();
  return s;
}

inline VariantScenarioConfig parse_variant(const Node& n) {
  n.expect_object({"id", "kind", "seed", "alpha", "samples", "exact_order", "moment_order",
                   "z_threshold", "ks_level"});
  VariantScenarioConfig s;
  auto& c = s.settings;
  if (n.has("alpha")) {
    const Node a = n.at("alpha");
    c.alpha = a.numbers();
    if (c.alpha.size() < 2) a.fail("at least two components are required");
    for (std::size_t i = 0; i < c.alpha.size(); ++i) a.at(i).positive();
  }
  if (n.has("samples")) c.samples = n.at("samples").uint_in(10, 100'000'000);
  if (n.has("exact_order")) c.exact_order = static_cast<unsigned>(n.at("exact_order").uint_in(1, kDefaultOrderCap));
  if (n.has("moment_order")) c.moment_order = static_cast<unsigned>(n.at("moment_order").uint_in(1, kDefaultOrderCap));
  if (n.has("z_threshold")) c.z_threshold = n.at("z_threshold").positive();
  if (n.has("ks_level")) c.ks_level = n.at("ks_level").level();
  return s;
}

inline bool valid_id(const std::string& id) {
  return !id.empty() && id.size() <= 64 && id.front() != '.' &&
         std::all_of(id.begin(), id.end(), [](unsigned char ch) {
           return std::isalnum(ch) || ch == '_' || ch == '-' || ch == '.';
         });
}

inline Scenario parse_scenario(const Node& n) {
  if (!n.value().is_object()) n.fail("expected an object");
  Scenario s{n.at("id").string(), n.at("kind").string(), n.at("seed").uint(), TheoremScenario{}};
  if (!valid_id(s.id)) n.at("id").fail("ids use letters, digits, '_', '-' and '.' only");
  if (s.kind == "theorem") s.body = parse_theorem(n);
  else if (s.kind == "moment_oracle") s.body = parse_moment_oracle(n);
  else if (s.kind == "dirmult") s.body = parse_dirmult(n);
  else if (s.kind == "stieltjes") s.body = parse_stieltjes(n);
  else if (s.kind == "product_identity") s.body = parse_product_identity(n);
  else if (s.kind == "variant") s.body = parse_variant(n);
  else
    n.at("kind").fail("unknown scenario kind \"" + s.kind +
                      "\" (theorem, moment_oracle, dirmult, stieltjes, product_identity, variant)");
  return s;
}

}  // namespace detail

/// Validates a parsed document against the config schema.
inline ExperimentConfig parse_config(const json& doc) {
  const Node root(doc, "");
  root.expect_object({"format_version", "output_dir", "scenarios"});
  ExperimentConfig cfg;
  const Node fv = root.at("format_version");
  if (fv.uint() != static_cast<std::uint64_t>(kFormatVersion))
    fv.fail("unsupported format_version (expected " + std::to_string(kFormatVersion) + ")");
  if (root.has("output_dir")) cfg.output_dir = root.at("output_dir").string();
  const Node sc = root.at("scenarios");
  if (sc.array_size() == 0) sc.fail("at least one scenario is required");
  for (std::size_t i = 0; i < sc.array_size(); ++i) {
    cfg.scenarios.push_back(detail::parse_scenario(sc.at(i)));
    for (std::size_t j = 0; j < i; ++j)
      if (cfg.scenarios[j].id == cfg.scenarios[i].id)
        sc.at(i).at("id").fail("duplicate scenario id \"" + cfg.scenarios[i].id + "\"");
  }
  cfg.source = doc;
  return cfg;
}

/// Parses config text; syntax errors carry line and column.
inline ExperimentConfig parse_config_text(const std::string& text, const std::string& origin = "config") {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string msg = e.what();
    if (const auto p = msg.find(": "); p != std::string::npos) msg = msg.substr(p + 2);
    throw ConfigError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + msg);
  }
  try {
    return parse_config(doc);
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open config");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path.string());
}

/// Replaces every scenario seed (the `--seed` override).
inline void override_seeds(ExperimentConfig& cfg, std::uint64_t seed) {
  for (std::size_t i = 0; i < cfg.scenarios.size(); ++i) {
    cfg.scenarios[i].seed = seed;
    cfg.source["scenarios"][i]["seed"] = seed;
  }
}

/// FNV-1a 64 of the canonical dump, as 16 hex digits.
inline std::string config_hash(const json& doc) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : doc.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char out[17];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
  return out;
}

// ---------------------------------------------------------------------------
// Serialization of outcomes

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline ordered_json to_json(const MomentTestResult& m) {
  const auto idx = m.index.values();
  return {{"index", std::vector<unsigned>(idx.begin(), idx.end())}, {"empirical", m.empirical}, {"exact", m.exact},
          {"std_error", m.std_error},  {"z", m.z_score},           {"threshold", m.threshold},
          {"pass", m.pass}};
}

inline ordered_json to_json(const KsResult& k) {
  return {{"coordinate", k.coordinate}, {"statistic", k.statistic}, {"threshold", k.threshold},
          {"level", k.level},           {"n", k.n},                 {"pass", k.pass}};
}

inline ordered_json to_json(const EnergyResult& e) {
  return {{"statistic", e.statistic}, {"p_value", e.permutation_p}, {"permutations", e.permutations},
          {"points_a", e.points_a},   {"points_b", e.points_b},     {"seed", e.seed},
          {"stream_id", e.stream_id}, {"level", e.level},           {"pass", e.pass}};
}

inline ordered_json to_json(const TheoremOutcome& o) {
  ordered_json moments = ordered_json::array(), ks = ordered_json::array();
  for (const auto& m : o.moments) {
    auto j = to_json(m.result);
    j["path"] = to_string(m.path);
    moments.push_back(std::move(j));
  }
  for (const auto& t : o.ks) {
    auto j = to_json(t.result);
    j["path"] = to_string(t.path);
    ks.push_back(std::move(j));
  }
  return {{"name", o.name},
          {"alphas", o.spec.alphas()},
          {"target", std::vector<double>(o.target.values().begin(), o.target.values().end())},
          {"planted", o.planted},
          {"pass", o.pass()},
          {"failures", o.failures()},
          {"moments", std::move(moments)},
          {"ks", std::move(ks)},
          {"energy", to_json(o.energy)}};
}

// ---------------------------------------------------------------------------
// Running

struct ScenarioReport {
  std::string id;
  bool pass = false;
  bool config_error = false;
  ordered_json body;    ///< report without the timing field
  double wall_seconds = 0.0;
  std::string csv;      ///< optional bulk data, written next to the report
};

namespace detail {

struct Runner {
  const Scenario& sc;
  unsigned workers;
  ordered_json& out;

  bool operator()(const TheoremScenario& t) const {
    ordered_json fixtures = ordered_json::array();
    const RngStream root(sc.seed);
    bool pass = true;
    for (std::size_t i = 0; i < t.fixtures.size(); ++i) {
      const auto& f = t.fixtures[i];
      const auto o = verify_theorem_fixture({f.name, f.spec, f.target}, t.settings,
                                            root.child(i), workers);
      pass = pass && o.pass();
      fixtures.push_back(to_json(o));
    }
    out["settings"] = {{"samples", t.settings.samples},
                       {"moment_order", t.settings.moment_order},
                       {"z_threshold", t.settings.z_threshold},
                       {"ks_level", t.settings.ks_level},
                       {"energy_level", t.settings.energy.level},
                       {"energy_permutations", t.settings.energy.permutations},
                       {"energy_max_points", t.settings.energy.max_points}};
    out["fixtures"] = std::move(fixtures);
    return pass;
  }

  bool operator()(const MomentOracleScenario& m) const {
    const auto o = sweep_moment_oracle(m.settings);
    ordered_json shapes = ordered_json::array();
    for (const auto& s : o.shapes)
      shapes.push_back({{"n", s.n},
                        {"k", s.k},
                        {"specs", s.specs},
                        {"evaluations", s.evaluations},
                        {"max_rel_error", s.max_rel_error},
                        {"worst_alphas", s.worst_alphas},
                        {"worst_index", s.worst_index},
                        {"pass", s.max_rel_error < o.rel_tol}});
    out["settings"] = {{"values", m.settings.values},
                       {"max_n", m.settings.max_n},
                       {"max_k", m.settings.max_k},
                       {"max_order", m.settings.max_order},
                       {"rel_tol", m.settings.rel_tol}};
    out["shapes"] = std::move(shapes);
    out["max_rel_error"] = o.max_rel_error();
    return o.pass();
  }

  bool operator()(const DirMultScenario& d) const {
    const auto o = sweep_dirmult(d.settings);
    out["settings"] = {{"values", d.settings.values},
                       {"max_k", d.settings.max_k},
                       {"max_trials", d.settings.max_trials},
                       {"tol", d.settings.tol}};
    out["cases"] = o.cases;
    out["max_abs_error"] = o.max_abs_error;
    out["worst_alpha"] = o.worst_alpha;
    out["worst_trials"] = o.worst_trials;
    return o.pass();
  }

  bool operator()(const StieltjesScenario& st) const {
    const auto o = verify_stieltjes(st.settings);
    ordered_json res = ordered_json::array(), norm = ordered_json::array();
    for (const auto& r : o.residuals)
      res.push_back({{"form", r.form},   {"n", r.row.n},     {"z", r.row.z},
                     {"lhs", r.row.lhs}, {"rhs", r.row.rhs}, {"residual", r.row.residual},
                     {"tol", r.tol},     {"pass", r.pass()}});
    for (const auto& c : o.normalization)
      norm.push_back({{"transform", c.transform}, {"z", {c.z.real(), c.z.imag()}},
                      {"error", c.error},         {"bound", c.bound},
                      {"pass", c.pass()}});
    out["residuals"] = std::move(res);
    out["normalization"] = std::move(norm);
    out["coefficient"] = {
        {"used", "(n-1)/2"},
        {"rejected", "(n-2)/2"},
        {"note", "(n-2)/2 makes the n = 2 transform vanish, violating z S(z) -> 1; "
                 "(n-1)/2 reproduces the uniform and semicircle transforms"}};
    return o.pass();
  }

  bool operator()(const ProductIdentityScenario& p) const {
    const auto checks = verify_product_identity(p.settings);
    ordered_json rows = ordered_json::array();
    bool pass = true;
    double worst = 0.0;
    for (const auto& c : checks) {
      pass = pass && c.pass();
      worst = std::max(worst, c.result.abs_error());
      rows.push_back({{"alpha", c.alpha},
                      {"t", c.t},
                      {"series", c.result.series},
                      {"product", c.result.product},
                      {"abs_error", c.result.abs_error()},
                      {"tail_bound", c.result.tail_bound},
                      {"order", c.result.order},
                      {"pass", c.pass()}});
    }
    out["tol"] = p.settings.tol;
    out["max_abs_error"] = worst;
    out["checks"] = std::move(rows);
    return pass;
  }

  bool operator()(const VariantScenarioConfig& v) const {
    const auto o = verify_variant(v.settings, RngStream(sc.seed), workers);
    ordered_json readings = ordered_json::array(), moments = ordered_json::array(),
                 ks = ordered_json::array();
    for (const auto& r : o.readings)
      readings.push_back({{"reading", to_string(r.reading)},
                          {"max_rel_error", r.max_rel_error},
                          {"verified", r.verified}});
    for (const auto& m : o.moments) moments.push_back(to_json(m));
    for (const auto& k : o.ks) ks.push_back(to_json(k));
    out["alpha"] = v.settings.alpha;
    out["readings"] = std::move(readings);
    out["enabled"] = o.enabled ? ordered_json(to_string(*o.enabled)) : ordered_json(nullptr);
    out["moments"] = std::move(moments);
    out["ks"] = std::move(ks);
    return o.pass();
  }
};

inline std::string stieltjes_csv(const ordered_json& residuals) {
  std::string csv = "form,n,z,lhs,rhs,residual\n";
  for (const auto& r : residuals)
    csv += r["form"].get<std::string>() + "," + std::to_string(r["n"].get<unsigned>()) + "," +
           format_double(r["z"].get<double>()) + "," + format_double(r["lhs"].get<double>()) + "," + format_double(r["rhs"].get<double>()) +
           "," + format_double(r["residual"].get<double>()) + "\n";
  return csv;
}

}  // namespace detail

/// Runs one scenario. Parameter violations discovered while running count as
/// config errors; other library errors fail the scenario.
inline ScenarioReport run_scenario(const Scenario& sc, const std::string& hash, unsigned workers = 1) {
  ScenarioReport rep;
  rep.id = sc.id;
  rep.body = {{"format_version", kFormatVersion}, {"tool_version", kToolVersion},
              {"config_hash", hash},              {"scenario", sc.id},
              {"kind", sc.kind},                  {"seed", sc.seed}};
  ordered_json results = ordered_json::object();
  const auto t0 = std::chrono::steady_clock::now();
  try {
    rep.pass = std::visit(detail::Runner{sc, std::max(1u, workers), results}, sc.body);
  } catch (const InvalidParameter& e) {
    rep.config_error = true;
    results["error"] = e.what();
  } catch (const Error& e) {
    results["error"] = e.what();
  }
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rep.body["pass"] = rep.pass;
  rep.body["results"] = std::move(results);
  if (std::holds_alternative<StieltjesScenario>(sc.body) && rep.body["results"].contains("residuals"))
    rep.csv = detail::stieltjes_csv(rep.body["results"]["residuals"]);
  return rep;
}

/// Report text including the timing field; everything else is deterministic.
inline std::string render_report(const ScenarioReport& rep) {
  ordered_json doc = rep.body;
  doc["wall_seconds"] = rep.wall_seconds;
  return doc.dump(2) + "\n";
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError(path.string() + ": cannot open for writing");
  out << text;
  if (!out.flush()) throw ConfigError(path.string() + ": write failed");
}

struct RunResult {
  int exit_code = kExitPass;
  std::vector<ScenarioReport> reports;
  std::vector<std::filesystem::path> written;
};

/**
 * Runs every scenario and writes `<out_dir>/<id>.json` (plus `<id>.csv` where a
 * scenario emits bulk data). Up to `workers` scenarios run concurrently; the
 * remaining budget goes to sampling inside each scenario. Reports are written
 * afterwards in config order.
 */
inline RunResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                                unsigned workers = 1) {
  RunResult res;
  const std::string hash = config_hash(cfg.source);
  workers = std::max(1u, workers);
  const unsigned lanes = std::min<unsigned>(workers, static_cast<unsigned>(cfg.scenarios.size()));
  const unsigned inner = std::max(1u, workers / lanes);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw ConfigError(out_dir.string() + ": cannot create output directory: " + ec.message());

  res.reports.resize(cfg.scenarios.size());
  std::atomic<std::size_t> next{0};
  auto lane = [&] {
    for (std::size_t i; (i = next++) < cfg.scenarios.size();)
      res.reports[i] = run_scenario(cfg.scenarios[i], hash, inner);
  };
  {
    std::vector<std::jthread> pool;
    for (unsigned l = 1; l < lanes; ++l) pool.emplace_back(lane);
    lane();
  }

  for (const auto& rep : res.reports) {
    const auto json_path = out_dir / (rep.id + ".json");
    write_text(json_path, render_report(rep));
    res.written.push_back(json_path);
    if (!rep.csv.empty()) {
      const auto csv_path = out_dir / (rep.id + ".csv");
      write_text(csv_path, rep.csv);
      res.written.push_back(csv_path);
    }
    if (rep.config_error) res.exit_code = kExitConfigError;
    else if (!rep.pass && res.exit_code == kExitPass) res.exit_code = kExitFailure;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Command-line spec flags

/// "a,b;c,d" -> {{a, b}, {c, d}}.
inline std::vector<std::vector<double>> parse_alpha_matrix(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::stringstream rs(text);
  std::string row;
  while (std::getline(rs, row, ';')) {
    std::vector<double> r;
    std::stringstream cs(row);
    std::string cell;
    while (std::getline(cs, cell, ',')) {
      std::size_t used = 0;
      double v;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        throw ConfigError("--alphas: cannot parse \"" + cell + "\" as a number");
      }
      if (cell.find_first_not_of(" \t", used) != std::string::npos)
        throw ConfigError("--alphas: cannot parse \"" + cell + "\" as a number");
      r.push_back(v);
    }
    rows.push_back(std::move(r));
  }
  try {
    return RwaSpec(rows).alphas();
  } catch (const InvalidParameter& e) {
    throw ConfigError(std::string("--alphas: ") + e.what());
  }
}

inline std::optional<TheoremFixture> find_fixture(const std::string& name) {
  for (auto& f : standard_theorem_fixtures())
    if (f.name == name) return f;
  return std::nullopt;
}

}  // namespace rwa::experiment
