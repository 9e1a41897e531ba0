#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "samom/errors.hpp"
#include "samom/harness.hpp"

namespace samom::harness {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string join(std::span<const std::string_view> items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += ", ";
    out += s;
  }
  return out;
}

bool parse_plain(std::string_view text, double& out) {
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc{} && res.ptr == text.data() + text.size();
}

constexpr std::array<std::string_view, 28> kExperimentKeys = {
    "preset",       "problem.kind",     "problem.m",        "problem.n",
    "problem.seed", "problem.lambda",   "problem.file",     "problem.reference_steps",
    "method",       "step.family",      "step.c",           "step.s",
    "step.p",       "mom.family",       "mom.theta",        "mom.c",
    "mom.s",        "mom.p",            "N",                "seeds",
    "constraint",   "constraint.radius", "constraint.lo",   "constraint.hi",
    "composite_order", "init",          "checkpoint_ratio", "output"};

constexpr std::array<std::string_view, 10> kLemmaKeys = {
    "lemmas", "control", "paths", "length", "branches",
    "seed",   "tol_z",   "convergence_tol", "plateau_tol", "output"};

constexpr std::array<std::string_view, 7> kAlgebraKeys = {
    "mom.family", "mom.theta", "mom.c", "mom.s", "mom.p", "algebra.n", "output"};

constexpr std::array<std::string_view, 5> kPresets = {"lsq-ssgd", "lsq-proxrm", "lad-ssgd",
                                                      "lad-proxrm", "lasso"};

struct Preset {
  std::string_view name;
  std::string_view kind;
  std::string_view m;
  std::string_view n;
  std::string_view method;
  std::string_view step_c;
};

constexpr std::array<Preset, 5> kPresetTable = {{
    {"lsq-ssgd", "least_squares", "2000", "20", "ssgd", "1/16"},
    {"lsq-proxrm", "least_squares", "2000", "20", "prox_rm", "1/16"},
    {"lad-ssgd", "least_absolute", "10000", "100", "ssgd", "1/2"},
    {"lad-proxrm", "least_absolute", "10000", "100", "prox_rm", "1/4"},
    {"lasso", "lasso", "10000", "100", "composite", "1/20"},
}};

}  // namespace

double parse_number(std::string_view text) {
  text = trim(text);
  double v = 0.0;
  if (parse_plain(text, v)) return v;
  const auto slash = text.find('/');
  if (slash != std::string_view::npos) {
    double num = 0.0;
    double den = 0.0;
    if (parse_plain(trim(text.substr(0, slash)), num) &&
        parse_plain(trim(text.substr(slash + 1)), den) && den != 0.0) {
      return num / den;
    }
  }
  throw ConfigError("malformed number '" + std::string(text) + "'");
}

Config Config::parse(std::string_view text, std::span<const std::string_view> allowed_keys) {
  Config cfg;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    std::string_view line = text.substr(start, end == std::string_view::npos ? text.npos : end - start);
    ++line_no;
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value', got '" +
                        std::string(line) + "'");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (std::find(allowed_keys.begin(), allowed_keys.end(), key) == allowed_keys.end()) {
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + std::string(key) +
                        "' (allowed: " + join(allowed_keys) + ")");
    }
    if (value.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + ": empty value for '" +
                        std::string(key) + "'");
    }
    if (cfg.has(key)) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" +
                        std::string(key) + "'");
    }
    cfg.entries_.emplace(std::string(key), Entry{std::string(value), line_no});
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path,
                    std::span<const std::string_view> allowed_keys) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), allowed_keys);
}

bool Config::has(std::string_view key) const { return entries_.find(key) != entries_.end(); }

void Config::set(std::string key, std::string value) {
  entries_.insert_or_assign(std::move(key), Entry{std::move(value), 0});
}

void Config::set_default(std::string key, std::string value) {
  if (!has(key)) set(std::move(key), std::move(value));
}

const Config::Entry& Config::require(std::string_view key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("missing required key '" + std::string(key) + "'");
  return it->second;
}

void Config::bad_value(std::string_view key, std::string_view what) const {
  const auto& e = require(key);
  std::string where = e.line > 0 ? "line " + std::to_string(e.line) + ": " : "";
  throw ConfigError(where + "key '" + std::string(key) + "' = '" + e.value + "': " +
                    std::string(what));
}

std::string Config::get_string(std::string_view key) const { return require(key).value; }

double Config::get_double(std::string_view key) const {
  try {
    return parse_number(require(key).value);
  } catch (const ConfigError&) {
    bad_value(key, "not a number");
  }
}

std::int64_t Config::get_int(std::string_view key) const {
  const auto& v = require(key).value;
  std::int64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    // Accept integral scientific notation such as 2e4.
    double d = 0.0;
    if (parse_plain(v, d) && d == std::floor(d) && std::abs(d) < 9e18) return static_cast<std::int64_t>(d);
    bad_value(key, "not an integer");
  }
  return out;
}

std::uint64_t Config::get_uint(std::string_view key) const {
  const std::int64_t v = get_int(key);
  if (v < 0) bad_value(key, "must be >= 0");
  return static_cast<std::uint64_t>(v);
}

std::vector<double> Config::get_double_list(std::string_view key) const {
  std::vector<double> out;
  for (auto item : split(require(key).value, ',')) {
    try {
      out.push_back(parse_number(item));
    } catch (const ConfigError&) {
      bad_value(key, "malformed list entry '" + std::string(item) + "'");
    }
  }
  return out;
}

std::vector<std::uint64_t> Config::get_uint_list(std::string_view key) const {
  std::vector<std::uint64_t> out;
  auto to_uint = [&](std::string_view s) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
      bad_value(key, "malformed integer '" + std::string(s) + "'");
    }
    return v;
  };
  for (auto item : split(require(key).value, ',')) {
    const auto dots = item.find("..");
    if (dots == std::string_view::npos) {
      out.push_back(to_uint(item));
      continue;
    }
    const auto lo = to_uint(trim(item.substr(0, dots)));
    const auto hi = to_uint(trim(item.substr(dots + 2)));
    if (lo > hi) bad_value(key, "empty range");
    for (auto v = lo; v <= hi; ++v) out.push_back(v);
  }
  return out;
}

std::span<const std::string_view> experiment_keys() { return kExperimentKeys; }
std::span<const std::string_view> lemma_keys() { return kLemmaKeys; }
std::span<const std::string_view> algebra_keys() { return kAlgebraKeys; }
std::span<const std::string_view> preset_names() { return kPresets; }

void expand_preset(Config& cfg) {
  if (!cfg.has("preset")) return;
  const std::string name = cfg.get_string("preset");
  const auto it = std::find_if(kPresetTable.begin(), kPresetTable.end(),
                               [&](const Preset& p) { return p.name == name; });
  if (it == kPresetTable.end()) {
    throw ConfigError("unknown preset '" + name + "' (expected " + join(kPresets) + ")");
  }
  cfg.set_default("problem.kind", std::string(it->kind));
  cfg.set_default("problem.m", std::string(it->m));
  cfg.set_default("problem.n", std::string(it->n));
  cfg.set_default("method", std::string(it->method));
  cfg.set_default("step.family", "power");
  cfg.set_default("step.c", std::string(it->step_c));
  cfg.set_default("step.s", "3");
  cfg.set_default("step.p", "8/9");
  cfg.set_default("mom.family", "constant");
  cfg.set_default("mom.theta", "0, 0.5, 0.9");
  cfg.set_default("N", "20000");
  cfg.set_default("seeds", "1..5");
  if (it->kind == "lasso") {
    cfg.set_default("problem.lambda", "1");
    cfg.set_default("composite_order", "explicit_first");
  }
}

namespace {

// Runs `fn`, rethrowing domain/argument errors as ConfigError naming `key`.
template <class Fn>
auto keyed(std::string_view key, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("key '" + std::string(key) + "': " + e.what());
  }
}

}  // namespace

std::vector<MomentumSchedule> make_momenta(const Config& cfg) {
  const std::string family = cfg.has("mom.family") ? cfg.get_string("mom.family") : "constant";
  if (family == "constant") {
    std::vector<double> thetas = cfg.has("mom.theta") ? cfg.get_double_list("mom.theta")
                                                      : std::vector<double>{0.0};
    std::vector<MomentumSchedule> out;
    for (double th : thetas) {
      out.push_back(keyed("mom.theta", [&] { return MomentumSchedule::constant(th); }));
    }
    return out;
  }
  if (cfg.has("mom.theta")) throw ConfigError("mom.theta applies only to mom.family = constant");
  if (family == "harmonic") {
    const double s = cfg.has("mom.s") ? cfg.get_double("mom.s") : 1.0;
    return {keyed("mom.s", [&] { return MomentumSchedule::harmonic(s); })};
  }
  if (family == "power") {
    const double c = cfg.get_double("mom.c");
    const double s = cfg.has("mom.s") ? cfg.get_double("mom.s") : 0.0;
    const double p = cfg.get_double("mom.p");
    return {keyed("mom.family", [&] { return MomentumSchedule::power(c, s, p); })};
  }
  throw ConfigError("unknown mom.family '" + family + "' (expected constant, harmonic or power)");
}

namespace {

StepSchedule make_step(const Config& cfg) {
  const std::string family = cfg.has("step.family") ? cfg.get_string("step.family") : "power";
  const double c = cfg.get_double("step.c");
  if (family == "constant") return keyed("step.c", [&] { return StepSchedule::constant(c); });
  if (family == "power") {
    const double s = cfg.has("step.s") ? cfg.get_double("step.s") : 0.0;
    const double p = cfg.has("step.p") ? cfg.get_double("step.p") : 1.0;
    return keyed("step.family", [&] { return StepSchedule::power(c, s, p); });
  }
  throw ConfigError("unknown step.family '" + family + "' (expected constant or power)");
}

ConstraintSet make_constraint(const Config& cfg, std::size_t n) {
  const std::string kind = cfg.has("constraint") ? cfg.get_string("constraint") : "none";
  if (kind == "none") return ConstraintSet::whole_space();
  if (kind == "ball") {
    return ConstraintSet::ball(std::vector<double>(n, 0.0), cfg.get_double("constraint.radius"));
  }
  if (kind == "box") {
    return ConstraintSet::box(cfg.get_double("constraint.lo"), cfg.get_double("constraint.hi"), n);
  }
  throw ConfigError("unknown constraint '" + kind + "' (expected none, ball or box)");
}

}  // namespace

ProblemSpec make_problem_spec(const Config& cfg) {
  ProblemSpec p;
  if (cfg.has("problem.file")) p.file = cfg.get_string("problem.file");
  if (cfg.has("problem.kind")) p.kind = parse_problem_kind(cfg.get_string("problem.kind"));
  if (!p.file) {
    p.m = static_cast<std::size_t>(cfg.get_uint("problem.m"));
    p.n = static_cast<std::size_t>(cfg.get_uint("problem.n"));
    if (p.m == 0 || p.n == 0) throw ConfigError("problem.m and problem.n must be >= 1");
  }
  if (cfg.has("problem.seed")) p.seed = cfg.get_uint("problem.seed");
  p.lambda = p.kind == ProblemKind::lasso ? 1.0 : 0.0;
  if (cfg.has("problem.lambda")) p.lambda = cfg.get_double("problem.lambda");
  if (!(p.lambda >= 0.0)) throw ConfigError("problem.lambda must be >= 0");
  if (cfg.has("problem.reference_steps")) {
    p.reference_steps = cfg.get_int("problem.reference_steps");
    if (p.reference_steps < 1) throw ConfigError("problem.reference_steps must be >= 1");
  }
  return p;
}

ExperimentConfig make_experiment(Config cfg) {
  expand_preset(cfg);
  std::vector<std::string_view> missing;
  for (std::string_view key : {"problem.kind", "method", "step.c", "N"}) {
    if (!cfg.has(key)) missing.push_back(key);
  }
  if (!cfg.has("problem.file")) {
    for (std::string_view key : {"problem.m", "problem.n"}) {
      if (!cfg.has(key)) missing.push_back(key);
    }
  }
  if (!missing.empty()) {
    throw ConfigError("missing required keys: " + join(missing) +
                      " (or set preset = one of " + join(kPresets) + ")");
  }

  ExperimentConfig ex;
  ex.problem = make_problem_spec(cfg);
  auto& s = ex.solver;
  s.method = parse_method(cfg.get_string("method"));
  if (s.method == Method::composite && ex.problem.kind != ProblemKind::lasso) {
    throw ConfigError("method = composite requires problem.kind = lasso");
  }
  s.step = make_step(cfg);
  ex.momenta = make_momenta(cfg);
  s.momentum = ex.momenta.front();
  s.iterations = cfg.get_int("N");
  s.constraint = make_constraint(cfg, ex.problem.n);
  if (cfg.has("composite_order")) {
    s.composite_order = parse_composite_order(cfg.get_string("composite_order"));
  }
  if (cfg.has("init")) s.init = parse_init_mode(cfg.get_string("init"));
  if (cfg.has("checkpoint_ratio")) s.checkpoint_ratio = cfg.get_double("checkpoint_ratio");
  s.validate();
  ex.seeds = cfg.has("seeds") ? cfg.get_uint_list("seeds") : std::vector<std::uint64_t>{1};
  if (ex.seeds.empty()) throw ConfigError("seeds must list at least one seed");
  if (cfg.has("output")) ex.output = cfg.get_string("output");
  for (const auto& [k, e] : cfg.entries()) {
    if (k != "output") ex.echo.emplace_back(k, e.value);
  }
  return ex;
}

ExperimentConfig parse_experiment(std::string_view text) {
  return make_experiment(Config::parse(text, experiment_keys()));
}

LemmaSuiteConfig make_lemma_suite(const Config& cfg) {
  LemmaSuiteConfig lc;
  const std::string lemmas = cfg.has("lemmas") ? cfg.get_string("lemmas") : "all";
  if (lemmas == "all") {
    lc.lemmas = diagnostics::all_lemmas();
  } else {
    for (auto item : split(lemmas, ',')) lc.lemmas.push_back(diagnostics::parse_lemma_id(item));
  }
  if (cfg.has("control")) lc.control = diagnostics::parse_control(cfg.get_string("control"));
  if (cfg.has("paths")) lc.paths = cfg.get_int("paths");
  if (cfg.has("length")) lc.length = cfg.get_int("length");
  if (cfg.has("branches")) lc.options.branches = cfg.get_int("branches");
  if (cfg.has("seed")) lc.seed = cfg.get_uint("seed");
  if (cfg.has("tol_z")) lc.options.tol_z = cfg.get_double("tol_z");
  if (cfg.has("convergence_tol")) lc.options.convergence_tol = cfg.get_double("convergence_tol");
  if (cfg.has("plateau_tol")) lc.options.plateau_tol = cfg.get_double("plateau_tol");
  if (cfg.has("output")) lc.output = cfg.get_string("output");
  lc.echo = {{"lemmas", lemmas},
             {"control", std::string(diagnostics::to_string(lc.control))},
             {"paths", std::to_string(lc.paths)},
             {"length", std::to_string(lc.length)},
             {"branches", std::to_string(lc.options.branches)},
             {"seed", std::to_string(lc.seed)},
             {"tol_z", format_double(lc.options.tol_z)},
             {"convergence_tol", format_double(lc.options.convergence_tol)},
             {"plateau_tol", format_double(lc.options.plateau_tol)}};
  return lc;
}

LemmaSuiteConfig parse_lemma_suite(std::string_view text) {
  return make_lemma_suite(Config::parse(text, lemma_keys()));
}

ProblemInstance build_instance(const ProblemSpec& spec) {
  ProblemInstance inst;
  if (spec.file) {
    std::ifstream in(*spec.file);
    if (!in) throw ConfigError("cannot open instance file '" + *spec.file + "'");
    inst = read_instance(in);
  } else {
    inst = generate(spec.kind, spec.m, spec.n, spec.seed, spec.lambda);
  }
  if (!inst.reference && inst.kind != ProblemKind::least_absolute) {
    inst.reference = full_batch_reference(inst, spec.reference_steps);
  }
  if (!inst.reference) throw ConfigError("instance has no reference point");
  return inst;
}

}  // namespace samom::harness
