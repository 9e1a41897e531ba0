#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "samom/diagnostics.hpp"
#include "samom/problems.hpp"
#include "samom/solvers.hpp"

namespace samom::harness {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitDiverged = 3;

// Flat `key = value` configuration. `#` starts a comment; blank lines are
// ignored. Keys are validated against an allowed set; errors name the line.
class Config {
 public:
  struct Entry {
    std::string value;
    int line = 0;  // 0 for values set programmatically
  };

  static Config parse(std::string_view text, std::span<const std::string_view> allowed_keys);
  static Config load(const std::filesystem::path& path,
                     std::span<const std::string_view> allowed_keys);

  bool has(std::string_view key) const;
  void set(std::string key, std::string value);
  // Sets the key only when it is absent.
  void set_default(std::string key, std::string value);

  std::string get_string(std::string_view key) const;
  double get_double(std::string_view key) const;
  std::int64_t get_int(std::string_view key) const;
  std::uint64_t get_uint(std::string_view key) const;
  // Comma-separated doubles.
  std::vector<double> get_double_list(std::string_view key) const;
  // Comma-separated integers or ranges "a..b".
  std::vector<std::uint64_t> get_uint_list(std::string_view key) const;

  const std::map<std::string, Entry, std::less<>>& entries() const { return entries_; }

 private:
  const Entry& require(std::string_view key) const;
  [[noreturn]] void bad_value(std::string_view key, std::string_view what) const;

  std::map<std::string, Entry, std::less<>> entries_;
};

// Parses "1/16", "8/9" or a plain decimal. Throws ConfigError.
double parse_number(std::string_view text);

std::span<const std::string_view> experiment_keys();
std::span<const std::string_view> lemma_keys();
std::span<const std::string_view> algebra_keys();
std::span<const std::string_view> preset_names();

// Expands `preset` into explicit keys; keys already present win.
// Throws ConfigError for an unknown preset.
void expand_preset(Config& cfg);

// Momentum schedules from the mom.* keys; a constant family with a list of
// thetas yields one schedule per value.
std::vector<MomentumSchedule> make_momenta(const Config& cfg);

struct ProblemSpec {
  ProblemKind kind = ProblemKind::least_squares;
  std::size_t m = 0;
  std::size_t n = 0;
  std::uint64_t seed = 10;
  double lambda = 0.0;
  std::optional<std::string> file;
  std::int64_t reference_steps = 100000;
};

struct ExperimentConfig {
  ProblemSpec problem;
  SolverConfig solver;              // momentum is replaced per sweep value
  std::vector<MomentumSchedule> momenta;
  std::vector<std::uint64_t> seeds;
  std::string output = "out";
  std::vector<std::pair<std::string, std::string>> echo;  // expanded keys

  bool is_sweep() const { return momenta.size() > 1 || seeds.size() > 1; }
};

// Validates and types a parsed experiment configuration (after preset
// expansion). Throws ConfigError naming the offending key.
ExperimentConfig make_experiment(Config cfg);
ExperimentConfig parse_experiment(std::string_view text);
ProblemSpec make_problem_spec(const Config& cfg);

// Generates (or loads) the instance; for lasso computes the full-batch
// reference when the instance has none.
ProblemInstance build_instance(const ProblemSpec& spec);

struct RunRecord {
  double theta_label = 0.0;
  std::string momentum;
  std::uint64_t seed = 0;
  SolverTrace trace;
};

// File name -> content. Bitwise identical for identical configurations.
struct ResultBundle {
  std::vector<std::pair<std::string, std::string>> files;
  std::vector<RunRecord> runs;
  double wall_seconds = 0.0;
  bool any_diverged = false;

  const std::string* file(std::string_view name) const;
};

ResultBundle run_experiment(const ExperimentConfig& cfg);
ResultBundle run_experiment(const ExperimentConfig& cfg, const ProblemInstance& inst);
// Writes every file plus timing.txt (wall time, kept out of the bundle).
void write_bundle(const ResultBundle& bundle, const std::filesystem::path& dir);

// Exit code for a finished experiment: divergence only fails a single run.
int experiment_exit_code(const ExperimentConfig& cfg, const ResultBundle& bundle);

struct LemmaSuiteConfig {
  std::vector<diagnostics::LemmaId> lemmas;
  diagnostics::Control control = diagnostics::Control::none;
  std::int64_t paths = 200;
  std::int64_t length = 2000;
  std::uint64_t seed = 1;
  diagnostics::CheckOptions options;
  std::string output = "out";
  std::vector<std::pair<std::string, std::string>> echo;
};

LemmaSuiteConfig make_lemma_suite(const Config& cfg);
LemmaSuiteConfig parse_lemma_suite(std::string_view text);

struct LemmaSuiteResult {
  std::vector<diagnostics::CheckReport> reports;
  std::vector<std::pair<std::string, std::string>> files;
  bool all_pass = true;
};

// Throws ArgumentError if paths < 1.
LemmaSuiteResult run_lemma_suite(const LemmaSuiteConfig& cfg);
// One human-readable line per report.
std::string summary_line(const diagnostics::CheckReport& report);

// Momentum-algebra table for the configured schedule:
// n,theta,d,c,dist_to_fixed_set,t_n,step_norm,cauchy_bound.
std::string algebra_table(const Config& cfg);

// Columns log10_k followed by one log10(median dist) column per momentum
// value found in the bundle directory; zero distances map to -16.
// Throws ConfigError if the directory has no trace files.
std::string plotdata(const std::filesystem::path& dir);
std::string plotdata(const ResultBundle& bundle);

// Metadata block: one "# key = value" line each.
std::string metadata_block(std::span<const std::pair<std::string, std::string>> entries);

}  // namespace samom::harness
