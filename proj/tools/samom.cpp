// samom: command-line front end for instance generation, experiments, the
// lemma suite, momentum-algebra tables and plot data.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <span>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "samom/errors.hpp"
#include "samom/harness.hpp"
#include "samom/kernels.hpp"

namespace fs = std::filesystem;
using namespace samom;
using namespace samom::harness;

namespace {

struct Globals {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

Config load_config(const Globals& g, std::span<const std::string_view> keys, bool required) {
  if (g.config.empty()) {
    if (required) throw ConfigError("this subcommand needs --config PATH");
    return Config::parse("", keys);
  }
  return Config::load(g.config, keys);
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << content;
}

int cmd_gen(const Globals& g) {
  Config cfg = load_config(g, experiment_keys(), true);
  expand_preset(cfg);
  if (g.seed) cfg.set("problem.seed", std::to_string(*g.seed));
  const ProblemSpec spec = make_problem_spec(cfg);
  const ProblemInstance inst = build_instance(spec);
  const fs::path dir = !g.out.empty() ? fs::path(g.out)
                                      : fs::path(cfg.has("output") ? cfg.get_string("output") : "out");
  std::ostringstream ss;
  write_instance(ss, inst);
  write_file(dir / "instance.txt", ss.str());
  std::cout << "wrote " << (dir / "instance.txt").string() << " (" << to_string(inst.kind) << ", m = "
            << inst.m << ", n = " << inst.n << ", seed = " << inst.seed << ")\n";
  return kExitOk;
}

int cmd_run(const Globals& g) {
  Config cfg = load_config(g, experiment_keys(), true);
  if (g.seed) cfg.set("seeds", std::to_string(*g.seed));
  const ExperimentConfig ex = make_experiment(std::move(cfg));
  const ResultBundle bundle = run_experiment(ex);
  const fs::path dir = g.out.empty() ? fs::path(ex.output) : fs::path(g.out);
  write_bundle(bundle, dir);

  std::size_t idx = 0;
  for (const auto& mom : ex.momenta) {
    std::vector<double> ratios;
    int diverged = 0;
    for (std::size_t s = 0; s < ex.seeds.size(); ++s, ++idx) {
      const auto& t = bundle.runs[idx].trace;
      diverged += t.diverged ? 1 : 0;
      const double fin = t.checkpoints.empty() ? t.initial_dist : t.checkpoints.back().dist;
      ratios.push_back(t.initial_dist > 0.0 ? fin / t.initial_dist : 0.0);
    }
    std::sort(ratios.begin(), ratios.end());
    const double med = ratios.size() % 2 ? ratios[ratios.size() / 2]
                                         : 0.5 * (ratios[ratios.size() / 2 - 1] + ratios[ratios.size() / 2]);
    std::printf("%-28s median final/initial dist %.4g, diverged %d/%zu\n", describe(mom).c_str(),
                med, diverged, ex.seeds.size());
  }
  std::printf("bundle written to %s (%.2f s)\n", dir.string().c_str(), bundle.wall_seconds);
  return experiment_exit_code(ex, bundle);
}

int cmd_lemma(const Globals& g) {
  Config cfg = load_config(g, lemma_keys(), false);
  if (g.seed) cfg.set("seed", std::to_string(*g.seed));
  const LemmaSuiteConfig lc = make_lemma_suite(cfg);
  const LemmaSuiteResult res = run_lemma_suite(lc);
  const fs::path dir = g.out.empty() ? fs::path(lc.output) : fs::path(g.out);
  for (const auto& [name, content] : res.files) write_file(dir / name, content);
  for (const auto& r : res.reports) std::cout << summary_line(r) << "\n";
  return res.all_pass ? kExitOk : kExitCheckFailed;
}

int cmd_algebra(const Globals& g) {
  Config cfg = load_config(g, algebra_keys(), false);
  cfg.set_default("mom.theta", "0.5");
  const std::string table = algebra_table(cfg);
  std::cout << table;
  if (!g.out.empty()) write_file(fs::path(g.out) / "algebra.csv", table);
  return kExitOk;
}

int cmd_plotdata(const Globals& g, const std::string& dir_arg) {
  const std::string dir = !dir_arg.empty() ? dir_arg : (!g.out.empty() ? g.out : "out");
  std::cout << plotdata(fs::path(dir));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic approximation with Nesterov momentum: solvers, diagnostics, experiments"};
  app.fallthrough();
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config, "configuration file (key = value lines)");
  app.add_option("--out", g.out, "output directory");
  auto* seed_opt = app.add_option("--seed", seed, "override the seed (gen: problem.seed, run: seeds, lemma: seed)");

  auto* gen = app.add_subcommand("gen", "generate a problem instance and write instance.txt");
  auto* run = app.add_subcommand("run", "run an experiment and write its result bundle");
  auto* lemma = app.add_subcommand("lemma", "run the synthetic supermartingale checks");
  auto* algebra = app.add_subcommand("algebra", "print companion-matrix products and tail coefficients");
  auto* plot = app.add_subcommand("plotdata", "print log-log columns from a result bundle");
  std::string plot_dir;
  plot->add_option("dir", plot_dir, "bundle directory (default: --out)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfigError;
  }
  if (seed_opt->count() > 0) g.seed = seed;

  try {
    if (*gen) return cmd_gen(g);
    if (*run) return cmd_run(g);
    if (*lemma) return cmd_lemma(g);
    if (*algebra) return cmd_algebra(g);
    if (*plot) return cmd_plotdata(g, plot_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  return kExitConfigError;
}
