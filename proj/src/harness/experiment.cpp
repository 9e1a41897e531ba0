#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "samom/errors.hpp"
#include "samom/harness.hpp"

namespace samom::harness {

std::string metadata_block(std::span<const std::pair<std::string, std::string>> entries) {
  std::string out;
  for (const auto& [k, v] : entries) out += "# " + k + " = " + v + "\n";
  return out;
}

const std::string* ResultBundle::file(std::string_view name) const {
  for (const auto& [n, content] : files) {
    if (n == name) return &content;
  }
  return nullptr;
}

namespace {

std::string momentum_label(const MomentumSchedule& m) {
  if (m.family == MomentumSchedule::Family::constant) return "theta" + format_short(m.c);
  return "schedule";
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

double final_dist(const SolverTrace& t) {
  return t.checkpoints.empty() ? t.initial_dist : t.checkpoints.back().dist;
}

double min_dist(const SolverTrace& t) {
  double m = t.initial_dist;
  for (const auto& cp : t.checkpoints) m = std::min(m, cp.dist);
  return m;
}

std::string trace_csv(const ExperimentConfig& cfg, const RunRecord& run) {
  std::vector<std::pair<std::string, std::string>> meta = cfg.echo;
  meta.emplace_back("run.momentum", run.momentum);
  meta.emplace_back("run.seed", std::to_string(run.seed));
  for (const auto& kv : run.trace.metadata) meta.emplace_back("trace." + kv.first, kv.second);
  meta.emplace_back("trace.initial_dist", format_double(run.trace.initial_dist));
  meta.emplace_back("trace.max_iterate_norm", format_double(run.trace.max_iterate_norm));
  meta.emplace_back("trace.diverged", run.trace.diverged ? "true" : "false");
  if (run.trace.diverged) {
    meta.emplace_back("trace.divergence_step", std::to_string(run.trace.divergence_step));
    meta.emplace_back("trace.last_finite_step", std::to_string(run.trace.last_finite_step));
  }
  std::string out = metadata_block(meta);
  out += "k,dist,obj_gap,increment,alpha,theta\n";
  for (const auto& cp : run.trace.checkpoints) {
    out += std::to_string(cp.k) + ',' + format_double(cp.dist) + ',' + format_double(cp.obj_gap) +
           ',' + format_double(cp.increment) + ',' + format_double(cp.alpha) + ',' +
           format_double(cp.theta) + '\n';
  }
  return out;
}

std::string summary_csv(const ExperimentConfig& cfg, std::span<const RunRecord* const> runs) {
  std::vector<double> finals;
  std::vector<double> ratios;
  for (const RunRecord* r : runs) {
    finals.push_back(final_dist(r->trace));
    if (r->trace.initial_dist > 0.0) ratios.push_back(final_dist(r->trace) / r->trace.initial_dist);
  }
  std::vector<std::pair<std::string, std::string>> meta = cfg.echo;
  meta.emplace_back("run.momentum", runs.front()->momentum);
  meta.emplace_back("rng", std::string(Rng::kName));
  meta.emplace_back("median_final_dist", format_double(median(finals)));
  meta.emplace_back("median_final_over_initial", format_double(median(ratios)));
  std::string out = metadata_block(meta);
  out += "seed,final_dist,min_dist,diverged\n";
  for (const RunRecord* r : runs) {
    out += std::to_string(r->seed) + ',' + format_double(final_dist(r->trace)) + ',' +
           format_double(min_dist(r->trace)) + ',' + (r->trace.diverged ? "1" : "0") + '\n';
  }
  return out;
}

}  // namespace

ResultBundle run_experiment(const ExperimentConfig& cfg) {
  const ProblemInstance inst = build_instance(cfg.problem);
  return run_experiment(cfg, inst);
}

ResultBundle run_experiment(const ExperimentConfig& cfg, const ProblemInstance& inst) {
  const auto start = std::chrono::steady_clock::now();
  ResultBundle bundle;
  for (const auto& mom : cfg.momenta) {
    for (std::uint64_t seed : cfg.seeds) {
      SolverConfig sc = cfg.solver;
      sc.momentum = mom;
      sc.seed = seed;
      RunRecord rec;
      rec.theta_label = mom.family == MomentumSchedule::Family::constant ? mom.c : 0.0;
      rec.momentum = describe(mom);
      rec.seed = seed;
      rec.trace = run(sc, inst);
      bundle.any_diverged = bundle.any_diverged || rec.trace.diverged;
      bundle.runs.push_back(std::move(rec));
    }
  }

  // Files are assembled after every run finished, in (momentum, seed) order.
  std::size_t idx = 0;
  for (const auto& mom : cfg.momenta) {
    const std::string label = momentum_label(mom);
    std::vector<const RunRecord*> group;
    for (std::size_t s = 0; s < cfg.seeds.size(); ++s, ++idx) {
      const RunRecord& rec = bundle.runs[idx];
      group.push_back(&rec);
      bundle.files.emplace_back("trace_" + label + "_seed" + std::to_string(rec.seed) + ".csv",
                                trace_csv(cfg, rec));
    }
    bundle.files.emplace_back("summary_" + label + ".csv", summary_csv(cfg, group));
  }
  bundle.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return bundle;
}

void write_bundle(const ResultBundle& bundle, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
  auto write = [&](const std::string& name, const std::string& content) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + (dir / name).string() + "'");
    out << content;
  };
  for (const auto& [name, content] : bundle.files) write(name, content);
  std::ostringstream t;
  t.precision(6);
  t << "wall_seconds = " << bundle.wall_seconds << "\n";
  write("timing.txt", t.str());
}

int experiment_exit_code(const ExperimentConfig& cfg, const ResultBundle& bundle) {
  if (bundle.any_diverged && !cfg.is_sweep()) return kExitDiverged;
  return kExitOk;
}

}  // namespace samom::harness
