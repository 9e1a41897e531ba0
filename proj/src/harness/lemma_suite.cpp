#include <cstdio>
#include <string>

#include "samom/errors.hpp"
#include "samom/harness.hpp"

namespace samom::harness {

namespace {

std::string pct(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * x);
  return buf;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

}  // namespace

std::string summary_line(const diagnostics::CheckReport& r) {
  std::string s = r.lemma_id;
  if (r.control != diagnostics::Control::none) {
    s += " [control=" + std::string(diagnostics::to_string(r.control)) + "]";
  }
  s += r.pass ? ": PASS" : ": FAIL";
  if (!r.lyapunov_defined) {
    s += "; Lyapunov series undefined (momentum >= 1)";
  } else {
    s += "; supermartingale violations " + std::to_string(r.supermartingale_violations) + "/" +
         std::to_string(r.checks) + " (" + pct(r.violation_rate()) + "), worst z " +
         num(r.worst_z);
  }
  s += "; converged " + pct(r.converged_fraction) + " of " + std::to_string(r.paths_tested) +
       " paths";
  if (r.summability_asserted) {
    s += std::string("; eta partial sums ") + (r.eta_partial_sum_plateaued ? "plateau" : "grow");
  }
  if (r.z_asserted) s += "; max tail z " + num(r.z_tail_max);
  return s;
}

LemmaSuiteResult run_lemma_suite(const LemmaSuiteConfig& cfg) {
  if (cfg.paths < 1) throw ArgumentError("lemma suite: paths must be >= 1");
  LemmaSuiteResult res;
  for (diagnostics::LemmaId id : cfg.lemmas) {
    if (cfg.control == diagnostics::Control::theta && id == diagnostics::LemmaId::prox_weighted) {
      continue;  // no momentum to perturb
    }
    diagnostics::LemmaParams params = diagnostics::default_params(id);
    params.control = cfg.control;
    const diagnostics::LemmaModel model(params, cfg.length);
    res.reports.push_back(diagnostics::check_lemma(model, cfg.seed, cfg.paths, cfg.options));
    res.all_pass = res.all_pass && res.reports.back().pass;
  }
  if (res.reports.empty()) throw ConfigError("lemma suite: nothing to run for this control");

  std::vector<std::pair<std::string, std::string>> meta = cfg.echo;
  meta.emplace_back("rng", std::string(Rng::kName));
  meta.emplace_back("max_violation_rate", format_double(cfg.options.max_violation_rate));
  meta.emplace_back("min_converged_fraction", format_double(cfg.options.min_converged_fraction));
  const std::string head = metadata_block(meta);

  std::string summary = head;
  summary +=
      "lemma_id,control,paths,checks,violations,violation_rate,worst_z,converged_fraction,"
      "summability_asserted,eta_plateaued,z_tail_max,lyapunov_defined,pass\n";
  std::string detail = head;
  detail += "lemma_id,path,step,V_n,estimate,z_score\n";
  for (const auto& r : res.reports) {
    summary += r.lemma_id + ',' + std::string(diagnostics::to_string(r.control)) + ',' +
               std::to_string(r.paths_tested) + ',' + std::to_string(r.checks) + ',' +
               std::to_string(r.supermartingale_violations) + ',' +
               format_double(r.violation_rate()) + ',' + format_double(r.worst_z) + ',' +
               format_double(r.converged_fraction) + ',' +
               (r.summability_asserted ? "1" : "0") + ',' +
               (r.eta_partial_sum_plateaued ? "1" : "0") + ',' + format_double(r.z_tail_max) +
               ',' + (r.lyapunov_defined ? "1" : "0") + ',' + (r.pass ? "1" : "0") + '\n';
    for (const auto& d : r.details) {
      detail += r.lemma_id + ',' + std::to_string(d.path) + ',' + std::to_string(d.step) + ',' +
                format_double(d.V_n) + ',' + format_double(d.estimate) + ',' +
                format_double(d.z_score) + '\n';
    }
  }
  res.files.emplace_back("lemma_summary.csv", std::move(summary));
  res.files.emplace_back("lemma_detail.csv", std::move(detail));
  return res;
}

}  // namespace samom::harness
