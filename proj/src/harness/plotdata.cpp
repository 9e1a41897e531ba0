#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "samom/errors.hpp"
#include "samom/harness.hpp"
#include "samom/momentum_algebra.hpp"

namespace samom::harness {
namespace {

constexpr double kLogFloor = -16.0;

struct ParsedTrace {
  std::string group;  // text between "trace_" and "_seed"
  bool diverged = false;
  std::map<std::int64_t, double> dist;
};

ParsedTrace parse_trace(const std::string& name, const std::string& content) {
  ParsedTrace t;
  const auto seed_pos = name.rfind("_seed");
  t.group = name.substr(6, seed_pos - 6);
  std::istringstream in(content);
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.rfind("# trace.diverged = true", 0) == 0) t.diverged = true;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      throw ConfigError("malformed trace row in " + name + ": '" + line + "'");
    }
    std::int64_t k = 0;
    double d = 0.0;
    const auto r1 = std::from_chars(line.data(), line.data() + c1, k);
    const auto r2 = std::from_chars(line.data() + c1 + 1, line.data() + c2, d);
    if (r1.ec != std::errc{} || r2.ec != std::errc{}) {
      throw ConfigError("malformed trace row in " + name + ": '" + line + "'");
    }
    t.dist[k] = d;
  }
  return t;
}

bool is_trace(const std::string& name) {
  return name.rfind("trace_", 0) == 0 && name.find("_seed") != std::string::npos &&
         name.size() > 4 && name.compare(name.size() - 4, 4, ".csv") == 0;
}

// Numeric theta for "theta0.5"; groups without one sort last by name.
std::pair<double, std::string> group_order(const std::string& g) {
  if (g.rfind("theta", 0) == 0) {
    double v = 0.0;
    const auto r = std::from_chars(g.data() + 5, g.data() + g.size(), v);
    if (r.ec == std::errc{}) return {v, g};
  }
  return {std::numeric_limits<double>::infinity(), g};
}

std::string fmt_log(double x) {
  if (x == 0.0) return format_double(kLogFloor);
  if (std::isnan(x)) return "nan";
  return format_double(std::log10(x));
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

std::string build(std::span<const std::pair<std::string, std::string>> files) {
  std::vector<ParsedTrace> traces;
  for (const auto& [name, content] : files) {
    if (is_trace(name)) traces.push_back(parse_trace(name, content));
  }
  if (traces.empty()) throw ConfigError("plotdata: bundle contains no trace files");

  std::vector<std::string> groups;
  std::set<std::int64_t> ks;
  for (const auto& t : traces) {
    if (std::find(groups.begin(), groups.end(), t.group) == groups.end()) groups.push_back(t.group);
    for (const auto& [k, d] : t.dist) ks.insert(k);
  }
  std::sort(groups.begin(), groups.end(),
            [](const auto& a, const auto& b) { return group_order(a) < group_order(b); });

  std::string out = "log10_k";
  for (const auto& g : groups) {
    const auto o = group_order(g);
    out += std::isfinite(o.first) ? ",theta=" + format_short(o.first) : "," + g;
  }
  out += '\n';
  for (std::int64_t k : ks) {
    out += format_double(std::log10(static_cast<double>(k)));
    for (const auto& g : groups) {
      std::vector<double> vals;
      for (const auto& t : traces) {
        if (t.group != g) continue;
        const auto it = t.dist.find(k);
        if (it != t.dist.end()) {
          vals.push_back(it->second);
        } else if (t.diverged) {
          vals.push_back(std::numeric_limits<double>::infinity());
        }
      }
      out += ',';
      out += vals.empty() ? "nan" : fmt_log(median(vals));
    }
    out += '\n';
  }
  return out;
}

}  // namespace

std::string plotdata(const ResultBundle& bundle) { return build(bundle.files); }

std::string plotdata(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw ConfigError("plotdata: '" + dir.string() + "' is not a directory");
  }
  std::vector<std::string> names;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && is_trace(name)) names.push_back(name);
  }
  std::sort(names.begin(), names.end());
  std::vector<std::pair<std::string, std::string>> files;
  for (const auto& name : names) {
    std::ifstream in(dir / name, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    files.emplace_back(name, ss.str());
  }
  return build(files);
}

std::string algebra_table(const Config& cfg) {
  const auto momenta = make_momenta(cfg);
  if (momenta.size() != 1) throw ConfigError("algebra: mom.theta must be a single value");
  const MomentumSchedule& mom = momenta.front();
  const std::int64_t n_max = cfg.has("algebra.n") ? cfg.get_int("algebra.n") : 20;
  if (n_max < 1) throw ConfigError("algebra.n must be >= 1");

  std::vector<double> thetas;
  for (std::int64_t k = 1; k <= n_max + 1; ++k) thetas.push_back(momentum_at(mom, k));
  const auto heads = algebra::head_products(thetas, n_max + 1);
  const algebra::TailCoefficients tails(mom, n_max);

  std::vector<std::pair<std::string, std::string>> meta = {
      {"momentum", describe(mom)},
      {"n", std::to_string(n_max)},
      {"tail_horizon", std::to_string(tails.horizon())},
      {"tail_tolerance", format_double(tails.tolerance())}};
  std::string out = metadata_block(meta);
  out += "n,theta,d,c,dist_to_fixed_set,t_n,step_norm,cauchy_bound\n";
  double prod = 1.0;
  for (std::int64_t n = 1; n <= n_max; ++n) {
    const auto i = static_cast<std::size_t>(n - 1);
    prod *= thetas[i];
    const algebra::Mat2& p = heads[i];
    const auto res = algebra::fixed_point_residual({p, n, algebra::ProductState::Kind::head},
                                                   thetas[i + 1]);
    const double step = (heads[i + 1] - p).frobenius();
    out += std::to_string(n) + ',' + format_double(thetas[i]) + ',' + format_double(0.0 - p(0, 0)) +
           ',' + format_double(0.0 - p(0, 1)) + ',' + format_double(std::sqrt(res.dist2)) + ',' +
           format_double(tails.at(n)) + ',' + format_double(step) + ',' +
           format_double(2.0 * prod) + '\n';
  }
  return out;
}

}  // namespace samom::harness
