#include "samom/problems.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "samom/errors.hpp"
#include "samom/kernels.hpp"

namespace samom {

std::string_view to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::least_squares: return "least_squares";
    case ProblemKind::least_absolute: return "least_absolute";
    case ProblemKind::lasso: return "lasso";
  }
  return "unknown";
}

ProblemKind parse_problem_kind(std::string_view name) {
  if (name == "least_squares") return ProblemKind::least_squares;
  if (name == "least_absolute") return ProblemKind::least_absolute;
  if (name == "lasso") return ProblemKind::lasso;
  throw ConfigError("unknown problem kind '" + std::string(name) +
                    "' (expected least_squares, least_absolute or lasso)");
}

double ProblemInstance::residual(std::span<const double> x, std::size_t i) const {
  return kernels::dot(row(i), x) - b[i];
}

ProblemInstance generate(ProblemKind kind, std::size_t m, std::size_t n, std::uint64_t seed,
                         double lambda) {
  if (m == 0 || n == 0) throw ArgumentError("generate: m and n must be >= 1");
  if (!(lambda >= 0.0)) throw ArgumentError("generate: lambda must be >= 0");

  ProblemInstance inst;
  inst.kind = kind;
  inst.m = m;
  inst.n = n;
  inst.seed = seed;
  inst.lambda = kind == ProblemKind::lasso ? lambda : 0.0;

  Rng rng(seed);
  std::vector<double> v(n);
  for (double& e : v) e = rng.uniform();

  inst.a.resize(m * n);
  for (double& e : inst.a) e = rng.normal();

  if (kind != ProblemKind::lasso) {
    // a_i = (I + v v^T) g_i = g_i + (g_i . v) v, since I + v v^T is symmetric.
    for (std::size_t i = 0; i < m; ++i) {
      std::span<double> row{inst.a.data() + i * n, n};
      const double gv = kernels::dot(row, v);
      kernels::axpy(gv, v, row);
    }
  }

  std::vector<double> x0(n);
  for (double& e : x0) e = rng.normal();

  inst.b.resize(m);
  if (kind == ProblemKind::lasso) {
    for (double& e : inst.b) e = rng.normal();
  } else {
    for (std::size_t i = 0; i < m; ++i) inst.b[i] = kernels::dot(inst.row(i), x0);
    inst.reference = std::move(x0);
  }
  return inst;
}

std::size_t sample_index(const ProblemInstance& inst, Rng& rng) {
  return static_cast<std::size_t>(rng.below(inst.m));
}

namespace {

void check_index(const ProblemInstance& inst, std::size_t i) {
  if (i >= inst.m) {
    throw ArgumentError("sample index " + std::to_string(i) + " out of range [0, " +
                        std::to_string(inst.m) + ")");
  }
}

void check_dim(const ProblemInstance& inst, std::size_t size) {
  if (size != inst.n) {
    throw ArgumentError("vector of dimension " + std::to_string(size) +
                        " does not match instance dimension " + std::to_string(inst.n));
  }
}

double sign(double r) { return r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0); }

bool squared_loss(ProblemKind kind) { return kind != ProblemKind::least_absolute; }

}  // namespace

double subgrad_into(const ProblemInstance& inst, std::span<const double> x, std::size_t i,
                    std::span<double> g) {
  check_index(inst, i);
  check_dim(inst, x.size());
  check_dim(inst, g.size());
  const auto a = inst.row(i);
  const double r = kernels::dot(a, x) - inst.b[i];
  const double scale = squared_loss(inst.kind) ? 2.0 * r : sign(r);
  for (std::size_t j = 0; j < inst.n; ++j) g[j] = scale * a[j];
  return squared_loss(inst.kind) ? r * r : std::abs(r);
}

SampleOracleResult subgrad(const ProblemInstance& inst, std::span<const double> x,
                           std::size_t i) {
  SampleOracleResult out;
  out.subgradient.resize(inst.n);
  out.value = subgrad_into(inst, x, i, out.subgradient);
  out.index = i;
  return out;
}

double sample_value(const ProblemInstance& inst, std::span<const double> x, std::size_t i) {
  check_index(inst, i);
  check_dim(inst, x.size());
  const double r = inst.residual(x, i);
  return squared_loss(inst.kind) ? r * r : std::abs(r);
}

void prox_sample_into(const ProblemInstance& inst, std::span<const double> x, std::size_t i,
                      double alpha, std::span<double> out) {
  if (!(alpha > 0.0)) throw ArgumentError("prox_sample: alpha must be > 0");
  check_index(inst, i);
  check_dim(inst, x.size());
  check_dim(inst, out.size());
  const auto a = inst.row(i);
  const double q = kernels::squared_norm(a);
  if (out.data() != x.data()) std::copy(x.begin(), x.end(), out.begin());
  if (q == 0.0) return;
  const double r = kernels::dot(a, x) - inst.b[i];
  double gamma = 0.0;
  if (squared_loss(inst.kind)) {
    gamma = 2.0 * alpha * r / (1.0 + 2.0 * alpha * q);
  } else {
    gamma = sign(r) * std::min(alpha, std::abs(r) / q);
  }
  kernels::axpy(-gamma, a, out);
}

std::vector<double> prox_sample(const ProblemInstance& inst, std::span<const double> x,
                                std::size_t i, double alpha) {
  std::vector<double> out(x.size());
  prox_sample_into(inst, x, i, alpha, out);
  return out;
}

void prox_l1_inplace(std::span<double> x, double tau) {
  if (!(tau >= 0.0)) throw ArgumentError("prox_l1: tau must be >= 0");
  for (double& e : x) {
    const double mag = std::abs(e) - tau;
    e = mag > 0.0 ? std::copysign(mag, e) : 0.0;
  }
}

std::vector<double> prox_l1(std::span<const double> x, double tau) {
  std::vector<double> out(x.begin(), x.end());
  prox_l1_inplace(out, tau);
  return out;
}

ConstraintSet ConstraintSet::whole_space() { return ConstraintSet{}; }

ConstraintSet ConstraintSet::ball(std::vector<double> center, double radius) {
  if (!(radius > 0.0)) throw ConfigError("ball constraint radius must be > 0");
  ConstraintSet c;
  c.kind_ = Kind::ball;
  c.center_ = std::move(center);
  c.radius_ = radius;
  return c;
}

ConstraintSet ConstraintSet::box(std::vector<double> lo, std::vector<double> hi) {
  if (lo.size() != hi.size()) throw ConfigError("box constraint bounds differ in size");
  for (std::size_t j = 0; j < lo.size(); ++j) {
    if (!(lo[j] <= hi[j])) throw ConfigError("box constraint has lo > hi");
  }
  ConstraintSet c;
  c.kind_ = Kind::box;
  c.lo_ = std::move(lo);
  c.hi_ = std::move(hi);
  return c;
}

ConstraintSet ConstraintSet::box(double lo, double hi, std::size_t n) {
  return box(std::vector<double>(n, lo), std::vector<double>(n, hi));
}

void ConstraintSet::project_inplace(std::span<double> x) const {
  switch (kind_) {
    case Kind::whole_space: return;
    case Kind::ball: {
      if (center_.size() != x.size()) throw ArgumentError("ball center dimension mismatch");
      const double dist = kernels::distance(x, center_);
      if (dist <= radius_) return;
      double scale = radius_ / dist;
      std::vector<double> y(x.size());
      // Shrink the scale an ulp at a time until the rounded result is inside,
      // so that projecting a projected point is the identity.
      for (int tries = 0; tries < 8; ++tries) {
        for (std::size_t j = 0; j < x.size(); ++j) y[j] = center_[j] + scale * (x[j] - center_[j]);
        if (kernels::distance(y, center_) <= radius_) break;
        scale = std::nextafter(scale, 0.0);
      }
      std::copy(y.begin(), y.end(), x.begin());
      return;
    }
    case Kind::box:
      if (lo_.size() != x.size()) throw ArgumentError("box bounds dimension mismatch");
      for (std::size_t j = 0; j < x.size(); ++j) x[j] = std::clamp(x[j], lo_[j], hi_[j]);
      return;
  }
}

bool ConstraintSet::contains(std::span<const double> x, double slack) const {
  switch (kind_) {
    case Kind::whole_space: return true;
    case Kind::ball: return kernels::distance(x, center_) <= radius_ + slack;
    case Kind::box:
      for (std::size_t j = 0; j < x.size(); ++j) {
        if (x[j] < lo_[j] - slack || x[j] > hi_[j] + slack) return false;
      }
      return true;
  }
  return false;
}

std::string ConstraintSet::describe() const {
  switch (kind_) {
    case Kind::whole_space: return "none";
    case Kind::ball: return "ball(radius=" + format_short(radius_) + ")";
    case Kind::box: {
      const bool uniform =
          std::all_of(lo_.begin(), lo_.end(), [&](double v) { return v == lo_.front(); }) &&
          std::all_of(hi_.begin(), hi_.end(), [&](double v) { return v == hi_.front(); });
      if (uniform && !lo_.empty()) {
        return "box(lo=" + format_short(lo_.front()) + ",hi=" + format_short(hi_.front()) + ")";
      }
      return "box(per-coordinate)";
    }
  }
  return "unknown";
}

std::vector<double> project(std::span<const double> x, const ConstraintSet& c) {
  std::vector<double> out(x.begin(), x.end());
  c.project_inplace(out);
  return out;
}

double objective(const ProblemInstance& inst, std::span<const double> x) {
  check_dim(inst, x.size());
  double total = 0.0;
  for (std::size_t i = 0; i < inst.m; ++i) {
    const double r = inst.residual(x, i);
    total += squared_loss(inst.kind) ? r * r : std::abs(r);
  }
  if (inst.kind != ProblemKind::lasso) return total;
  double l1 = 0.0;
  for (double e : x) l1 += std::abs(e);
  return total / static_cast<double>(inst.m) + inst.lambda * l1;
}

std::vector<double> full_batch_reference(const ProblemInstance& inst, std::int64_t steps) {
  if (inst.kind == ProblemKind::least_absolute) {
    throw ArgumentError("full_batch_reference: not defined for least_absolute instances");
  }
  if (steps < 0) throw ArgumentError("full_batch_reference: steps must be >= 0");
  const std::size_t n = inst.n;
  const double inv_m = 1.0 / static_cast<double>(inst.m);

  // Gram matrix H = A^T A / m and c = A^T b / m, accumulated row by row.
  std::vector<double> h(n * n, 0.0);
  std::vector<double> c(n, 0.0);
  for (std::size_t i = 0; i < inst.m; ++i) {
    const auto a = inst.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      kernels::axpy(a[j] * inv_m, a, std::span<double>(h.data() + j * n, n));
    }
    kernels::axpy(inst.b[i] * inv_m, a, c);
  }

  double gershgorin = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double row_sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) row_sum += std::abs(h[j * n + k]);
    gershgorin = std::max(gershgorin, row_sum);
  }
  if (gershgorin == 0.0) return std::vector<double>(n, 0.0);
  const double lipschitz = 2.0 * gershgorin;
  const double step = 1.0 / lipschitz;
  const double lambda = inst.kind == ProblemKind::lasso ? inst.lambda : 0.0;

  std::vector<double> x(n, 0.0);
  std::vector<double> next(n);
  for (std::int64_t it = 0; it < steps; ++it) {
    for (std::size_t j = 0; j < n; ++j) {
      const double grad = 2.0 * (kernels::dot(std::span<const double>(h.data() + j * n, n), x) - c[j]);
      next[j] = x[j] - step * grad;
    }
    prox_l1_inplace(next, step * lambda);
    x.swap(next);
  }
  return x;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string format_short(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v + 0.0);
  return std::string(buf, res.ptr);
}

namespace {

double parse_double(std::string_view tok, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
    throw ConfigError("instance line " + std::to_string(line) + ": bad number '" +
                      std::string(tok) + "'");
  }
  return v;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

}  // namespace

void write_instance(std::ostream& os, const ProblemInstance& inst) {
  os << to_string(inst.kind) << ' ' << inst.m << ' ' << inst.n << ' ' << inst.seed << ' '
     << format_double(inst.lambda) << '\n';
  for (std::size_t i = 0; i < inst.m; ++i) {
    const auto a = inst.row(i);
    for (std::size_t j = 0; j < inst.n; ++j) os << format_double(a[j]) << ' ';
    os << format_double(inst.b[i]) << '\n';
  }
  if (!inst.reference) {
    os << "none\n";
    return;
  }
  for (std::size_t j = 0; j < inst.n; ++j) {
    if (j) os << ' ';
    os << format_double((*inst.reference)[j]);
  }
  os << '\n';
}

ProblemInstance read_instance(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("instance: empty input");
  const auto header = split_ws(line);
  if (header.size() != 5) throw ConfigError("instance line 1: expected 'kind m n seed lambda'");

  ProblemInstance inst;
  inst.kind = parse_problem_kind(header[0]);
  try {
    inst.m = std::stoull(header[1]);
    inst.n = std::stoull(header[2]);
    inst.seed = std::stoull(header[3]);
  } catch (const std::exception&) {
    throw ConfigError("instance line 1: bad integer field");
  }
  inst.lambda = parse_double(header[4], 1);
  if (inst.m == 0 || inst.n == 0) throw ConfigError("instance line 1: zero dimension");

  inst.a.resize(inst.m * inst.n);
  inst.b.resize(inst.m);
  for (std::size_t i = 0; i < inst.m; ++i) {
    if (!std::getline(is, line)) throw ConfigError("instance: missing row " + std::to_string(i + 1));
    const auto toks = split_ws(line);
    if (toks.size() != inst.n + 1) {
      throw ConfigError("instance line " + std::to_string(i + 2) + ": expected " +
                        std::to_string(inst.n + 1) + " values");
    }
    for (std::size_t j = 0; j < inst.n; ++j) inst.a[i * inst.n + j] = parse_double(toks[j], i + 2);
    inst.b[i] = parse_double(toks[inst.n], i + 2);
  }
  if (!std::getline(is, line)) throw ConfigError("instance: missing reference line");
  const auto toks = split_ws(line);
  if (toks.size() == 1 && toks[0] == "none") return inst;
  if (toks.size() != inst.n) throw ConfigError("instance: reference line has wrong length");
  std::vector<double> ref(inst.n);
  for (std::size_t j = 0; j < inst.n; ++j) ref[j] = parse_double(toks[j], inst.m + 2);
  inst.reference = std::move(ref);
  return inst;
}

}  // namespace samom
