#include "samom/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "samom/errors.hpp"

namespace samom::diagnostics {

PairSeries pair_series_from_trace(const SolverTrace& trace, const ProblemInstance& inst) {
  if (!inst.reference) throw ConfigError("pair series need a reference optimum");
  if (trace.diverged) throw ArgumentError("pair series need a non-diverged trace");
  PairSeries s;
  s.r.reserve(trace.checkpoints.size());
  s.z.reserve(trace.checkpoints.size());
  s.thetas.reserve(trace.checkpoints.size());
  for (const auto& cp : trace.checkpoints) {
    s.r.push_back(cp.dist * cp.dist);
    s.z.push_back(cp.increment * cp.increment);
    s.thetas.push_back(cp.theta);
  }
  return s;
}

BetaSequence BetaSequence::none() { return {}; }

BetaSequence BetaSequence::geometric(double b0, double q) {
  if (!(b0 >= 0.0)) throw DomainError("beta amplitude must be >= 0");
  if (!(q >= 0.0 && q < 1.0)) throw DomainError("geometric beta ratio must lie in [0, 1)");
  return {Family::geometric, b0, q};
}

BetaSequence BetaSequence::power(double b0, double p) {
  if (!(b0 >= 0.0)) throw DomainError("beta amplitude must be >= 0");
  if (!(p > 1.0)) throw DomainError("power beta exponent must be > 1");
  return {Family::power, b0, p};
}

double BetaSequence::at(std::int64_t k) const {
  if (k < 1) throw ArgumentError("beta index must be >= 1");
  switch (family) {
    case Family::none: return 0.0;
    case Family::geometric: return b0 * std::pow(rate, static_cast<double>(k));
    case Family::power: return b0 * std::pow(static_cast<double>(k), -rate);
  }
  return 0.0;
}

double BetaSequence::tail(std::int64_t n) const {
  if (n < 1) throw ArgumentError("beta index must be >= 1");
  switch (family) {
    case Family::none: return 0.0;
    case Family::geometric: return b0 * std::pow(rate, static_cast<double>(n)) / (1.0 - rate);
    case Family::power: return b0 * hurwitz_zeta(rate, static_cast<double>(n));
  }
  return 0.0;
}

double hurwitz_zeta(double s, double a) {
  if (!(s > 1.0)) throw DomainError("hurwitz_zeta: s must be > 1");
  if (!(a > 0.0)) throw DomainError("hurwitz_zeta: a must be > 0");
  constexpr int kDirect = 12;
  // B_{2j} / (2j)!
  constexpr std::array<double, 6> kBernoulli = {
      1.0 / 12.0,          -1.0 / 720.0,           1.0 / 30240.0,
      -1.0 / 1209600.0,    1.0 / 47900160.0,       -691.0 / 1307674368000.0};
  double sum = 0.0;
  for (int k = 0; k < kDirect; ++k) sum += std::pow(a + k, -s);
  const double x = a + kDirect;
  sum += std::pow(x, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(x, -s);
  // Rising factorial s (s+1) ... (s+2j-2) times x^{-s-2j+1}.
  double rising = s;
  double xpow = std::pow(x, -s - 1.0);
  for (std::size_t j = 0; j < kBernoulli.size(); ++j) {
    sum += kBernoulli[j] * rising * xpow;
    rising *= (s + 2.0 * static_cast<double>(j) + 1.0) * (s + 2.0 * static_cast<double>(j) + 2.0);
    xpow /= x * x;
  }
  return sum;
}

LyapunovSeries lyapunov(std::span<const double> r, const algebra::TailCoefficients& t,
                        std::pair<double, double> phi, const BetaSequence& beta) {
  if (!(phi.first > 0.0 && phi.second > 0.0) || std::abs(phi.first + phi.second - 1.0) > 1e-12) {
    throw DomainError("phi must be positive with phi_1 + phi_2 = 1");
  }
  if (r.size() < 2) throw ArgumentError("lyapunov: need at least two values of r");
  const auto count = static_cast<std::int64_t>(r.size()) - 1;
  if (t.size() < count) {
    throw ArgumentError("lyapunov: tail coefficients cover " + std::to_string(t.size()) +
                        " indices, series needs " + std::to_string(count));
  }
  LyapunovSeries out;
  out.phi = phi;
  const double w = phi.first + phi.second;
  out.V.reserve(static_cast<std::size_t>(count));
  for (std::int64_t n = 1; n <= count; ++n) {
    const auto i = static_cast<std::size_t>(n - 1);
    const double tn = t.at(n);
    const double bt = beta.tail(n);
    out.t.push_back(tn);
    out.beta_tail.push_back(bt);
    out.V.push_back(w * ((1.0 + tn) * r[i + 1] - tn * r[i]) + 2.0 * bt);
  }
  return out;
}

LyapunovSeries lyapunov(std::span<const double> r, const algebra::TailCoefficients& t,
                        const BetaSequence& beta) {
  return lyapunov(r, t, {0.5, 0.5}, beta);
}

std::vector<double> prox_lyapunov(std::span<const double> r, std::span<const double> a,
                                  std::span<const double> eta) {
  if (r.size() != eta.size() || a.size() + 1 < r.size()) {
    throw ArgumentError("prox_lyapunov: need |eta| = |r| and |a| >= |r| - 1");
  }
  for (std::size_t k = 1; k < a.size(); ++k) {
    if (a[k] > a[k - 1]) {
      throw ArgumentError("prox_lyapunov: weights increase at index " + std::to_string(k + 1));
    }
  }
  if (!a.empty() && a.back() < 0.0) throw ArgumentError("prox_lyapunov: weights must be >= 0");
  std::vector<double> v(r.size());
  for (std::size_t n = 0; n < r.size(); ++n) v[n] = n == 0 ? r[0] : r[n] + a[n - 1] * eta[n];
  return v;
}

std::vector<double> relay(std::span<const double> thetas, std::span<const double> v, double r0) {
  if (v.empty()) return {};
  if (thetas.size() + 1 < v.size()) throw ArgumentError("relay: too few momentum values");
  std::vector<double> r(v.size());
  r[0] = r0;
  for (std::size_t n = 1; n < v.size(); ++n) {
    const double th = thetas[n - 1];
    r[n] = (1.0 - th) * r[n - 1] + th * v[n];
  }
  return r;
}

bool convergence_check(std::span<const double> x, std::size_t window, double tol) {
  if (window < 2) throw ArgumentError("convergence_check: window must be >= 2");
  if (x.size() < window) throw ArgumentError("convergence_check: sequence shorter than window");
  for (double e : x) {
    if (!std::isfinite(e)) return false;
  }
  const auto tail = x.subspan(x.size() - window);
  const auto [lo, hi] = std::minmax_element(tail.begin(), tail.end());
  return *hi - *lo < tol;
}

bool summability_check(std::span<const double> eta, double plateau_tol) {
  const std::size_t start = eta.size() / 10;
  double increase = 0.0;
  for (std::size_t k = start; k < eta.size(); ++k) increase += eta[k];
  return std::isfinite(increase) && std::abs(increase) < plateau_tol;
}

std::string_view to_string(LemmaId id) {
  switch (id) {
    case LemmaId::relay: return "relay";
    case LemmaId::delayed: return "delayed";
    case LemmaId::constant_momentum: return "constant_momentum";
    case LemmaId::delayed_perturbed: return "delayed_perturbed";
    case LemmaId::coupled: return "coupled";
    case LemmaId::prox_weighted: return "prox_weighted";
    case LemmaId::prox_coupled: return "prox_coupled";
  }
  return "unknown";
}

std::string_view to_string(Control c) {
  switch (c) {
    case Control::none: return "none";
    case Control::theta: return "theta";
    case Control::drift: return "drift";
  }
  return "unknown";
}

std::vector<LemmaId> all_lemmas() {
  return {LemmaId::relay,   LemmaId::delayed,       LemmaId::constant_momentum,
          LemmaId::delayed_perturbed, LemmaId::coupled, LemmaId::prox_weighted,
          LemmaId::prox_coupled};
}

LemmaId parse_lemma_id(std::string_view name) {
  for (LemmaId id : all_lemmas()) {
    if (name == to_string(id)) return id;
  }
  throw ConfigError("unknown lemma id '" + std::string(name) +
                    "' (expected relay, delayed, constant_momentum, delayed_perturbed, "
                    "coupled, prox_weighted, prox_coupled or all)");
}

Control parse_control(std::string_view name) {
  if (name == "none") return Control::none;
  if (name == "theta") return Control::theta;
  if (name == "drift") return Control::drift;
  throw ConfigError("unknown control '" + std::string(name) + "' (expected none, theta or drift)");
}

LemmaParams default_params(LemmaId id) {
  LemmaParams p;
  p.id = id;
  switch (id) {
    case LemmaId::relay:
      p.theta_control = 2.5;
      break;
    case LemmaId::delayed:
      p.momentum = MomentumSchedule::power(0.8, 1.0, 0.05);
      break;
    case LemmaId::constant_momentum:
      p.momentum = MomentumSchedule::constant(0.9);
      break;
    case LemmaId::delayed_perturbed:
      // t = 2/3 <= 1 keeps the doubled beta tail a valid bound.
      p.momentum = MomentumSchedule::constant(0.4);
      p.beta = BetaSequence::geometric(0.05, 0.5);
      break;
    case LemmaId::coupled:
      p.momentum = MomentumSchedule::constant(0.5);
      p.zeta = 0.1;
      p.h = 1.0;
      break;
    case LemmaId::prox_weighted:
      break;
    case LemmaId::prox_coupled:
      p.momentum = MomentumSchedule::power(0.5, 0.0, 0.1);
      p.beta = BetaSequence::power(0.05, 2.5);
      p.zeta = 0.2;
      break;
  }
  return p;
}

LemmaModel::LemmaModel(LemmaParams params, std::int64_t length)
    : params_(std::move(params)), length_(length) {
  if (length_ < 20) throw ArgumentError("path length must be >= 20");
  if (!(params_.sigma >= 0.0) || !(params_.eta0 >= 0.0)) {
    throw ConfigError("sigma and eta0 must be >= 0");
  }
  if (!(params_.sigma_z >= 0.0 && params_.sigma_z <= 1.0)) {
    throw ConfigError("sigma_z must lie in [0, 1]");
  }
  if (!(params_.zeta > 0.0 && params_.zeta < 1.0)) throw ConfigError("zeta must lie in (0, 1)");
  if (!(params_.theta_lo >= 0.0 && params_.theta_lo <= params_.theta_hi &&
        params_.theta_hi < 1.0)) {
    throw ConfigError("relay momentum range must satisfy 0 <= lo <= hi < 1");
  }
  if (params_.control == Control::theta && params_.id == LemmaId::prox_weighted) {
    throw ConfigError("the theta control does not apply to prox_weighted (no momentum)");
  }
  if (!(params_.a0 > 0.0 && params_.a_exp >= 0.0)) throw ConfigError("weights need a0 > 0");
  if (params_.id == LemmaId::prox_coupled && !is_nonincreasing(params_.momentum)) {
    throw ConfigError("prox_coupled needs non-increasing momentum");
  }

  if (second_order() && params_.control != Control::theta) {
    tails_.emplace(params_.momentum, length_ + 1);
    const bool beta_bound = params_.beta.family == BetaSequence::Family::none || tails_->at(1) <= 1.0;
    if (!beta_bound && params_.control == Control::none) {
      throw ConfigError("a nonzero beta needs tail coefficients t_n <= 1 (momentum <= 0.5)");
    }
  }

  const double need = min_floor();
  if (params_.floor == 0.0) {
    floor_ = std::isfinite(need) ? 2.0 * need + 1.0 : 1.0;
  } else {
    floor_ = params_.floor;
    if (params_.control == Control::none && !(floor_ > need)) {
      throw ConfigError("floor " + format_double(floor_) + " admits negative values; need > " +
                        format_double(need));
    }
  }
}

bool LemmaModel::second_order() const {
  return params_.id != LemmaId::relay && params_.id != LemmaId::prox_weighted;
}

bool LemmaModel::asserts_summability() const {
  return params_.id == LemmaId::delayed_perturbed || params_.id == LemmaId::coupled ||
         params_.id == LemmaId::prox_coupled;
}

bool LemmaModel::asserts_z_to_zero() const { return params_.id == LemmaId::coupled; }

double LemmaModel::min_floor() const {
  const double L = static_cast<double>(length_);
  double d = 0.0;
  double slack = params_.sigma + params_.eta0;
  switch (params_.id) {
    case LemmaId::relay: d = params_.theta_hi; break;
    case LemmaId::prox_weighted: slack += 2.0 * params_.a0 * params_.eta0; break;
    default:
      d = params_.control == Control::theta ? params_.theta_control : bounds(params_.momentum).hi;
      break;
  }
  if (!(d < 1.0)) return std::numeric_limits<double>::infinity();
  return L * slack * (1.0 + d) / (1.0 - d);
}

double LemmaModel::theta_at(std::int64_t n) const {
  if (params_.control == Control::theta) return params_.theta_control;
  return momentum_at(params_.momentum, n);
}

double LemmaModel::weight(std::int64_t k) const {
  return params_.a0 * std::pow(static_cast<double>(k) + 1.0, -params_.a_exp);
}

double LemmaModel::tail(std::int64_t n) const {
  if (!tails_) throw DomainError("tail coefficients undefined for momentum >= 1");
  return tails_->at(n);
}

double LemmaModel::slack(std::int64_t n) const {
  if (params_.control == Control::drift) return -params_.drift;
  const double nn = static_cast<double>(n);
  return params_.eta0 / (nn * nn * nn);
}

double LemmaModel::gap(std::int64_t k) const {
  return params_.gap0 * (1.0 + 1.0 / (static_cast<double>(k) + 1.0));
}

namespace {

double noise(double sigma, std::int64_t n, Rng& rng) {
  if (sigma == 0.0) return 0.0;
  const double nn = static_cast<double>(n);
  return sigma / (nn * nn) * rng.uniform(-1.0, 1.0);
}

}  // namespace

PathState LemmaModel::initial(Rng& rng) const {
  PathState s;
  s.n = 1;
  switch (params_.id) {
    case LemmaId::relay:
      s.v = floor_ * (1.0 + rng.uniform());
      s.r_curr = 2.0 * floor_ * rng.uniform();
      break;
    case LemmaId::prox_weighted:
      s.r_curr = floor_ * (1.0 + rng.uniform());
      s.z = params_.eta0 * (1.0 + rng.uniform());
      break;
    default:
      s.r_prev = floor_ * (1.0 + rng.uniform());
      s.r_curr = s.r_prev + params_.sigma * rng.uniform();
      if (params_.id == LemmaId::coupled || params_.id == LemmaId::prox_coupled) {
        s.z = params_.z0 * (0.5 + rng.uniform());
      }
      break;
  }
  return s;
}

void LemmaModel::step(PathState& s, Rng& rng) const {
  const std::int64_t n = s.n;
  const double eta = slack(n);
  s.eta = eta;
  switch (params_.id) {
    case LemmaId::relay: {
      const double th = params_.control == Control::theta
                            ? params_.theta_control
                            : rng.uniform(params_.theta_lo, params_.theta_hi);
      s.theta = th;
      s.v = s.v - eta + noise(params_.sigma, n, rng);
      s.r_curr = (1.0 - th) * s.r_curr + th * s.v;
      break;
    }
    case LemmaId::prox_weighted: {
      const double np1 = static_cast<double>(n + 1);
      const double eta_next = params_.eta0 * (1.0 + rng.uniform()) / (np1 * np1);
      s.r_curr = s.r_curr - weight(n) * (eta_next - s.z) - eta + noise(params_.sigma, n, rng);
      s.z = eta_next;
      break;
    }
    default: {
      const double th = theta_at(n);
      s.theta = th;
      double coupling = 0.0;
      double z_next = s.z;
      if (params_.id == LemmaId::coupled || params_.id == LemmaId::prox_coupled) {
        coupling = params_.h * params_.zeta * s.z;
        const double mult = 1.0 + params_.sigma_z * rng.uniform(-1.0, 1.0);
        z_next = (1.0 - params_.zeta) * s.z * mult;
        if (params_.id == LemmaId::prox_coupled) z_next -= weight(n) * (gap(n) - gap(n - 1));
      }
      const double r_next = (1.0 + th) * s.r_curr - th * s.r_prev - eta + params_.beta.at(n) +
                            coupling + noise(params_.sigma, n, rng);
      s.r_prev = s.r_curr;
      s.r_curr = r_next;
      s.z = z_next;
      break;
    }
  }
  s.n = n + 1;
}

double LemmaModel::lyapunov(const PathState& s) const {
  switch (params_.id) {
    case LemmaId::relay: return s.v;
    case LemmaId::prox_weighted: return s.r_curr + weight(s.n - 1) * s.z;
    default: break;
  }
  const double t = tail(s.n);
  double upper = s.r_curr;
  if (params_.id == LemmaId::coupled) upper += params_.h * s.z;
  if (params_.id == LemmaId::prox_coupled) {
    upper += params_.h * (s.z + weight(s.n - 1) * gap(s.n - 1));
  }
  return (1.0 + t) * upper - t * s.r_prev + 2.0 * params_.beta.tail(s.n);
}

namespace {

std::uint64_t stream_tag(const LemmaParams& p) {
  return 1000 + 10 * static_cast<std::uint64_t>(p.id) + static_cast<std::uint64_t>(p.control);
}

struct BranchOutcome {
  double mean = 0.0;
  double se = 0.0;
};

// Mean and standard error of V_{n+1} - V_n over B branches.
BranchOutcome branch(const LemmaModel& model, const PathState& s, double v_n, std::uint64_t seed,
                     std::uint64_t tag, std::int64_t path, std::int64_t branches) {
  double mean = 0.0;
  double m2 = 0.0;
  for (std::int64_t b = 0; b < branches; ++b) {
    Rng rng = Rng::derive(seed, {tag, static_cast<std::uint64_t>(path),
                                 static_cast<std::uint64_t>(s.n), static_cast<std::uint64_t>(b)});
    PathState next = s;
    model.step(next, rng);
    const double diff = model.lyapunov(next) - v_n;
    const double delta = diff - mean;
    mean += delta / static_cast<double>(b + 1);
    m2 += delta * (diff - mean);
  }
  const double var = branches > 1 ? m2 / static_cast<double>(branches - 1) : 0.0;
  return {mean, std::sqrt(var / static_cast<double>(branches))};
}

// Simulates one path; when `checks` is non-empty also runs the branch test at
// those state indices.
SyntheticPath simulate(const LemmaModel& model, std::uint64_t seed, std::int64_t path,
                       std::span<const std::int64_t> checks, const CheckOptions& opt,
                       std::vector<CheckRecord>* records) {
  const std::uint64_t tag = stream_tag(model.params());
  Rng rng = Rng::derive(seed, {tag, static_cast<std::uint64_t>(path)});
  const std::int64_t L = model.length();
  const bool second = model.second_order();
  const bool has_v = model.lyapunov_defined();

  SyntheticPath out;
  auto& r = out.series.r;
  auto& z = out.series.z;
  r.reserve(static_cast<std::size_t>(L));
  z.reserve(static_cast<std::size_t>(L));

  PathState s = model.initial(rng);
  if (second) {
    r.push_back(s.r_prev);
    z.push_back(s.z);
  }
  r.push_back(s.r_curr);
  z.push_back(s.z);

  std::size_t next_check = 0;
  const std::int64_t last_state = second ? L - 1 : L;
  for (;;) {
    if (has_v) {
      const double v_n = model.lyapunov(s);
      out.V.push_back(v_n);
      if (next_check < checks.size() && checks[next_check] == s.n) {
        ++next_check;
        const auto o = branch(model, s, v_n, seed, tag, path, opt.branches);
        CheckRecord rec;
        rec.path = path;
        rec.step = s.n;
        rec.V_n = v_n;
        rec.estimate = v_n + o.mean;
        if (o.se > 0.0) {
          rec.z_score = o.mean / o.se;
        } else {
          const double slack = 1e-12 * std::max(1.0, std::abs(v_n));
          rec.z_score = o.mean > slack ? std::numeric_limits<double>::infinity()
                                       : (o.mean < -slack ? -std::numeric_limits<double>::infinity()
                                                          : 0.0);
        }
        records->push_back(rec);
      }
    }
    if (s.n >= last_state) break;
    model.step(s, rng);
    r.push_back(s.r_curr);
    z.push_back(s.z);
    out.eta.push_back(s.eta);
    out.series.thetas.push_back(s.theta);
  }
  return out;
}

}  // namespace

std::vector<SyntheticPath> synth_paths(const LemmaModel& model, std::uint64_t seed,
                                       std::int64_t paths) {
  if (paths < 1) throw ArgumentError("synth_paths: paths must be >= 1");
  std::vector<SyntheticPath> out;
  out.reserve(static_cast<std::size_t>(paths));
  for (std::int64_t p = 0; p < paths; ++p) out.push_back(simulate(model, seed, p, {}, {}, nullptr));
  return out;
}

std::vector<std::int64_t> check_steps(std::int64_t length) {
  static constexpr std::array<std::int64_t, 16> kLadder = {
      1, 2, 3, 5, 10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10000, 20000, 50000};
  std::vector<std::int64_t> steps;
  const std::int64_t last = length - 2;
  for (std::int64_t k : kLadder) {
    if (k < last) steps.push_back(k);
  }
  if (last >= 1) steps.push_back(last);
  return steps;
}

namespace {

void validate_options(const CheckOptions& opt) {
  if (opt.branches < 30) {
    throw StatisticalPowerError("supermartingale_check needs at least 30 branches, got " +
                                std::to_string(opt.branches));
  }
}

CheckReport run_checks(const LemmaModel& model, std::uint64_t seed, std::int64_t paths,
                       const CheckOptions& opt, bool with_convergence) {
  validate_options(opt);
  if (paths < 1) throw ArgumentError("paths must be >= 1");
  CheckReport rep;
  rep.lemma_id = std::string(to_string(model.params().id));
  rep.control = model.params().control;
  rep.paths_tested = paths;
  rep.lyapunov_defined = model.lyapunov_defined();
  rep.summability_asserted = with_convergence && model.asserts_summability();
  rep.z_asserted = with_convergence && model.asserts_z_to_zero();

  const auto steps = check_steps(model.length());
  const auto window = static_cast<std::size_t>(std::max<std::int64_t>(100, model.length() / 10));
  std::int64_t converged = 0;
  for (std::int64_t p = 0; p < paths; ++p) {
    const SyntheticPath path = simulate(model, seed, p, steps, opt, &rep.details);
    if (!with_convergence) continue;
    const auto& r = path.series.r;
    bool ok = convergence_check(r, window, opt.convergence_tol);
    if (model.params().id == LemmaId::relay) {
      ok = ok && std::abs(r.back() - path.V.back()) < opt.convergence_tol;
    }
    if (ok) ++converged;
    if (rep.summability_asserted && !summability_check(path.eta, opt.plateau_tol)) {
      rep.eta_partial_sum_plateaued = false;
    }
    if (rep.z_asserted) {
      const auto& z = path.series.z;
      for (std::size_t k = z.size() - window; k < z.size(); ++k) {
        rep.z_tail_max = std::max(rep.z_tail_max, std::isfinite(z[k]) ? z[k] : HUGE_VAL);
      }
    }
  }
  rep.checks = static_cast<std::int64_t>(rep.details.size());
  rep.worst_z = rep.details.empty() ? 0.0 : -std::numeric_limits<double>::infinity();
  for (const auto& d : rep.details) {
    if (d.z_score > opt.tol_z) ++rep.supermartingale_violations;
    rep.worst_z = std::max(rep.worst_z, d.z_score);
  }
  rep.converged_fraction = static_cast<double>(converged) / static_cast<double>(paths);

  rep.pass = rep.lyapunov_defined && rep.violation_rate() < opt.max_violation_rate;
  if (with_convergence) {
    rep.pass = rep.pass && rep.converged_fraction >= opt.min_converged_fraction &&
               (!rep.summability_asserted || rep.eta_partial_sum_plateaued) &&
               (!rep.z_asserted || rep.z_tail_max < opt.z_tail_tol);
  }
  return rep;
}

}  // namespace

CheckReport supermartingale_check(const LemmaModel& model, std::uint64_t seed,
                                  std::int64_t paths, const CheckOptions& options) {
  return run_checks(model, seed, paths, options, false);
}

CheckReport check_lemma(const LemmaModel& model, std::uint64_t seed, std::int64_t paths,
                        const CheckOptions& options) {
  return run_checks(model, seed, paths, options, true);
}

}  // namespace samom::diagnostics
