#include "samom/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "samom/errors.hpp"
#include "samom/kernels.hpp"

namespace samom {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::ssgd: return "ssgd";
    case Method::prox_rm: return "prox_rm";
    case Method::composite: return "composite";
  }
  return "unknown";
}

std::string_view to_string(CompositeOrder o) {
  return o == CompositeOrder::implicit_first ? "implicit_first" : "explicit_first";
}

std::string_view to_string(InitMode i) { return i == InitMode::random ? "random" : "zeros"; }

Method parse_method(std::string_view name) {
  if (name == "ssgd") return Method::ssgd;
  if (name == "prox_rm") return Method::prox_rm;
  if (name == "composite") return Method::composite;
  throw ConfigError("unknown method '" + std::string(name) +
                    "' (expected ssgd, prox_rm or composite)");
}

CompositeOrder parse_composite_order(std::string_view name) {
  if (name == "implicit_first") return CompositeOrder::implicit_first;
  if (name == "explicit_first") return CompositeOrder::explicit_first;
  throw ConfigError("unknown composite_order '" + std::string(name) +
                    "' (expected implicit_first or explicit_first)");
}

InitMode parse_init_mode(std::string_view name) {
  if (name == "random") return InitMode::random;
  if (name == "zeros") return InitMode::zeros;
  throw ConfigError("unknown init '" + std::string(name) + "' (expected random or zeros)");
}

void SolverConfig::validate() const {
  if (iterations < 2) throw ConfigError("N must be >= 2");
  if (!(checkpoint_ratio > 1.0)) throw ConfigError("checkpoint_ratio must be > 1");
  if (method != Method::ssgd && constraint.kind() != ConstraintSet::Kind::whole_space) {
    throw ConfigError("constraints are only supported by the ssgd method");
  }
  step.validate();
  momentum.validate();
}

SolverState::SolverState(std::vector<double> v1, std::vector<double> v2, Rng sample_rng)
    : v_prev(std::move(v1)), v_curr(std::move(v2)), rng(sample_rng) {
  if (v_prev.size() != v_curr.size()) throw ArgumentError("initial iterates differ in size");
  v_older.resize(v_curr.size());
  x.resize(v_curr.size());
  scratch.resize(v_curr.size());
}

std::string SolverTrace::meta(std::string_view key) const {
  for (const auto& [k, v] : metadata) {
    if (k == key) return v;
  }
  return {};
}

namespace {

void check_theta(double theta) {
  if (!(theta >= 0.0 && theta < 1.0)) {
    throw DomainError("momentum must lie in [0, 1), got " + std::to_string(theta));
  }
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0)) throw ArgumentError("step size must be > 0");
}

void check_state(const SolverState& state, const ProblemInstance& inst) {
  if (state.v_curr.size() != inst.n) {
    throw ArgumentError("iterate dimension " + std::to_string(state.v_curr.size()) +
                        " does not match instance dimension " + std::to_string(inst.n));
  }
}

// Shared prologue: x = extrapolate(v_curr, v_prev), draw the sample index.
std::size_t begin_step(SolverState& state, const ProblemInstance& inst, double alpha,
                       double theta) {
  check_alpha(alpha);
  check_theta(theta);
  check_state(state, inst);
  kernels::extrapolate(state.v_curr, state.v_prev, theta, state.x);
  return sample_index(inst, state.rng);
}

// v_next was written into v_older; rotate it in.
void commit_rotate(SolverState& state) {
  if (!kernels::all_finite(state.v_older)) throw DivergenceError(state.k + 1, state.k);
  // (older, prev, curr) = (next, p, c) -> (p, c, next)
  std::swap(state.v_older, state.v_curr);  // older = c, curr = next
  std::swap(state.v_older, state.v_prev);  // older = p, prev = c
  ++state.k;
}

}  // namespace

std::vector<double> extrapolate(std::span<const double> v_curr, std::span<const double> v_prev,
                                double theta) {
  if (v_curr.size() != v_prev.size()) throw ArgumentError("extrapolate: dimension mismatch");
  check_theta(theta);
  std::vector<double> out(v_curr.size());
  kernels::extrapolate(v_curr, v_prev, theta, out);
  return out;
}

void ssgd_step(SolverState& state, const ProblemInstance& inst, double alpha, double theta,
               const ConstraintSet& constraint) {
  const std::size_t i = begin_step(state, inst, alpha, theta);
  subgrad_into(inst, state.x, i, state.scratch);
  std::copy(state.x.begin(), state.x.end(), state.v_older.begin());
  kernels::axpy(-alpha, state.scratch, state.v_older);
  constraint.project_inplace(state.v_older);
  commit_rotate(state);
}

void prox_rm_step(SolverState& state, const ProblemInstance& inst, double alpha, double theta) {
  const std::size_t i = begin_step(state, inst, alpha, theta);
  prox_sample_into(inst, state.x, i, alpha, state.v_older);
  commit_rotate(state);
}

void composite_step(SolverState& state, const ProblemInstance& inst, double alpha, double theta,
                    CompositeOrder order) {
  if (inst.kind != ProblemKind::lasso) {
    throw ArgumentError("composite_step requires a lasso instance");
  }
  const std::size_t i = begin_step(state, inst, alpha, theta);
  const double tau = alpha * inst.lambda;
  auto& out = state.v_older;
  if (order == CompositeOrder::implicit_first) {
    prox_sample_into(inst, state.x, i, alpha, out);
    for (double& e : out) e -= tau * (e > 0.0 ? 1.0 : (e < 0.0 ? -1.0 : 0.0));
  } else {
    subgrad_into(inst, state.x, i, state.scratch);
    std::copy(state.x.begin(), state.x.end(), out.begin());
    kernels::axpy(-alpha, state.scratch, out);
    prox_l1_inplace(out, tau);
  }
  commit_rotate(state);
}

std::vector<std::int64_t> checkpoint_schedule(std::int64_t n, double ratio) {
  if (n < 1) throw ArgumentError("checkpoint_schedule: n must be >= 1");
  if (!(ratio > 1.0)) throw ArgumentError("checkpoint_schedule: ratio must be > 1");
  std::vector<std::int64_t> ks;
  ks.push_back(1);
  if (n >= 2) ks.push_back(2);
  double target = 2.0;
  while (ks.back() < n) {
    target *= ratio;
    const auto next = std::max(ks.back() + 1, static_cast<std::int64_t>(std::ceil(target)));
    ks.push_back(std::min(next, n));
  }
  return ks;
}

namespace {

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

std::string hypotheses(const SolverConfig& config) {
  const bool constant = is_constant(config.momentum);
  const auto v = classify(config.step);
  std::string s = constant ? "constant momentum" : "non-increasing momentum";
  s += v.diverges_sum && v.square_summable ? "; steps non-summable and square-summable"
                                           : "; step summability conditions not met";
  return s;
}

void fill_metadata(SolverTrace& trace, const SolverConfig& config) {
  const auto v = classify(config.step);
  auto& m = trace.metadata;
  m.emplace_back("method", std::string(to_string(config.method)));
  m.emplace_back("step", describe(config.step));
  m.emplace_back("momentum", describe(config.momentum));
  m.emplace_back("constraint", config.constraint.describe());
  m.emplace_back("N", std::to_string(config.iterations));
  m.emplace_back("seed", std::to_string(config.seed));
  m.emplace_back("init", std::string(to_string(config.init)));
  m.emplace_back("checkpoint_ratio", format_double(config.checkpoint_ratio));
  if (config.method == Method::composite) {
    m.emplace_back("composite_order", std::string(to_string(config.composite_order)));
  }
  m.emplace_back("rng", std::string(Rng::kName));
  m.emplace_back("kernels", std::string(kernels::backend_name(kernels::active_backend())));
  m.emplace_back("step_sum_diverges", fmt_bool(v.diverges_sum));
  m.emplace_back("step_square_summable", fmt_bool(v.square_summable));
  m.emplace_back("momentum_nonincreasing", fmt_bool(is_nonincreasing(config.momentum)));
  m.emplace_back("momentum_constant", fmt_bool(is_constant(config.momentum)));
  m.emplace_back("hypotheses", hypotheses(config));
}

// Stream keys for Rng::derive.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kSampleStream = 2;

}  // namespace

SolverTrace run(const SolverConfig& config, const ProblemInstance& inst,
                const StepObserver& observer) {
  config.validate();
  if (!inst.reference) throw ArgumentError("run: instance has no reference point");
  const auto& ref = *inst.reference;
  if (ref.size() != inst.n) throw ArgumentError("run: reference dimension mismatch");

  std::vector<double> v1(inst.n, 0.0);
  if (config.init == InitMode::random) {
    Rng init = Rng::derive(config.seed, {kInitStream});
    for (double& e : v1) e = init.normal();
  }
  SolverState state(v1, v1, Rng::derive(config.seed, {kSampleStream}));

  SolverTrace trace;
  fill_metadata(trace, config);
  trace.initial_dist = kernels::distance(v1, ref);
  trace.max_iterate_norm = kernels::norm(v1);
  const double f_ref = objective(inst, ref);

  const auto schedule = checkpoint_schedule(config.iterations, config.checkpoint_ratio);
  std::size_t next_cp = 0;

  for (std::int64_t k = 1; k <= config.iterations; ++k) {
    const double alpha = step_at(config.step, k);
    const double theta = momentum_at(config.momentum, k);
    try {
      switch (config.method) {
        case Method::ssgd: ssgd_step(state, inst, alpha, theta, config.constraint); break;
        case Method::prox_rm: prox_rm_step(state, inst, alpha, theta); break;
        case Method::composite:
          composite_step(state, inst, alpha, theta, config.composite_order);
          break;
      }
    } catch (const DivergenceError& e) {
      trace.diverged = true;
      trace.divergence_step = e.step();
      trace.last_finite_step = e.last_finite_step();
      break;
    }
    trace.last_finite_step = k;
    trace.max_iterate_norm = std::max(trace.max_iterate_norm, kernels::norm(state.v_curr));
    if (observer) {
      observer(StepEvent{k, alpha, theta, state.v_older, state.v_prev, state.x, state.v_curr});
    }
    if (next_cp < schedule.size() && schedule[next_cp] == k) {
      ++next_cp;
      Checkpoint cp;
      cp.k = k;
      cp.dist = kernels::distance(state.v_curr, ref);
      cp.obj_gap = objective(inst, state.v_curr) - f_ref;
      cp.increment = kernels::distance(state.v_curr, state.v_prev);
      cp.alpha = alpha;
      cp.theta = theta;
      if (!std::isfinite(cp.dist) || !std::isfinite(cp.obj_gap) || !std::isfinite(cp.increment)) {
        // Finite iterate whose objective overflows: treat as divergence.
        trace.diverged = true;
        trace.divergence_step = k;
        trace.last_finite_step = k - 1;
        break;
      }
      trace.checkpoints.push_back(cp);
    }
  }
  return trace;
}

}  // namespace samom
