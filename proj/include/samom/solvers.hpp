#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "samom/problems.hpp"
#include "samom/rng.hpp"
#include "samom/schedules.hpp"

namespace samom {

enum class Method { ssgd, prox_rm, composite };
enum class CompositeOrder { implicit_first, explicit_first };
enum class InitMode { random, zeros };

std::string_view to_string(Method m);
std::string_view to_string(CompositeOrder o);
std::string_view to_string(InitMode i);
// Throw ConfigError for unknown names.
Method parse_method(std::string_view name);
CompositeOrder parse_composite_order(std::string_view name);
InitMode parse_init_mode(std::string_view name);

struct SolverConfig {
  Method method = Method::ssgd;
  StepSchedule step = StepSchedule::constant(0.01);
  MomentumSchedule momentum = MomentumSchedule::constant(0.0);
  ConstraintSet constraint = ConstraintSet::whole_space();
  std::int64_t iterations = 2;
  std::uint64_t seed = 1;
  double checkpoint_ratio = 1.1;
  CompositeOrder composite_order = CompositeOrder::explicit_first;
  InitMode init = InitMode::random;

  // Throws ConfigError: N < 2, ratio <= 1, or a constraint on a method
  // other than ssgd.
  void validate() const;
};

// Two most recent iterates plus per-step scratch. `k` counts completed steps.
// Steps rotate buffers: afterwards `v_older` holds the iterate that was
// v_prev before the step.
struct SolverState {
  std::vector<double> v_prev;
  std::vector<double> v_curr;
  std::vector<double> v_older;
  std::vector<double> x;        // last extrapolated point
  std::vector<double> scratch;  // subgradient buffer
  std::int64_t k = 0;
  Rng rng{0};

  SolverState(std::vector<double> v1, std::vector<double> v2, Rng sample_rng);
};

// (1 + theta) v_curr - theta v_prev. Throws ArgumentError on a dimension
// mismatch, DomainError unless 0 <= theta < 1.
std::vector<double> extrapolate(std::span<const double> v_curr, std::span<const double> v_prev,
                                double theta);

// One step of each method. All draw one sample index from state.rng, shift
// (v_prev, v_curr) <- (v_curr, v_next) and increment state.k. A non-finite
// v_next throws DivergenceError and leaves the state unshifted.
void ssgd_step(SolverState& state, const ProblemInstance& inst, double alpha, double theta,
               const ConstraintSet& constraint);
void prox_rm_step(SolverState& state, const ProblemInstance& inst, double alpha, double theta);
// Lasso only (ArgumentError otherwise). implicit_first: prox of the sampled
// quadratic, then a subgradient step on lambda ||.||_1 (sign(0) = 0).
// explicit_first: gradient step on the sampled quadratic, then soft threshold.
void composite_step(SolverState& state, const ProblemInstance& inst, double alpha, double theta,
                    CompositeOrder order);

struct Checkpoint {
  std::int64_t k = 0;
  double dist = 0.0;       // ||v_k - x*||
  double obj_gap = 0.0;    // f(v_k) - f(x*)
  double increment = 0.0;  // ||v_k - v_{k-1}||
  double alpha = 0.0;
  double theta = 0.0;
};

struct SolverTrace {
  std::vector<Checkpoint> checkpoints;
  std::vector<std::pair<std::string, std::string>> metadata;
  double initial_dist = 0.0;
  double max_iterate_norm = 0.0;
  bool diverged = false;
  std::int64_t divergence_step = 0;
  std::int64_t last_finite_step = 0;

  // Value of a metadata key, or "" if absent.
  std::string meta(std::string_view key) const;
};

// Observer hook for instrumented runs; called after every completed step
// with the vectors the step used.
struct StepEvent {
  std::int64_t k;
  double alpha;
  double theta;
  std::span<const double> v_prev;  // v_{k-1}
  std::span<const double> v_curr;  // v_k
  std::span<const double> x;       // extrapolated point
  std::span<const double> v_next;  // v_{k+1}
};
using StepObserver = std::function<void(const StepEvent&)>;

// Step indices at which run() records a checkpoint: 1, 2, then a geometric
// progression with the given ratio, plus N.
std::vector<std::int64_t> checkpoint_schedule(std::int64_t n, double ratio);

// Runs N steps from v_1 = v_2 (standard normal from the run seed, or zeros).
// Step k uses alpha_k and theta_k. The instance must carry a reference point.
// Divergence ends the run early with trace.diverged = true.
SolverTrace run(const SolverConfig& config, const ProblemInstance& inst,
                const StepObserver& observer = {});

}  // namespace samom
