#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "samom/momentum_algebra.hpp"
#include "samom/problems.hpp"
#include "samom/rng.hpp"
#include "samom/schedules.hpp"
#include "samom/solvers.hpp"

// Lyapunov series for delayed (second-order) stochastic recursions and
// Monte Carlo checks of their supermartingale and convergence properties.
namespace samom::diagnostics {

// r_k = ||v_k - x*||^2, z_k = ||v_k - v_{k-1}||^2, aligned with thetas.
struct PairSeries {
  std::vector<double> r;
  std::vector<double> z;
  std::vector<double> thetas;
};

// Squares the dist and increment columns of a trace. Throws ConfigError if
// the instance has no reference point, ArgumentError for a diverged trace.
PairSeries pair_series_from_trace(const SolverTrace& trace, const ProblemInstance& inst);

// Nonnegative perturbation sequence with an exact tail sum:
//   geometric  beta_k = b0 q^k,    sum_{k>=n} = b0 q^n / (1 - q)
//   power      beta_k = b0 k^-p,   sum_{k>=n} = b0 zeta(p, n)   (p > 1)
struct BetaSequence {
  enum class Family { none, geometric, power };
  Family family = Family::none;
  double b0 = 0.0;
  double rate = 0.0;  // q for geometric, p for power

  static BetaSequence none();
  // Throw DomainError unless b0 >= 0 and 0 <= q < 1 (resp. p > 1).
  static BetaSequence geometric(double b0, double q);
  static BetaSequence power(double b0, double p);

  double at(std::int64_t k) const;
  double tail(std::int64_t n) const;
};

// Hurwitz zeta sum_{k>=0} (k + a)^-s for s > 1, a > 0 (Euler-Maclaurin).
double hurwitz_zeta(double s, double a);

struct LyapunovSeries {
  std::vector<double> V;
  std::vector<double> t;          // t_n used for V_n
  std::pair<double, double> phi;  // phi_1 + phi_2 = 1
  std::vector<double> beta_tail;  // sum_{k>=n} beta_k
};

// V_n = (phi_1 + phi_2) ((1 + t_n) r_{n+1} - t_n r_n) + 2 sum_{k>=n} beta_k
// for n = 1 .. r.size() - 1, i.e. rho_n^T Q_n phi + 2 sum beta with
// rho_n = (r_n, r_{n+1}). Throws ArgumentError if the tail coefficients stop
// short of the series, DomainError unless phi_1, phi_2 > 0 sum to 1.
LyapunovSeries lyapunov(std::span<const double> r, const algebra::TailCoefficients& t,
                        std::pair<double, double> phi, const BetaSequence& beta);
LyapunovSeries lyapunov(std::span<const double> r, const algebra::TailCoefficients& t,
                        const BetaSequence& beta = BetaSequence::none());

// V_n = r_n + a_{n-1} eta_n with a[k-1] = a_k, eta[k-1] = eta_k; V_1 = r_1.
// Throws ArgumentError if a increases anywhere or lengths differ.
std::vector<double> prox_lyapunov(std::span<const double> r, std::span<const double> a,
                                  std::span<const double> eta);

// r_1 = r0, r_{n+1} = (1 - theta_n) r_n + theta_n V_{n+1}; output has V.size()
// entries. thetas[n-1] = theta_n.
std::vector<double> relay(std::span<const double> thetas, std::span<const double> v, double r0);

// true iff max - min over the last W entries is < tol and every entry is
// finite. Throws ArgumentError if W < 2 or the sequence is shorter than W.
bool convergence_check(std::span<const double> x, std::size_t window, double tol);

// true iff the partial sums grow by less than plateau_tol from index
// floor(L/10) to L.
bool summability_check(std::span<const double> eta, double plateau_tol);

// Synthetic scenarios, one per convergence result.
enum class LemmaId {
  relay,              // averaged relay driven by a convergent supermartingale
  delayed,            // second-order recursion, bounded momentum
  constant_momentum,  // second-order recursion, constant momentum
  delayed_perturbed,  // with summable perturbation beta and slack eta
  coupled,            // coupled with a contracting z sequence
  prox_weighted,      // first-order with a weighted eta term
  prox_coupled,       // coupled with a weighted gap in the z recursion
};

enum class Control { none, theta, drift };

std::string_view to_string(LemmaId id);
std::string_view to_string(Control c);
// Accepts the names above. Throws ConfigError otherwise.
LemmaId parse_lemma_id(std::string_view name);
Control parse_control(std::string_view name);
std::vector<LemmaId> all_lemmas();

// Scenario parameters. Noise and slack decay as sigma n^-2 and eta0 n^-3.
struct LemmaParams {
  LemmaId id = LemmaId::delayed;
  Control control = Control::none;
  MomentumSchedule momentum = MomentumSchedule::constant(0.5);
  double sigma = 0.1;    // amplitude of the zero-mean uniform noise on r
  double eta0 = 0.1;     // slack amplitude
  BetaSequence beta = BetaSequence::none();
  double zeta = 0.1;     // z contraction rate (coupled), p (prox_coupled)
  double h = 1.0;        // coupling weight
  double sigma_z = 0.5;  // multiplicative noise on z
  double z0 = 1.0;       // scale of z_2
  double a0 = 0.5;       // weights a_k = a0 (k + 1)^-a_exp, k >= 0
  double a_exp = 0.6;
  double gap0 = 0.1;     // prox_coupled gap rho_k = gap0 (1 + 1/(k + 1))
  double theta_lo = 0.1;  // relay momentum range
  double theta_hi = 0.9;
  double floor = 0.0;    // lower bound for r_1, r_2 (0 = automatic)
  double drift = 0.01;   // drift control magnitude
  double theta_control = 1.05;
};

// Defaults for a scenario, chosen to satisfy its hypotheses.
LemmaParams default_params(LemmaId id);

// Frozen state of one path at index n: holds r_n, r_{n+1} (second order) or
// r_n (first order), the coupled z_{n+1}, the relay driver V_n and the last
// slack eta.
struct PathState {
  std::int64_t n = 1;
  double r_prev = 0.0;
  double r_curr = 0.0;
  double z = 0.0;
  double v = 0.0;
  double eta = 0.0;
  double theta = 0.0;
};

// Branchable generator: state -> distribution of the next state.
class LemmaModel {
 public:
  // Throws ConfigError if the parameters admit negative values (see
  // min_floor) or do not match the scenario. Negative controls skip the
  // nonnegativity guard. `length` is the path length L.
  LemmaModel(LemmaParams params, std::int64_t length);

  const LemmaParams& params() const { return params_; }
  std::int64_t length() const { return length_; }
  bool second_order() const;
  // False when the Lyapunov series is undefined (momentum >= 1).
  bool lyapunov_defined() const { return tails_.has_value() || !second_order(); }
  // Conclusions each scenario asserts beyond convergence of r.
  bool asserts_summability() const;
  bool asserts_z_to_zero() const;

  // Smallest admissible floor: L (sigma + max slack) (1 + d) / (1 - d).
  double min_floor() const;
  double floor() const { return floor_; }

  PathState initial(Rng& rng) const;
  void step(PathState& s, Rng& rng) const;
  // Lyapunov value at the state. Throws DomainError if undefined.
  double lyapunov(const PathState& s) const;
  // Momentum used by the step from index n.
  double theta_at(std::int64_t n) const;
  double weight(std::int64_t k) const;  // a_k
  double tail(std::int64_t n) const;    // t_n

 private:
  double slack(std::int64_t n) const;
  double gap(std::int64_t k) const;

  LemmaParams params_;
  std::int64_t length_;
  std::optional<algebra::TailCoefficients> tails_;
  double floor_ = 0.0;
};

struct SyntheticPath {
  PairSeries series;         // r_1..r_L, z_1..z_L, theta_1..theta_L
  std::vector<double> eta;   // slack per step
  std::vector<double> V;     // Lyapunov value per index (empty if undefined)
};

// P independent paths of length L; path p uses Rng::derive(seed, {tag, p}).
std::vector<SyntheticPath> synth_paths(const LemmaModel& model, std::uint64_t seed,
                                       std::int64_t paths);

struct CheckRecord {
  std::int64_t path = 0;
  std::int64_t step = 0;
  double V_n = 0.0;
  double estimate = 0.0;  // mean of V_{n+1} over branches
  double z_score = 0.0;
};

struct CheckReport {
  std::string lemma_id;
  Control control = Control::none;
  std::int64_t paths_tested = 0;
  std::int64_t checks = 0;
  std::int64_t supermartingale_violations = 0;
  double worst_z = 0.0;
  double converged_fraction = 0.0;
  bool summability_asserted = false;
  bool eta_partial_sum_plateaued = true;
  bool z_asserted = false;
  double z_tail_max = 0.0;
  bool lyapunov_defined = true;
  bool pass = false;
  std::vector<CheckRecord> details;

  double violation_rate() const {
    return checks > 0 ? static_cast<double>(supermartingale_violations) / static_cast<double>(checks)
                      : 0.0;
  }
};

struct CheckOptions {
  std::int64_t branches = 200;
  double tol_z = 3.0;
  double max_violation_rate = 0.01;
  double convergence_tol = 1e-4;
  double min_converged_fraction = 0.99;
  double plateau_tol = 1e-3;
  double z_tail_tol = 1e-3;
};

// Steps at which the conditional mean is estimated: a fixed ladder
// 1, 2, 3, 5, 10, ... below L - 1, plus L - 2.
std::vector<std::int64_t> check_steps(std::int64_t length);

// At each check step of each path: freeze the state, run B one-step branches
// on independent streams, compare the branch mean of V_{n+1} with V_n in
// standard errors. Throws StatisticalPowerError if B < 30.
CheckReport supermartingale_check(const LemmaModel& model, std::uint64_t seed,
                                  std::int64_t paths, const CheckOptions& options = {});

// Full pipeline for one scenario: supermartingale check, tail-window
// convergence of r (and of r - V for the relay), summability of eta and
// z -> 0 where asserted. Throws ArgumentError if paths < 1.
CheckReport check_lemma(const LemmaModel& model, std::uint64_t seed, std::int64_t paths,
                        const CheckOptions& options = {});

}  // namespace samom::diagnostics
