#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "samom/format.hpp"
#include "samom/rng.hpp"

namespace samom {

enum class ProblemKind { least_squares, least_absolute, lasso };

std::string_view to_string(ProblemKind kind);
// Throws ConfigError for unknown names.
ProblemKind parse_problem_kind(std::string_view name);

// Finite-sum problem over rows a_i (dense, row-major) and targets b_i.
// Sample indices are 0-based.
//   least_squares:  f(x) = sum_i (a_i^T x - b_i)^2
//   least_absolute: f(x) = sum_i |a_i^T x - b_i|
//   lasso:          f(x) = (1/m) sum_i (a_i^T x - b_i)^2 + lambda ||x||_1
// Per-sample oracles are unscaled; the step constant absorbs the 1/m.
struct ProblemInstance {
  ProblemKind kind = ProblemKind::least_squares;
  std::size_t m = 0;
  std::size_t n = 0;
  std::vector<double> a;  // m * n, row-major
  std::vector<double> b;  // m
  double lambda = 0.0;
  std::uint64_t seed = 0;
  // Planted x0 for interpolating instances; the full-batch reference for lasso.
  std::optional<std::vector<double>> reference;

  std::span<const double> row(std::size_t i) const { return {a.data() + i * n, n}; }
  double residual(std::span<const double> x, std::size_t i) const;
};

// Synthetic instance. For least_squares/least_absolute: v ~ U[0,1]^n,
// G an m x n standard normal matrix, A = G (I + v v^T), x0 standard normal,
// b = A x0, reference = x0. For lasso: A = G, b standard normal, no
// reference (see full_batch_reference). Draw order: v, G row-major, x0, b.
// Throws ArgumentError for zero dimensions or negative lambda.
ProblemInstance generate(ProblemKind kind, std::size_t m, std::size_t n, std::uint64_t seed,
                         double lambda = 0.0);

std::size_t sample_index(const ProblemInstance& inst, Rng& rng);

struct SampleOracleResult {
  double value = 0.0;
  std::vector<double> subgradient;
  std::size_t index = 0;
};

// Subgradient of the per-sample loss F(x, i) (for lasso, the smooth part):
//   squared loss  2 a_i (a_i^T x - b_i),  absolute loss  a_i sign(a_i^T x - b_i),
// with sign(0) = 0. Throws ArgumentError for an out-of-range index.
SampleOracleResult subgrad(const ProblemInstance& inst, std::span<const double> x,
                           std::size_t i);
// Allocation-free form: writes the subgradient into g, returns F(x, i).
double subgrad_into(const ProblemInstance& inst, std::span<const double> x, std::size_t i,
                    std::span<double> g);
double sample_value(const ProblemInstance& inst, std::span<const double> x, std::size_t i);

// argmin_v F(v, i) + ||v - x||^2 / (2 alpha), in closed form along a_i.
// Throws ArgumentError if alpha <= 0. A zero row leaves x unchanged.
std::vector<double> prox_sample(const ProblemInstance& inst, std::span<const double> x,
                                std::size_t i, double alpha);
void prox_sample_into(const ProblemInstance& inst, std::span<const double> x, std::size_t i,
                      double alpha, std::span<double> out);

// Soft threshold sign(x_j) max(|x_j| - tau, 0). Throws ArgumentError if tau < 0.
std::vector<double> prox_l1(std::span<const double> x, double tau);
void prox_l1_inplace(std::span<double> x, double tau);

class ConstraintSet {
 public:
  enum class Kind { whole_space, ball, box };

  static ConstraintSet whole_space();
  // Throws ConfigError if radius <= 0.
  static ConstraintSet ball(std::vector<double> center, double radius);
  // Throws ConfigError if lo > hi in any coordinate or sizes differ.
  static ConstraintSet box(std::vector<double> lo, std::vector<double> hi);
  static ConstraintSet box(double lo, double hi, std::size_t n);

  Kind kind() const { return kind_; }
  double radius() const { return radius_; }
  std::span<const double> center() const { return center_; }
  std::span<const double> lo() const { return lo_; }
  std::span<const double> hi() const { return hi_; }

  void project_inplace(std::span<double> x) const;
  // Distance-free membership test with absolute slack.
  bool contains(std::span<const double> x, double slack = 0.0) const;
  std::string describe() const;

 private:
  Kind kind_ = Kind::whole_space;
  std::vector<double> center_;
  double radius_ = 0.0;
  std::vector<double> lo_;
  std::vector<double> hi_;
};

std::vector<double> project(std::span<const double> x, const ConstraintSet& c);

// Full deterministic objective (see ProblemInstance).
double objective(const ProblemInstance& inst, std::span<const double> x);

// Minimizer of the full squared-loss objective plus lambda ||x||_1
// ((1/m)-scaled as in the lasso objective), by `steps` iterations of
// proximal gradient from x = 0 with step 1/L, L = 2 * (Gershgorin bound of
// A^T A / m). Throws ArgumentError for least_absolute instances.
std::vector<double> full_batch_reference(const ProblemInstance& inst, std::int64_t steps);

// Text dump: header "kind m n seed lambda", m lines "a_i1 ... a_in b_i",
// then the reference line ("none" if unset). 17 significant digits.
void write_instance(std::ostream& os, const ProblemInstance& inst);
// Throws ConfigError on malformed input.
ProblemInstance read_instance(std::istream& is);

}  // namespace samom
