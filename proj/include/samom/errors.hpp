#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace samom {

// Value outside the mathematical domain of an operation (e.g. momentum >= 1).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed call: wrong lengths, indices out of range, bad counts.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Invalid configuration (unknown keys, missing keys, infeasible parameters).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A 2x2 product that violates the column-sum structure it must carry.
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Too few Monte Carlo branches to estimate a conditional mean.
class StatisticalPowerError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A schedule whose supremum reaches 1, so the tail series does not converge.
class SeriesDivergenceError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Non-finite iterate. Carries the step at which it happened and the last
// step whose iterate was finite.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::int64_t step, std::int64_t last_finite_step)
      : std::runtime_error("non-finite iterate at step " + std::to_string(step) +
                           " (last finite step " +
                           std::to_string(last_finite_step) + ")"),
        step_(step),
        last_finite_step_(last_finite_step) {}

  std::int64_t step() const noexcept { return step_; }
  std::int64_t last_finite_step() const noexcept { return last_finite_step_; }

 private:
  std::int64_t step_;
  std::int64_t last_finite_step_;
};

}  // namespace samom
