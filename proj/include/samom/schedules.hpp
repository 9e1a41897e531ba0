#pragma once

#include <cstdint>
#include <string>

namespace samom {

// Step sizes alpha_k = c / (k + s)^p, or the constant c.
struct StepSchedule {
  enum class Family { constant, power };

  Family family = Family::power;
  double c = 1.0;
  double s = 0.0;
  double p = 1.0;

  static StepSchedule constant(double c);
  static StepSchedule power(double c, double s, double p);

  // Throws DomainError on c <= 0, s < 0, p < 0, or a power family whose
  // first term is undefined (k + s == 0 never happens for k >= 1, s >= 0).
  void validate() const;
};

// Momentum theta_k: constant, harmonic-offset 1/(k + s), or power c/(k + s)^p.
struct MomentumSchedule {
  enum class Family { constant, harmonic, power };

  Family family = Family::constant;
  double c = 0.0;  // constant value, or power numerator
  double s = 0.0;
  double p = 0.0;

  static MomentumSchedule constant(double theta);
  static MomentumSchedule harmonic(double s);
  static MomentumSchedule power(double c, double s, double p);

  // Throws DomainError unless every theta_k lies in [0, 1).
  void validate() const;
};

struct MomentumBounds {
  double lo = 0.0;  // infimum over k >= 1 (may be a limit, not attained)
  double hi = 0.0;  // supremum over k >= 1
};

struct ValidityReport {
  bool diverges_sum = false;
  bool square_summable = false;
  std::string reason;
};

// k >= 1, otherwise ArgumentError.
double step_at(const StepSchedule& sched, std::int64_t k);
double momentum_at(const MomentumSchedule& sched, std::int64_t k);

MomentumBounds bounds(const MomentumSchedule& sched);
bool is_nonincreasing(const MomentumSchedule& sched);
bool is_constant(const MomentumSchedule& sched);

// p-series test on the family parameters.
ValidityReport classify(const StepSchedule& sched);

std::string describe(const StepSchedule& sched);
std::string describe(const MomentumSchedule& sched);

}  // namespace samom
