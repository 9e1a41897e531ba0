#include "samom/schedules.hpp"

#include <cmath>
#include <sstream>

#include "samom/errors.hpp"
#include "samom/format.hpp"

namespace samom {

StepSchedule StepSchedule::constant(double c) {
  StepSchedule s;
  s.family = Family::constant;
  s.c = c;
  s.validate();
  return s;
}

StepSchedule StepSchedule::power(double c, double s, double p) {
  StepSchedule sched;
  sched.family = Family::power;
  sched.c = c;
  sched.s = s;
  sched.p = p;
  sched.validate();
  return sched;
}

void StepSchedule::validate() const {
  if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("step constant c must be > 0");
  if (family == Family::power) {
    if (!(s >= 0.0)) throw DomainError("step offset s must be >= 0");
    if (!(p >= 0.0)) throw DomainError("step exponent p must be >= 0");
  }
}

MomentumSchedule MomentumSchedule::constant(double theta) {
  MomentumSchedule m;
  m.family = Family::constant;
  m.c = theta;
  m.validate();
  return m;
}

MomentumSchedule MomentumSchedule::harmonic(double s) {
  MomentumSchedule m;
  m.family = Family::harmonic;
  m.s = s;
  m.validate();
  return m;
}

MomentumSchedule MomentumSchedule::power(double c, double s, double p) {
  MomentumSchedule m;
  m.family = Family::power;
  m.c = c;
  m.s = s;
  m.p = p;
  m.validate();
  return m;
}

void MomentumSchedule::validate() const {
  switch (family) {
    case Family::constant:
      if (!(c >= 0.0 && c < 1.0)) throw DomainError("momentum theta must lie in [0, 1)");
      return;
    case Family::harmonic:
      // theta_1 = 1/(1 + s) < 1 requires s > 0.
      if (!(s > 0.0)) throw DomainError("harmonic momentum offset s must be > 0");
      return;
    case Family::power:
      if (!(s >= 0.0)) throw DomainError("momentum offset s must be >= 0");
      if (!(p >= 0.0)) throw DomainError("momentum exponent p must be >= 0");
      if (!(c >= 0.0)) throw DomainError("momentum numerator c must be >= 0");
      if (!(c / std::pow(1.0 + s, p) < 1.0)) {
        throw DomainError("momentum theta_1 = c/(1+s)^p must be < 1");
      }
      return;
  }
}

double step_at(const StepSchedule& sched, std::int64_t k) {
  if (k < 1) throw ArgumentError("step index k must be >= 1");
  if (sched.family == StepSchedule::Family::constant) return sched.c;
  return sched.c / std::pow(static_cast<double>(k) + sched.s, sched.p);
}

double momentum_at(const MomentumSchedule& sched, std::int64_t k) {
  if (k < 1) throw ArgumentError("momentum index k must be >= 1");
  const double kk = static_cast<double>(k);
  switch (sched.family) {
    case MomentumSchedule::Family::constant: return sched.c;
    case MomentumSchedule::Family::harmonic: return 1.0 / (kk + sched.s);
    case MomentumSchedule::Family::power: return sched.c / std::pow(kk + sched.s, sched.p);
  }
  return 0.0;
}

MomentumBounds bounds(const MomentumSchedule& sched) {
  switch (sched.family) {
    case MomentumSchedule::Family::constant: return {sched.c, sched.c};
    case MomentumSchedule::Family::harmonic: return {0.0, momentum_at(sched, 1)};
    case MomentumSchedule::Family::power:
      if (sched.p == 0.0 || sched.c == 0.0) return {sched.c, sched.c};
      return {0.0, momentum_at(sched, 1)};
  }
  return {};
}

bool is_nonincreasing(const MomentumSchedule&) {
  // Every supported family is constant or decreasing in k.
  return true;
}

bool is_constant(const MomentumSchedule& sched) {
  const auto b = bounds(sched);
  return b.lo == b.hi;
}

ValidityReport classify(const StepSchedule& sched) {
  ValidityReport r;
  if (sched.family == StepSchedule::Family::constant || sched.p == 0.0) {
    r.diverges_sum = true;
    r.square_summable = false;
    r.reason = "constant step: sum diverges, sum of squares diverges";
    return r;
  }
  const double p = sched.p;
  r.diverges_sum = p <= 1.0;
  r.square_summable = 2.0 * p > 1.0;
  std::ostringstream os;
  os << "power step with p = " << p << ": sum " << (r.diverges_sum ? "diverges" : "converges")
     << " (p " << (r.diverges_sum ? "<=" : ">") << " 1), sum of squares "
     << (r.square_summable ? "converges" : "diverges") << " (2p "
     << (r.square_summable ? ">" : "<=") << " 1)";
  r.reason = os.str();
  return r;
}

std::string describe(const StepSchedule& sched) {
  if (sched.family == StepSchedule::Family::constant) return "constant(" + format_short(sched.c) + ")";
  return format_short(sched.c) + "/(k+" + format_short(sched.s) + ")^" + format_short(sched.p);
}

std::string describe(const MomentumSchedule& sched) {
  switch (sched.family) {
    case MomentumSchedule::Family::constant: return "constant(" + format_short(sched.c) + ")";
    case MomentumSchedule::Family::harmonic: return "1/(k+" + format_short(sched.s) + ")";
    case MomentumSchedule::Family::power: break;
  }
  return format_short(sched.c) + "/(k+" + format_short(sched.s) + ")^" + format_short(sched.p);
}

}  // namespace samom
