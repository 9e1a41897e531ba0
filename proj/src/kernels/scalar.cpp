#include "ops.hpp"

namespace samom::kernels::detail {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sqdist_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void extrapolate_scalar(const double* v, const double* w, double theta,
                        double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = v[i] + theta * (v[i] - w[i]);
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops ops{dot_scalar, sqdist_scalar, axpy_scalar, extrapolate_scalar};
  return ops;
}

}  // namespace samom::kernels::detail
