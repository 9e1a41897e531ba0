#pragma once

#include <optional>
#include <span>
#include <string_view>

// Dense vector kernels used by every inner loop of the solvers and the
// instance generator. Each kernel has a scalar reference implementation and
// SIMD variants (AVX2+FMA on x86-64, NEON on AArch64). The variant is chosen
// once at startup from the CPU features, and can be forced with the
// SAMOM_KERNELS environment variable ("scalar", "avx2", "neon") or
// set_backend().
//
// The scalar variants are plain left-to-right loops. SIMD variants reorder the
// reductions and use fused multiply-add, so they agree with the scalar ones to
// rounding, not bitwise. Results are bitwise reproducible for a fixed backend.
namespace samom::kernels {

enum class Backend { scalar, avx2, neon };

std::string_view backend_name(Backend b);
std::optional<Backend> parse_backend(std::string_view name);

bool backend_available(Backend b);
Backend active_backend();
// Throws ArgumentError if the backend is not available on this CPU.
void set_backend(Backend b);

// Sum of a[i] * b[i].
double dot(std::span<const double> a, std::span<const double> b);
// Sum of (a[i] - b[i])^2.
double squared_distance(std::span<const double> a, std::span<const double> b);
// y[i] += alpha * x[i].
void axpy(double alpha, std::span<const double> x, std::span<double> y);
// out[i] = v[i] + theta * (v[i] - w[i]). `out` may alias `v` or `w`.
void extrapolate(std::span<const double> v, std::span<const double> w,
                 double theta, std::span<double> out);
// True iff every entry is finite.
bool all_finite(std::span<const double> x);

double squared_norm(std::span<const double> a);
double norm(std::span<const double> a);
double distance(std::span<const double> a, std::span<const double> b);

// Explicit per-backend entry points, used by the equivalence tests.
struct Ops {
  double (*dot)(const double*, const double*, std::size_t);
  double (*squared_distance)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*extrapolate)(const double*, const double*, double, double*, std::size_t);
};

// Throws ArgumentError if the backend is not available on this CPU.
const Ops& ops_for(Backend b);

}  // namespace samom::kernels
