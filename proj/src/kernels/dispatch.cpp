#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>

#include "ops.hpp"
#include "samom/errors.hpp"

namespace samom::kernels {
namespace {

bool cpu_has_avx2_fma() {
#if defined(__x86_64__) || defined(_M_X64)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend detect() {
  if (const char* forced = std::getenv("SAMOM_KERNELS")) {
    if (auto b = parse_backend(forced); b && backend_available(*b)) return *b;
  }
  if (backend_available(Backend::avx2)) return Backend::avx2;
  if (backend_available(Backend::neon)) return Backend::neon;
  return Backend::scalar;
}

std::atomic<const Ops*>& current() {
  static std::atomic<const Ops*> ops{&ops_for(detect())};
  return ops;
}

std::atomic<Backend>& current_backend() {
  static std::atomic<Backend> b{detect()};
  return b;
}

void check_sizes(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw ArgumentError(std::string(what) + ": dimension mismatch (" +
                        std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

}  // namespace

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::scalar: return "scalar";
    case Backend::avx2: return "avx2";
    case Backend::neon: return "neon";
  }
  return "unknown";
}

std::optional<Backend> parse_backend(std::string_view name) {
  if (name == "scalar") return Backend::scalar;
  if (name == "avx2") return Backend::avx2;
  if (name == "neon") return Backend::neon;
  return std::nullopt;
}

bool backend_available(Backend b) {
  switch (b) {
    case Backend::scalar: return true;
    case Backend::avx2: return detail::avx2_ops() != nullptr && cpu_has_avx2_fma();
    case Backend::neon: return detail::neon_ops() != nullptr;
  }
  return false;
}

const Ops& ops_for(Backend b) {
  if (!backend_available(b)) {
    throw ArgumentError("kernel backend '" + std::string(backend_name(b)) +
                        "' is not available on this CPU");
  }
  switch (b) {
    case Backend::avx2: return *detail::avx2_ops();
    case Backend::neon: return *detail::neon_ops();
    case Backend::scalar: break;
  }
  return detail::scalar_ops();
}

Backend active_backend() { return current_backend().load(); }

void set_backend(Backend b) {
  const Ops& ops = ops_for(b);
  current().store(&ops);
  current_backend().store(b);
}

double dot(std::span<const double> a, std::span<const double> b) {
  check_sizes(a.size(), b.size(), "dot");
  return current().load()->dot(a.data(), b.data(), a.size());
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  check_sizes(a.size(), b.size(), "squared_distance");
  return current().load()->squared_distance(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_sizes(x.size(), y.size(), "axpy");
  current().load()->axpy(alpha, x.data(), y.data(), x.size());
}

void extrapolate(std::span<const double> v, std::span<const double> w, double theta,
                 std::span<double> out) {
  check_sizes(v.size(), w.size(), "extrapolate");
  check_sizes(v.size(), out.size(), "extrapolate");
  current().load()->extrapolate(v.data(), w.data(), theta, out.data(), v.size());
}

bool all_finite(std::span<const double> x) {
  for (double e : x) {
    if (!std::isfinite(e)) return false;
  }
  return true;
}

double squared_norm(std::span<const double> a) { return dot(a, a); }

double norm(std::span<const double> a) { return std::sqrt(squared_norm(a)); }

double distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

}  // namespace samom::kernels
