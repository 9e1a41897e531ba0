#include "samom/momentum_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "samom/errors.hpp"

namespace samom::algebra {

double Mat2::frobenius() const {
  return std::sqrt(e[0] * e[0] + e[1] * e[1] + e[2] * e[2] + e[3] * e[3]);
}

double Mat2::max_abs() const {
  double m = 0.0;
  for (double x : e) m = std::max(m, std::abs(x));
  return m;
}

Mat2 operator*(const Mat2& a, const Mat2& b) {
  Mat2 r;
  r.e[0] = a.e[0] * b.e[0] + a.e[1] * b.e[2];
  r.e[1] = a.e[0] * b.e[1] + a.e[1] * b.e[3];
  r.e[2] = a.e[2] * b.e[0] + a.e[3] * b.e[2];
  r.e[3] = a.e[2] * b.e[1] + a.e[3] * b.e[3];
  return r;
}

Mat2 operator-(const Mat2& a, const Mat2& b) {
  Mat2 r;
  for (std::size_t i = 0; i < 4; ++i) r.e[i] = a.e[i] - b.e[i];
  return r;
}

MomentumMatrix companion_matrix(double theta) {
  if (!(theta >= 0.0 && theta < 1.0)) {
    throw DomainError("companion_matrix: momentum must lie in [0, 1), got " +
                      std::to_string(theta));
  }
  return Mat2{{0.0, -theta, 1.0, 1.0 + theta}};
}

std::array<double, 2> eigenvalues(const Mat2& m) {
  const double tr = m.trace();
  const double det = m.determinant();
  const double disc = std::max(0.0, tr * tr - 4.0 * det);
  const double sq = std::sqrt(disc);
  // Stable quadratic roots: compute the larger-magnitude root first.
  const double big = 0.5 * (tr + std::copysign(sq, tr));
  const double small = big != 0.0 ? det / big : 0.0;
  return big < small ? std::array<double, 2>{big, small} : std::array<double, 2>{small, big};
}

namespace {

void check_length(std::span<const double> thetas, std::int64_t n) {
  if (n < 1) throw ArgumentError("product index n must be >= 1");
  if (static_cast<std::int64_t>(thetas.size()) < n) {
    throw ArgumentError("need " + std::to_string(n) + " momentum values, got " +
                        std::to_string(thetas.size()));
  }
}

}  // namespace

ProductState head_product(std::span<const double> thetas, std::int64_t n) {
  check_length(thetas, n);
  Mat2 p = companion_matrix(thetas[0]);
  for (std::int64_t k = 1; k < n; ++k) p = p * companion_matrix(thetas[static_cast<std::size_t>(k)]);
  return {p, n, ProductState::Kind::head};
}

std::vector<Mat2> head_products(std::span<const double> thetas, std::int64_t n) {
  check_length(thetas, n);
  std::vector<Mat2> out;
  out.reserve(static_cast<std::size_t>(n));
  Mat2 p = companion_matrix(thetas[0]);
  out.push_back(p);
  for (std::int64_t k = 1; k < n; ++k) {
    p = p * companion_matrix(thetas[static_cast<std::size_t>(k)]);
    out.push_back(p);
  }
  return out;
}

Mat2 head_product_closed_form(std::span<const double> thetas, std::int64_t n) {
  check_length(thetas, n);
  double prod = 1.0;
  double d = 0.0;
  double c = 0.0;
  for (std::int64_t k = 1; k <= n; ++k) {
    prod *= thetas[static_cast<std::size_t>(k - 1)];
    if (k <= n - 1) d += prod;
    c += prod;
  }
  return Mat2{{-d, -c, 1.0 + d, 1.0 + c}};
}

TailCoefficients::TailCoefficients(const MomentumSchedule& schedule, std::int64_t n_max,
                                   double tol)
    : schedule_(schedule), tol_(tol) {
  if (n_max < 1) throw ArgumentError("tail_coefficients: n_max must be >= 1");
  if (!(tol > 0.0)) throw ArgumentError("tail_coefficients: tol must be > 0");
  const MomentumBounds b = bounds(schedule);
  const double d = b.hi;
  if (!(d < 1.0)) {
    throw SeriesDivergenceError("tail_coefficients: sup theta = " + std::to_string(d) +
                                " >= 1, the tail series diverges");
  }

  values_.assign(static_cast<std::size_t>(n_max), 0.0);
  if (is_constant(schedule)) {
    std::fill(values_.begin(), values_.end(), d / (1.0 - d));
    horizon_ = n_max;
    return;
  }

  // Smallest extra depth K with d^{K+1}/(1-d) < tol. The truncation error at
  // any stored n is at most prod_{j=n}^{K-1} theta_j * t_K <= that bound.
  std::int64_t extra = 0;
  if (d > 0.0) {
    const double need = std::log(tol * (1.0 - d)) / std::log(d) - 1.0;
    extra = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(need)) + 1);
  }
  horizon_ = n_max + extra;

  double t = 0.0;
  for (std::int64_t k = horizon_; k > n_max; --k) t = (1.0 + t) * momentum_at(schedule, k);
  for (std::int64_t k = n_max; k >= 1; --k) {
    t = (1.0 + t) * momentum_at(schedule, k);
    values_[static_cast<std::size_t>(k - 1)] = t;
  }
}

double TailCoefficients::at(std::int64_t n) const {
  if (n < 1 || n > size()) {
    throw ArgumentError("tail coefficient index " + std::to_string(n) + " outside [1, " +
                        std::to_string(size()) + "]");
  }
  return values_[static_cast<std::size_t>(n - 1)];
}

TailCoefficients tail_coefficients(const MomentumSchedule& schedule, std::int64_t n_max,
                                   double tol) {
  return TailCoefficients(schedule, n_max, tol);
}

Mat2 fixed_point_matrix(double t) { return Mat2{{-t, -t, 1.0 + t, 1.0 + t}}; }

ProductState tail_product(const TailCoefficients& tails, std::int64_t n) {
  return {fixed_point_matrix(tails.at(n)), n, ProductState::Kind::tail};
}

FixedPointResidual fixed_point_residual(const ProductState& p, double theta) {
  const Mat2& m = p.entries;
  const double col0 = m(0, 0) + m(1, 0);
  const double col1 = m(0, 1) + m(1, 1);
  if (std::abs(col0 - 1.0) > 1e-9 || std::abs(col1 - 1.0) > 1e-9) {
    throw StructuralError("fixed_point_residual: column sums (" + std::to_string(col0) + ", " +
                          std::to_string(col1) + ") are not 1");
  }
  const double d = -m(0, 0);
  const double c = -m(0, 1);
  FixedPointResidual r;
  r.dist2 = (d - c) * (d - c);
  r.projection_t = 0.5 * (d + c);
  const Mat2 x = fixed_point_matrix(r.projection_t);
  r.defect = (x * companion_matrix(theta) - x).max_abs();
  return r;
}

}  // namespace samom::algebra
