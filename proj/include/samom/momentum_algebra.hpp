#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "samom/schedules.hpp"

// The 2x2 companion-matrix machinery behind the momentum recursion
//   r_{k+1} = (1 + theta_k) r_k - theta_k r_{k-1}.
// M(theta) = [[0, -theta], [1, 1 + theta]] has characteristic polynomial
// (x - 1)(x - theta). Head products P_n = M_1 ... M_n keep the form
// [[-d, -c], [1 + d, 1 + c]]; tail products Q_n = M_n Q_{n+1} are rank one,
// [[-t, -t], [1 + t, 1 + t]], with t_n = (1 + t_{n+1}) theta_n.
namespace samom::algebra {

// Row-major 2x2 matrix: (m00, m01, m10, m11).
struct Mat2 {
  std::array<double, 4> e{};

  double operator()(int row, int col) const { return e[static_cast<std::size_t>(2 * row + col)]; }
  double& operator()(int row, int col) { return e[static_cast<std::size_t>(2 * row + col)]; }

  double trace() const { return e[0] + e[3]; }
  double determinant() const { return e[0] * e[3] - e[1] * e[2]; }
  double frobenius() const;
  double max_abs() const;

  friend Mat2 operator*(const Mat2& a, const Mat2& b);
  friend Mat2 operator-(const Mat2& a, const Mat2& b);
  friend bool operator==(const Mat2&, const Mat2&) = default;
};

using MomentumMatrix = Mat2;

// Throws DomainError unless 0 <= theta < 1.
MomentumMatrix companion_matrix(double theta);

// Both roots of x^2 - trace x + det, ascending.
std::array<double, 2> eigenvalues(const Mat2& m);

struct ProductState {
  enum class Kind { head, tail };
  Mat2 entries;
  std::int64_t index = 1;
  Kind kind = Kind::head;
};

// P_n = M_1 M_2 ... M_n with thetas[k-1] = theta_k, multiplied left to right.
// Throws ArgumentError if n < 1 or thetas has fewer than n entries.
ProductState head_product(std::span<const double> thetas, std::int64_t n);

// Every head product P_1, ..., P_n (index k-1 holds P_k).
std::vector<Mat2> head_products(std::span<const double> thetas, std::int64_t n);

// Entries of P_n from the closed form
//   d_n = sum_{k=1}^{n-1} prod_{j<=k} theta_j,  c_n = sum_{k=1}^{n} prod_{j<=k} theta_j.
Mat2 head_product_closed_form(std::span<const double> thetas, std::int64_t n);

// t_n for n = 1..n_max, computed by the backward recursion
// t_n = (1 + t_{n+1}) theta_n from a horizon K beyond n_max. The horizon
// is chosen so that the remainder d^{K+1}/(1 - d) < tol, d = sup theta.
// Constant schedules start the recursion at the exact value theta/(1-theta).
class TailCoefficients {
 public:
  // Throws SeriesDivergenceError if sup theta >= 1, ArgumentError if
  // n_max < 1 or tol <= 0.
  TailCoefficients(const MomentumSchedule& schedule, std::int64_t n_max, double tol = 1e-12);

  // t_n, 1 <= n <= size(). Throws ArgumentError otherwise.
  double at(std::int64_t n) const;
  std::int64_t size() const { return static_cast<std::int64_t>(values_.size()); }
  std::int64_t horizon() const { return horizon_; }
  double tolerance() const { return tol_; }
  const MomentumSchedule& schedule() const { return schedule_; }
  std::span<const double> values() const { return values_; }

 private:
  MomentumSchedule schedule_;
  std::vector<double> values_;
  std::int64_t horizon_ = 0;
  double tol_ = 0.0;
};

TailCoefficients tail_coefficients(const MomentumSchedule& schedule, std::int64_t n_max,
                                   double tol = 1e-12);

// Fixed point of X -> X M(theta) for every theta: [[-t, -t], [1 + t, 1 + t]].
Mat2 fixed_point_matrix(double t);

// Q_n assembled from the stored tail coefficient t_n.
ProductState tail_product(const TailCoefficients& tails, std::int64_t n);

struct FixedPointResidual {
  double dist2 = 0.0;         // squared Frobenius distance of P to the set S
  double projection_t = 0.0;  // t of the nearest point of S, (d + c)/2
  double defect = 0.0;        // max |X(t) M(theta) - X(t)| at t = projection_t
};

// Distance of a head product [[-d, -c], [1+d, 1+c]] to
// S = {[[-t, -t], [1+t, 1+t]]}: dist^2 = (d - c)^2. Throws StructuralError if
// a column sum of P deviates from 1 by more than 1e-9.
FixedPointResidual fixed_point_residual(const ProductState& p, double theta);

}  // namespace samom::algebra
