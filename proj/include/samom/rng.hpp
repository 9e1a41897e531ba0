#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace samom {

// xoshiro256** seeded through splitmix64. Every random quantity in the
// library is drawn from this generator so that runs are bitwise
// reproducible across platforms and standard libraries.
class Rng {
 public:
  static constexpr std::string_view kName = "xoshiro256**/splitmix64";

  explicit Rng(std::uint64_t seed);

  // Independent stream keyed by (seed, a, b, ...). Used to give each path,
  // run or Monte Carlo branch its own generator.
  static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> keys);

  std::uint64_t next_u64();

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Uniform on [lo, hi).
  double uniform(double lo, double hi);
  // Uniform integer in [0, n). Unbiased (rejection sampling). n must be > 0.
  std::uint64_t below(std::uint64_t n);
  // Standard normal via the Box-Muller transform (both outputs are used).
  double normal();

 private:
  std::array<std::uint64_t, 4> s_{};
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace samom
