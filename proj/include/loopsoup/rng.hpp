#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string_view>

namespace loopsoup {

// xoshiro256** seeded through splitmix64. Satisfies UniformRandomBitGenerator,
// so it plugs into the <random> distributions.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed = 0x9E3779B97F4A7C15ULL);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t s_[4];
};

std::uint64_t splitmix64(std::uint64_t& state);

// Stable 64-bit hash of a label, used to name derivation paths.
std::uint64_t stream_tag(std::string_view label);

// Derives a child key from a parent key and a path of integers. The mapping is
// a pure function so streams are independent of scheduling.
std::uint64_t derive_key(std::uint64_t parent, std::initializer_list<std::uint64_t> path);

inline Xoshiro256 make_stream(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  return Xoshiro256(derive_key(master, path));
}

}  // namespace loopsoup
