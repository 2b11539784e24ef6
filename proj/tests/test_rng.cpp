#include <set>

#include "doctest.h"
#include "loopsoup/rng.hpp"

using namespace loopsoup;

TEST_CASE("xoshiro stream is reproducible and seed sensitive") {
  Xoshiro256 a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a(), y = b(), z = c();
    CHECK(x == y);
    differs |= x != z;
  }
  CHECK(differs);
}

TEST_CASE("uniform stays in [0,1) with the right mean") {
  Xoshiro256 r(7);
  double s = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    s += u;
  }
  // sd of the mean is 1/sqrt(12 n) ~ 6.5e-4
  CHECK(s / n == doctest::Approx(0.5).epsilon(0.004));
}

TEST_CASE("derived keys depend on every path element and its order") {
  std::set<std::uint64_t> keys;
  for (std::uint64_t i = 0; i < 50; ++i)
    for (std::uint64_t j = 0; j < 50; ++j) keys.insert(derive_key(1, {i, j}));
  CHECK(keys.size() == 2500);
  CHECK(derive_key(1, {2, 3}) != derive_key(1, {3, 2}));
  CHECK(derive_key(1, {2}) != derive_key(1, {2, 0}));
  CHECK(derive_key(5, {1, 2}) == derive_key(5, {1, 2}));
  CHECK(stream_tag("rw-soup") != stream_tag("rw-loop"));
}
