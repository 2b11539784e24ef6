#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "loopsoup/rng.hpp"
#include "loopsoup/stats.hpp"

using namespace loopsoup;

TEST_CASE("mean and standard error") {
  const std::vector<double> c(50, 3.0);
  const MeanEstimate m = mean_stderr(c);
  CHECK(m.mean == 3.0);
  CHECK(m.stderr_ == 0.0);
  const std::vector<double> x{1, 2, 3, 4};
  CHECK(mean_stderr(x).stderr_ == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  const MeanEstimate p = proportion(25, 100);
  CHECK(p.mean == 0.25);
  CHECK(p.stderr_ == doctest::Approx(std::sqrt(0.25 * 0.75 / 100)));
}

TEST_CASE("two-sample KS") {
  std::vector<double> a;
  for (int i = 0; i < 100; ++i) a.push_back(i * 0.37);
  const KsResult same = two_sample_ks(a, a);
  CHECK(same.statistic == 0.0);
  CHECK(same.p_value == doctest::Approx(1.0));
  std::vector<double> b;
  for (double v : a) b.push_back(v + 1000.0);
  CHECK(two_sample_ks(a, b).statistic == 1.0);
  CHECK(two_sample_ks(a, b).p_value < 1e-10);
  const std::vector<double> tiny(10, 1.0);
  CHECK_THROWS(two_sample_ks(tiny, a));
}

TEST_CASE("Kolmogorov tail") {
  CHECK(kolmogorov_q(0.0) == doctest::Approx(1.0));
  // Classical critical value: Q(1.3581) = 0.05.
  CHECK(kolmogorov_q(1.3581) == doctest::Approx(0.05).epsilon(1e-3));
}

TEST_CASE("one-sample KS accepts uniform draws") {
  Xoshiro256 rng(9);
  std::vector<double> u(2000);
  for (auto& v : u) v = rng.uniform();
  CHECK(one_sample_ks(u, [](double x) { return std::clamp(x, 0.0, 1.0); }).p_value > 0.001);
}

TEST_CASE("Poisson goodness of fit") {
  Xoshiro256 rng(1);
  std::poisson_distribution<long> pd(1.0 / 16.0);
  std::vector<long> counts(100000);
  for (auto& c : counts) c = pd(rng);
  const GofResult g = poisson_gof(counts, 1.0 / 16.0);
  CHECK(g.p_value > 0.001);
  for (double e : g.expected) CHECK(e >= 5.0);
  // Wrong mean is rejected.
  CHECK(poisson_gof(counts, 0.1).p_value < 1e-6);
  const std::vector<long> few(10, 0);
  CHECK_THROWS(poisson_gof(few, 1.0));
}

TEST_CASE("property: Poisson GOF p-values are roughly uniform under the null") {
  Xoshiro256 rng(2);
  std::poisson_distribution<long> pd(0.8);
  int below = 0;
  const int tests = 200;
  for (int t = 0; t < tests; ++t) {
    std::vector<long> counts(500);
    for (auto& c : counts) c = pd(rng);
    below += poisson_gof(counts, 0.8).p_value < 0.1;
  }
  // Binomial(200, 0.1): mean 20, sd ~4.2. Discreteness keeps the test slightly conservative.
  CHECK(below <= 20 + 4 * 4.3);
  CHECK(below >= 3);
}

TEST_CASE("second moments") {
  std::vector<std::vector<double>> s{{1, 2}, {-1, -2}, {1, -2}, {-1, 2}};
  const MomentMatrix m = second_moments(s);
  CHECK(m.at(0, 0) == 1.0);
  CHECK(m.at(1, 1) == 4.0);
  CHECK(m.at(0, 1) == 0.0);
}
