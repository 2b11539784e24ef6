#include <cmath>

#include "doctest.h"
#include "loopsoup/occupation.hpp"
#include "loopsoup/stats.hpp"
#include "oracles.hpp"

using namespace loopsoup;

namespace {

LatticeDomain dom(const std::string& s) { return build_domain(parse_domain_spec(s)); }

}  // namespace

TEST_CASE("exact Laplace transform at v = 1") {
  const auto one = dom("sites:0,0");
  const std::vector<double> v1(1, 1.0);
  CHECK(laplace_exact(precision_matrix(one, zero_killing(one)), v1) == doctest::Approx(std::sqrt(4.0 / 5.0)));
  const auto two = dom("rect:0,0,1,0");
  const std::vector<double> v2(2, 1.0);
  CHECK(laplace_exact(precision_matrix(two, zero_killing(two)), v2) == doctest::Approx(std::sqrt(15.0 / 24.0)));

  const auto sq = dom("rect:0,0,2,2");
  const std::vector<double> v9(9, 1.0);
  auto A = oracle::precision(oracle::rect(3, 3), std::vector<double>(9, 0.0));
  const double d0 = oracle::det(A);
  for (std::size_t i = 0; i < 9; ++i) A[i][i] += 1.0;
  CHECK(laplace_exact(precision_matrix(sq, zero_killing(sq)), v9) ==
        doctest::Approx(std::sqrt(d0 / oracle::det(A))).epsilon(1e-12));
}

TEST_CASE("truncated transform approaches the exact one from above") {
  const auto sq = dom("rect:0,0,2,2");
  const auto k = zero_killing(sq);
  const std::vector<double> v(9, 1.0);
  const double exact = laplace_exact(precision_matrix(sq, k), v);
  double prev = 1.0;
  for (int maxlen : {4, 10, 20, 40, 200}) {
    const double t = laplace_truncated(sq, k, v, maxlen);
    CHECK(t >= exact - 1e-15);
    CHECK(t <= prev + 1e-15);
    prev = t;
  }
  CHECK(prev == doctest::Approx(exact).epsilon(1e-10));
}

TEST_CASE("laplace_mc edge cases") {
  std::vector<OccupationField> f(1000, OccupationField{{0.3, 0.2}});
  const std::vector<double> zero(2, 0.0);
  const Estimate e = laplace_mc(f, zero);
  CHECK(e.value == 1.0);
  CHECK(e.stderr_ == 0.0);
  const std::vector<double> v{1.0, 2.0};
  CHECK(laplace_mc(f, v).value == doctest::Approx(std::exp(-0.7)));
  std::vector<OccupationField> few(10, OccupationField{{0.3, 0.2}});
  CHECK_THROWS(laplace_mc(few, v));
  const std::vector<double> wrong(3, 1.0);
  CHECK_THROWS(laplace_mc(f, wrong));
}

TEST_CASE("occupation times: deterministic per loop id, mean |visits| / (k+4)") {
  const auto d = dom("rect:0,0,1,0");
  const std::vector<double> kv{0.0, 1.0};
  const KillingRates k{kv};
  const auto loop = UnrootedLoop::from_cycle({{0, 0}, {1, 0}, {0, 0}, {1, 0}});
  auto r1 = occupation_stream(17, 3), r2 = occupation_stream(17, 3);
  CHECK(occupation_time(loop, d, k, r1) == occupation_time(loop, d, k, r2));

  std::vector<double> t0, t1;
  for (std::uint64_t id = 0; id < 20000; ++id) {
    auto rng = occupation_stream(id, 1);
    const auto t = occupation_time(loop, d, k, rng);
    REQUIRE(t.size() == 2);
    t0.push_back(t[0].second);
    t1.push_back(t[1].second);
  }
  const MeanEstimate m0 = mean_stderr(t0), m1 = mean_stderr(t1);
  CHECK(std::abs(m0.mean - 2.0 / 4.0) < 4.0 * m0.stderr_);
  CHECK(std::abs(m1.mean - 2.0 / 5.0) < 4.0 * m1.stderr_);
}

TEST_CASE("base term is Gamma(1/2, 1/(k+4))") {
  const auto d = dom("rect:0,0,1,0");
  const KillingRates k{{0.0, 4.0}};
  std::vector<double> a, b;
  for (std::uint64_t r = 0; r < 20000; ++r) {
    const auto L = base_occupation(d, k, 9, r);
    REQUIRE(L.size() == 2);
    a.push_back(L[0]);
    b.push_back(L[1]);
  }
  const MeanEstimate ma = mean_stderr(a), mb = mean_stderr(b);
  CHECK(std::abs(ma.mean - 0.5 / 4.0) < 4.0 * ma.stderr_);
  CHECK(std::abs(mb.mean - 0.5 / 8.0) < 4.0 * mb.stderr_);
}

TEST_CASE("occupation field with the same dressing seed reuses loop times") {
  const auto d = dom("rect:0,0,2,2");
  const SoupSampler s(TransitionKernel(d, zero_killing(d)), 10);
  const auto soup = s.sample(0.5, 1, 0);
  const auto a = occupation_field(soup, d, 77), b = occupation_field(soup, d, 77);
  CHECK(a.L == b.L);
  for (double x : a.L) CHECK(x > 0.0);
}
