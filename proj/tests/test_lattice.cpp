#include <cmath>

#include "doctest.h"
#include "loopsoup/lattice.hpp"
#include "loopsoup/rng.hpp"
#include "oracles.hpp"

using namespace loopsoup;

TEST_CASE("domain specs") {
  const auto sq = build_domain(parse_domain_spec("rect:0,0,2,2"));
  CHECK(sq.size() == 9);
  CHECK(sq.boundary().size() == 8);
  CHECK(sq.degree(*sq.index_of({1, 1})) == 4);
  CHECK(sq.degree(*sq.index_of({0, 0})) == 2);

  const auto two = build_domain(parse_domain_spec("rect:0,0,1,0"));
  CHECK(two.size() == 2);
  const auto one = build_domain(parse_domain_spec("sites:0,0"));
  CHECK(one.size() == 1);
  const auto disc = build_domain(parse_domain_spec("disc:0,0,1"));
  CHECK(disc.size() == 5);

  CHECK_THROWS(parse_domain_spec("rect:0,0"));
  CHECK_THROWS(parse_domain_spec("blob:1"));
  CHECK_THROWS(build_domain(parse_domain_spec("rect:2,0,0,0")));
}

TEST_CASE("killing from mass") {
  const auto d = build_domain(parse_domain_spec("sites:0,0"));
  const auto k = killing_from_mass(d, [](double, double) { return std::sqrt(std::log(2.0)); });
  CHECK(k[0] == doctest::Approx(4.0).epsilon(1e-14));
  const auto k1 = killing_from_mass(d, [](double, double) { return 1.0; });
  CHECK(k1[0] == doctest::Approx(4.0 * (std::exp(1.0) - 1.0)).epsilon(1e-14));
  CHECK(mass_from_killing(k1)[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS(killing_from_mass(std::vector<double>{-1.0}));
}

TEST_CASE("two-site Green function is (1/15)[[4,1],[1,4]]") {
  const auto d = build_domain(parse_domain_spec("rect:0,0,1,0"));
  const Eigen::MatrixXd G = green_function(precision_matrix(d, zero_killing(d)));
  CHECK(G(0, 0) == doctest::Approx(4.0 / 15.0).epsilon(1e-14));
  CHECK(G(0, 1) == doctest::Approx(1.0 / 15.0).epsilon(1e-14));
  CHECK(G(1, 1) == doctest::Approx(4.0 / 15.0).epsilon(1e-14));
}

TEST_CASE("property: G and log det agree with an independent elimination on random boxes") {
  Xoshiro256 rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    const int w = 1 + static_cast<int>(rng.uniform() * 4), h = 1 + static_cast<int>(rng.uniform() * 4);
    const auto d = build_domain(RectangleSpec{0, 0, w - 1, h - 1});
    std::vector<double> kv(d.size());
    for (auto& v : kv) v = rng.uniform() * 2.0;
    const KillingRates k{kv};
    const auto cells = oracle::rect(w, h);
    const auto A = oracle::precision(cells, kv);
    const auto Ginv = oracle::inverse(A);
    const PrecisionMatrix P = precision_matrix(d, k);
    const Eigen::MatrixXd G = green_function(P);
    for (std::size_t i = 0; i < d.size(); ++i)
      for (std::size_t j = 0; j < d.size(); ++j) {
        // Row-major (y, x) indexing on both sides.
        REQUIRE(G(static_cast<int>(i), static_cast<int>(j)) == doctest::Approx(Ginv[i][j]).epsilon(1e-10));
        REQUIRE(G(static_cast<int>(i), static_cast<int>(j)) == doctest::Approx(G(static_cast<int>(j), static_cast<int>(i))));
      }
    CHECK(log_determinant(P.A) == doctest::Approx(std::log(oracle::det(A))).epsilon(1e-10));
  }
}

TEST_CASE("property: transition rows sum to degree / (k+4)") {
  Xoshiro256 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const int w = 1 + static_cast<int>(rng.uniform() * 5), h = 1 + static_cast<int>(rng.uniform() * 5);
    const auto d = build_domain(RectangleSpec{0, 0, w - 1, h - 1});
    std::vector<double> kv(d.size());
    for (auto& v : kv) v = rng.uniform();
    const TransitionKernel P(d, KillingRates{kv});
    const Eigen::MatrixXd M = P.dense();
    for (std::size_t x = 0; x < d.size(); ++x) {
      REQUIRE(M.row(static_cast<int>(x)).sum() == doctest::Approx(d.degree(x) / (kv[x] + 4.0)));
    }
    const Eigen::MatrixXd S = P.symmetrized();
    CHECK((S - S.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  }
}
