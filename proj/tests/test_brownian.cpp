#include <cmath>

#include "doctest.h"
#include "loopsoup/brownian.hpp"
#include "loopsoup/stats.hpp"

using namespace loopsoup;

TEST_CASE("resolution is a power of two above t / h^2") {
  BrownianSoupConfig c;
  c.h = 0.01;
  CHECK(brownian_resolution(0.001, c) == 64);
  CHECK(brownian_resolution(0.1, c) == 1024);
  CHECK(brownian_resolution(1.0, c) == 16384);
  c.max_resolution = 4096;
  CHECK(brownian_resolution(1.0, c) == 4096);
}

TEST_CASE("bridges return to the root and have variance t s (1 - s) per coordinate") {
  Xoshiro256 rng(2);
  const auto always = [](Point) { return true; };
  const double t = 2.0;
  std::vector<double> mid;
  for (int i = 0; i < 20000; ++i) {
    const auto p = brownian_bridge(Point(1.0, -1.0), t, 64, rng, always);
    REQUIRE(p);
    REQUIRE(p->size() == 65);
    REQUIRE(p->front() == Point(1.0, -1.0));
    REQUIRE(p->back() == Point(1.0, -1.0));
    mid.push_back((*p)[32].real() - 1.0);
  }
  double s2 = 0.0;
  for (double x : mid) s2 += x * x;
  // Var at s = 1/2 is t / 4; sd of the estimate ~ (t/4) sqrt(2/n).
  CHECK(s2 / mid.size() == doctest::Approx(t / 4.0).epsilon(0.04));
  const auto never = [](Point z) { return z.real() < 1.0 + 1e-9 && z.real() > 1.0 - 1e-9; };
  CHECK(!brownian_bridge(Point(1.0, 0.0), 1.0, 64, rng, never));
}

TEST_CASE("killing functional and thinning") {
  BrownianLoop l;
  l.duration = 0.5;
  l.path = std::vector<Point>(9, Point(0.3, 0.3));
  CHECK(killing_functional(l, [](double, double) { return 2.0; }) == doctest::Approx(4.0 * 0.5));
  BrownianSoup s;
  l.mark = 1.0;
  s.loops.push_back(l);
  l.mark = 3.0;
  s.loops.push_back(l);
  CHECK(thin_to_massive_brownian(s, [](double, double) { return 2.0; }).loops.size() == 1);
}

TEST_CASE("soup: counts, cutoffs and reproducibility") {
  BrownianSoupConfig c;
  c.domain = PlaneDomain::rectangle(0, 0, 1, 1);
  c.lambda = 1.0;
  c.t0 = 0.01;
  c.t_max = 0.05;
  c.h = 0.02;
  c.seed = 3;
  CHECK(c.expected_proposals() == doctest::Approx(1.0 / (2.0 * M_PI) * (100.0 - 20.0)));
  std::vector<double> counts;
  for (std::uint64_t r = 0; r < 400; ++r) {
    const auto s = sample_brownian_soup(c, r);
    counts.push_back(static_cast<double>(s.proposals));
    for (const auto& l : s.loops) {
      REQUIRE(l.duration >= c.t0);
      REQUIRE(l.duration <= c.t_max);
      for (const Point& z : l.path) REQUIRE(c.domain.contains(z));
    }
  }
  const MeanEstimate m = mean_stderr(counts);
  CHECK(std::abs(m.mean - c.expected_proposals()) < 4.0 * m.stderr_);
  const auto a = sample_brownian_soup(c, 7), b = sample_brownian_soup(c, 7);
  REQUIRE(a.loops.size() == b.loops.size());
  for (std::size_t i = 0; i < a.loops.size(); ++i) CHECK(a.loops[i].path == b.loops[i].path);

  BrownianSoupConfig bad = c;
  bad.t0 = 0.0;
  CHECK_THROWS(bad.validate());
  CHECK_THROWS(PlaneDomain::rectangle(0, 0, 0, 1));
}

TEST_CASE("conformal transport under z -> 2z scales time by 4 and the mass by 1/2") {
  BrownianLoop l;
  l.duration = 0.1;
  l.path = {Point(0.1, 0.1), Point(0.2, 0.1), Point(0.2, 0.2), Point(0.1, 0.1)};
  const ConformalMap f = ConformalMap::scaling(2.0);
  const BrownianLoop g = conformal_transport(l, f);
  CHECK(g.duration == doctest::Approx(0.4));
  CHECK(g.path[1] == Point(0.4, 0.2));
  const MassFunction mt = mass_transport([](double, double) { return 1.0; }, f);
  CHECK(mt(0.5, 0.5) == doctest::Approx(0.5));
  // The killing functional is invariant.
  const auto m = [](double, double) { return 1.0; };
  CHECK(killing_functional(g, mt) == doctest::Approx(killing_functional(l, m)));
  CHECK(loop_diameter(g) == doctest::Approx(2.0 * loop_diameter(l)));
}

TEST_CASE("half-square map") {
  const ConformalMap f = ConformalMap::half_square();
  const Point z(1.0, 0.5);
  CHECK(std::abs(f.inverse(f.f(z)) - z) < 1e-12);
  CHECK(std::abs(f.df(z) - z) < 1e-12);
}
