#include <cmath>
#include <map>

#include "doctest.h"
#include "loopsoup/soup_sampler.hpp"
#include "loopsoup/stats.hpp"
#include "oracles.hpp"

using namespace loopsoup;

namespace {

LatticeDomain dom(const std::string& s) { return build_domain(parse_domain_spec(s)); }

}  // namespace

TEST_CASE("bridges are closed walks of the requested length from the root") {
  const auto d = dom("rect:0,0,3,2");
  const TransitionKernel P(d, zero_killing(d));
  Xoshiro256 rng(1);
  for (std::size_t x = 0; x < d.size(); ++x)
    for (int len : {2, 4, 10, 16}) {
      const RootedLoop l = sample_bridge(x, len, P, rng);
      REQUIRE(l.length() == static_cast<std::size_t>(len));
      REQUIRE(l.points.front() == d.site(x));
      REQUIRE_NOTHROW(validate(l));
      for (const Site& s : l.points) REQUIRE(d.contains(s));
    }
  CHECK_THROWS(sample_bridge(0, 3, P, rng));
}

TEST_CASE("bridge law matches the rooted measure on a 2x2 box, length 4") {
  // Rooted loops of length 4 from (0,0): each has probability p^4 / q.
  const auto d = dom("rect:0,0,1,1");
  const TransitionKernel P(d, zero_killing(d));
  const double q = oracle::return_weight(oracle::rect(2, 2), std::vector<double>(4, 0.0), 0, 4);
  // Closed 4-walks from a corner of the 2x2 box: 8 of them, each weight 4^-4.
  CHECK(q == doctest::Approx(8.0 / 256.0));
  Xoshiro256 rng(2);
  std::map<std::vector<Site>, int> seen;
  const int n = 40000;
  for (int i = 0; i < n; ++i) seen[sample_bridge(0, 4, P, rng).points]++;
  CHECK(seen.size() == 8);
  for (const auto& [pts, c] : seen) CHECK(static_cast<double>(c) / n == doctest::Approx(0.125).epsilon(0.1));
}

TEST_CASE("soup sampling is deterministic in (seed, replica)") {
  const auto d = dom("rect:0,0,2,2");
  const SoupSampler s(TransitionKernel(d, zero_killing(d)), 10);
  const auto a = s.sample(1.0, 99, 3), b = s.sample(1.0, 99, 3), c = s.sample(1.0, 99, 4);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.loops[i].loop == b.loops[i].loop);
    CHECK(a.loops[i].mark == b.loops[i].mark);
    CHECK(a.loops[i].id == b.loops[i].id);
  }
  bool differs = a.size() != c.size();
  for (std::size_t i = 0; !differs && i < a.size(); ++i) differs = !(a.loops[i].loop == c.loops[i].loop);
  CHECK(differs);
}

TEST_CASE("two-site soup: mean loop count equals lambda times intensity") {
  const auto d = dom("rect:0,0,1,0");
  const SoupSampler s(TransitionKernel(d, zero_killing(d)), 8);
  double expect = 0.0;
  for (int n = 1; n <= 4; ++n) expect += std::pow(16.0, -n) / n;
  CHECK(s.total_intensity() == doctest::Approx(expect).epsilon(1e-14));
  std::vector<double> counts;
  for (std::uint64_t r = 0; r < 20000; ++r) counts.push_back(static_cast<double>(s.sample(2.0, 5, r).size()));
  const MeanEstimate m = mean_stderr(counts);
  CHECK(std::abs(m.mean - 2.0 * expect) < 4.0 * m.stderr_);
}

TEST_CASE("thinning") {
  const auto d = dom("rect:0,0,1,0");
  const auto loop = UnrootedLoop::from_cycle({{0, 0}, {1, 0}});
  CHECK(thinning_exponent(loop, [](double, double) { return std::sqrt(0.5); }) == doctest::Approx(1.0));
  CHECK(thinning_exponent(loop, [](double x, double) { return x; }) == doctest::Approx(1.0));

  // Thinned critical intensities equal the massive intensities, k = 4(e^{m^2} - 1).
  for (double m : {0.3, 0.7071067811865476, 1.2}) {
    const auto mf = [m](double, double) { return m; };
    for (const char* spec : {"rect:0,0,1,0", "rect:0,0,2,2"}) {
      const auto D = dom(spec);
      const auto thinned = thinned_intensity_table(D, mf, 8);
      const auto direct = intensity_table(TransitionKernel(D, killing_from_mass(D, mf)), 8);
      REQUIRE(thinned.size() == direct.size());
      for (std::size_t i = 0; i < direct.size(); ++i) CHECK(thinned[i] == doctest::Approx(direct[i]).epsilon(1e-12));
    }
  }

  const SoupSampler s(TransitionKernel(d, zero_killing(d)), 8);
  const auto soup = s.sample(5.0, 17, 0);
  const auto thin = thin_to_massive(soup, d, [](double, double) { return 1.0; });
  CHECK(thin.killing[0] == doctest::Approx(4.0 * (std::exp(1.0) - 1.0)));
  CHECK(thin.size() <= soup.size());
  for (const auto& l : thin.loops) CHECK(static_cast<double>(l.loop.length()) <= l.mark);
}

TEST_CASE("layered soups are nested") {
  const auto d = dom("rect:0,0,2,2");
  const SoupSampler s(TransitionKernel(d, zero_killing(d)), 8);
  const std::vector<double> lambdas{0.5, 1.0, 1.5};
  const auto layers = layered_soup(s, lambdas, 4, 2);
  REQUIRE(layers.size() == 3);
  for (std::size_t i = 1; i < layers.size(); ++i) {
    REQUIRE(layers[i].size() >= layers[i - 1].size());
    for (std::size_t j = 0; j < layers[i - 1].size(); ++j) CHECK(layers[i].loops[j].id == layers[i - 1].loops[j].id);
  }
}

TEST_CASE("rescaling") {
  const auto l = UnrootedLoop::from_cycle({{1, 1}, {2, 1}, {2, 2}, {1, 2}});
  const RescaledLoop r = rescale_loop(l, 4);
  CHECK(r.duration == doctest::Approx(4.0 / 32.0));
  REQUIRE(r.points.size() == 5);
  CHECK(r.points.front() == r.points.back());
  CHECK(r.points.front() == Point(0.25, 0.25));
}

TEST_CASE("plane return probability is (C(2n,n)/4^n)^2") {
  CHECK(plane_return_probability(2) == doctest::Approx(0.25));
  CHECK(plane_return_probability(4) == doctest::Approx(9.0 / 64.0));
  for (int n : {5, 20, 100}) {
    const double a = oracle::choose(2 * n, n) / std::pow(4.0, n);
    CHECK(plane_return_probability(2 * n) == doctest::Approx(a * a).epsilon(1e-10));
  }
}

TEST_CASE("restriction sampler agrees with the h-transform sampler on a small box") {
  // Loops of length 4..8 in a 3x3 box: mean counts per (length) from both samplers.
  const auto d = dom("rect:0,0,2,2");
  const RestrictionSampler rs(d, 4, 8);
  const SoupSampler hs(TransitionKernel(d, zero_killing(d)), 8);
  double expect = 0.0;
  for (std::size_t x = 0; x < d.size(); ++x)
    for (int len = 4; len <= 8; len += 2) expect += hs.intensity(x, len);
  std::vector<double> counts;
  for (std::uint64_t r = 0; r < 20000; ++r) {
    const auto soup = rs.sample(1.0, 8, r);
    for (const auto& l : soup.loops) {
      REQUIRE(l.loop.length() >= 4);
      REQUIRE(l.loop.length() <= 8);
      for (const Site& s : l.loop.cycle()) REQUIRE(d.contains(s));
    }
    counts.push_back(static_cast<double>(soup.size()));
  }
  const MeanEstimate m = mean_stderr(counts);
  CHECK(std::abs(m.mean - expect) < 4.0 * m.stderr_);
}
