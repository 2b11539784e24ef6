#include <cmath>
#include <map>

#include "doctest.h"
#include "loopsoup/loop_measure.hpp"
#include "loopsoup/rng.hpp"
#include "oracles.hpp"

using namespace loopsoup;

namespace {

TransitionKernel critical(const std::string& spec) {
  const auto d = build_domain(parse_domain_spec(spec));
  return TransitionKernel(d, zero_killing(d));
}

RootedLoop rooted(std::vector<Site> pts) { return RootedLoop{std::move(pts)}; }

// Random closed walk of length 2n inside a w x h box, built as a random
// excursion plus its reversal, with random rotation afterwards.
std::vector<Site> random_cycle(Xoshiro256& rng, int w, int h, int half) {
  std::vector<Site> path{{static_cast<int>(rng.uniform() * w), static_cast<int>(rng.uniform() * h)}};
  while (static_cast<int>(path.size()) <= half) {
    const auto s = LatticeDomain::kSteps[static_cast<std::size_t>(rng.uniform() * 4)];
    const Site n{path.back().x + s.x, path.back().y + s.y};
    if (n.x < 0 || n.y < 0 || n.x >= w || n.y >= h) continue;
    path.push_back(n);
  }
  std::vector<Site> cycle(path.begin(), path.end() - 1);
  for (int i = half; i > 0; --i) cycle.push_back(path[static_cast<std::size_t>(i)]);
  const std::size_t shift = static_cast<std::size_t>(rng.uniform() * cycle.size());
  std::rotate(cycle.begin(), cycle.begin() + static_cast<long>(shift), cycle.end());
  return cycle;
}

}  // namespace

TEST_CASE("rooted weights of short loops") {
  const auto P = critical("rect:0,0,1,0");
  CHECK(rooted_weight(rooted({{0, 0}, {1, 0}, {0, 0}}), P) == doctest::Approx(1.0 / 32.0).epsilon(1e-15));
  CHECK(rooted_weight(rooted({{0, 0}, {1, 0}, {0, 0}, {1, 0}, {0, 0}}), P) ==
        doctest::Approx(1.0 / 1024.0).epsilon(1e-15));
  // Leaving the domain gives zero.
  CHECK(rooted_weight(rooted({{0, 0}, {-1, 0}, {0, 0}}), P) == 0.0);
  CHECK_THROWS(rooted_weight(rooted({{0, 0}, {1, 0}}), P));
  CHECK_THROWS(rooted_weight(rooted({{0, 0}, {1, 1}, {0, 0}}), P));
}

TEST_CASE("unrooted weights and rho") {
  const auto P = critical("rect:0,0,1,0");
  const auto two = UnrootedLoop::from_cycle({{1, 0}, {0, 0}});
  CHECK(two.rho() == 2);
  CHECK(unrooted_weight(two, P) == doctest::Approx(1.0 / 16.0).epsilon(1e-15));
  const auto four = UnrootedLoop::from_cycle({{0, 0}, {1, 0}, {0, 0}, {1, 0}});
  CHECK(four.rho() == 2);
  CHECK(unrooted_weight(four, P) == doctest::Approx(1.0 / 512.0).epsilon(1e-15));

  const auto Q = critical("rect:0,0,1,1");
  const auto square = UnrootedLoop::from_cycle({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  CHECK(square.rho() == 4);
  CHECK(unrooted_weight(square, Q) == doctest::Approx(1.0 / 256.0).epsilon(1e-15));
  // The other orientation is a different unrooted loop.
  CHECK(!(square == UnrootedLoop::from_cycle({{0, 0}, {0, 1}, {1, 1}, {1, 0}})));
}

TEST_CASE("least rotation is canonical") {
  const std::vector<Site> c{{1, 0}, {0, 0}, {0, 1}, {0, 0}};
  const auto a = UnrootedLoop::from_cycle(c);
  for (std::size_t s = 0; s < c.size(); ++s) {
    std::vector<Site> r = c;
    std::rotate(r.begin(), r.begin() + static_cast<long>(s), r.end());
    CHECK(UnrootedLoop::from_cycle(r) == a);
  }
  CHECK(a.cycle().front() == Site{0, 0});
}

TEST_CASE("property: unrooted weight = sum of rooted weights over rho rotations") {
  Xoshiro256 rng(3);
  const auto d = build_domain(RectangleSpec{0, 0, 3, 2});
  std::vector<double> kv(d.size());
  for (auto& v : kv) v = rng.uniform() * 3.0;
  const TransitionKernel P(d, KillingRates{kv});
  for (int trial = 0; trial < 300; ++trial) {
    const int half = 1 + static_cast<int>(rng.uniform() * 6);
    const auto loop = UnrootedLoop::from_cycle(random_cycle(rng, 4, 3, half));
    REQUIRE(static_cast<int>(loop.length()) % loop.rho() == 0);
    double sum = 0.0;
    std::map<std::vector<Site>, int> distinct;
    for (std::size_t s = 0; s < loop.length(); ++s) distinct[loop.rotation(s).points]++;
    REQUIRE(distinct.size() == static_cast<std::size_t>(loop.rho()));
    for (int s = 0; s < loop.rho(); ++s) sum += rooted_weight(loop.rotation(static_cast<std::size_t>(s)), P);
    REQUIRE(unrooted_weight(loop, P) == doctest::Approx(sum).epsilon(1e-13));
    int visits = 0;
    for (const auto& [site, n] : loop.multiplicities()) visits += n;
    REQUIRE(visits == static_cast<int>(loop.length()));
  }
}

TEST_CASE("return probabilities against brute-force walk counts") {
  const auto P = critical("rect:0,0,1,0");
  const ReturnTable q = return_probabilities(P, 4);
  CHECK(q.at(2, 0) == doctest::Approx(1.0 / 16.0).epsilon(1e-15));
  CHECK(q.at(4, 0) == doctest::Approx(1.0 / 256.0).epsilon(1e-15));
  CHECK(q.rooted_mass(2, 1) == doctest::Approx(1.0 / 32.0).epsilon(1e-15));

  Xoshiro256 rng(5);
  const auto d = build_domain(RectangleSpec{0, 0, 2, 1});
  std::vector<double> kv(d.size());
  for (auto& v : kv) v = rng.uniform();
  const TransitionKernel K(d, KillingRates{kv});
  const ReturnTable qk = return_probabilities(K, 8);
  const auto cells = oracle::rect(3, 2);
  for (std::size_t x = 0; x < d.size(); ++x)
    for (int len = 2; len <= 8; len += 2)
      CHECK(qk.at(len, x) == doctest::Approx(oracle::return_weight(cells, kv, x, len)).epsilon(1e-12));
}

TEST_CASE("total mass and truncation tail") {
  const auto P = critical("rect:0,0,1,0");
  const double ln = std::log(16.0 / 15.0);
  CHECK(ln == doctest::Approx(0.0645385211375712).epsilon(1e-13));
  CHECK(total_mass(P) == doctest::Approx(ln).epsilon(1e-13));
  CHECK(truncation_tail(P, 2) == doctest::Approx(ln - 1.0 / 16.0).epsilon(1e-12));
  // log det A - sum log(k+4) on a random box.
  Xoshiro256 rng(8);
  const auto d = build_domain(RectangleSpec{0, 0, 2, 2});
  std::vector<double> kv(d.size());
  for (auto& v : kv) v = rng.uniform();
  const TransitionKernel K(d, KillingRates{kv});
  double ref = -std::log(oracle::det(oracle::precision(oracle::rect(3, 3), kv)));
  for (double v : kv) ref += std::log(v + 4.0);
  CHECK(total_mass(K) == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("enumeration: two sites up to length 4 has exactly two loops") {
  const auto P = critical("rect:0,0,1,0");
  const auto loops = enumerate_loops(P, 4);
  REQUIRE(loops.size() == 2);
  CHECK(loops[0].weight == doctest::Approx(1.0 / 16.0));
  CHECK(loops[1].weight == doctest::Approx(1.0 / 512.0));
}

TEST_CASE("property: enumerated mass + tail = total mass") {
  for (const char* spec : {"rect:0,0,1,0", "rect:0,0,1,1", "rect:0,0,2,1"}) {
    const auto P = critical(spec);
    for (int maxlen : {2, 6, 10}) {
      double sum = 0.0;
      for (const auto& w : enumerate_loops(P, maxlen)) sum += w.weight;
      CHECK(sum + truncation_tail(P, maxlen) == doctest::Approx(total_mass(P)).epsilon(1e-12));
    }
  }
}
