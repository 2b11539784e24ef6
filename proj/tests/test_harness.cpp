#include <filesystem>
#include <set>
#include <sstream>

#include "doctest.h"
#include "loopsoup/config.hpp"
#include "loopsoup/experiments.hpp"
#include "loopsoup/io.hpp"
#include "loopsoup/scaling.hpp"

using namespace loopsoup;

TEST_CASE("registry covers the twelve criteria once each") {
  const auto names = experiment_names();
  CHECK(names.size() == 12);
  std::set<std::string> unique(names.begin(), names.end());
  CHECK(unique.size() == 12);
  for (const auto& n : names) CHECK_NOTHROW(default_config(n).validate());
}

TEST_CASE("config round trip and strictness") {
  RunConfig c = default_config("laplace-identity");
  c.workers = 2;
  c.out = "somewhere";
  const RunConfig back = parse_config(to_json_full(c));
  CHECK(to_json_full(back) == to_json_full(c));
  CHECK(to_json(c).dump() == to_json(back).dump());
  CHECK(!to_json(c).contains("workers"));

  nlohmann::json j = to_json(c);
  j["bogus"] = 1;
  CHECK_THROWS(parse_config(j));
  j = to_json(c);
  j["replicas"] = "many";
  CHECK_THROWS(parse_config(j));
  RunConfig zero = c;
  zero.replicas = 0;
  CHECK_THROWS(zero.validate());
  zero = c;
  zero.version = 99;
  CHECK_THROWS(zero.validate());
}

TEST_CASE("unknown experiment names are listed in the error") {
  RunConfig c = default_config("measure-oracle");
  c.experiment = "no-such-thing";
  try {
    run_experiment(c);
    FAIL("expected an exception");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("laplace-identity") != std::string::npos);
  }
}

TEST_CASE("check rules are recomputable") {
  Check c;
  c.rule = "within";
  c.estimate = 1.05;
  c.target = 1.0;
  c.tolerance = 0.1;
  CHECK(c.pass());
  c.tolerance = 0.01;
  CHECK(!c.pass());
  c.rule = "above";
  CHECK(c.pass());
  c.rule = "below";
  CHECK(!c.pass());
  const Check back = check_from_json(to_json(c));
  CHECK(back.pass() == c.pass());
  CHECK(back.estimate == c.estimate);
}

TEST_CASE("reports are byte-identical across reruns") {
  RunConfig c = default_config("poisson-sampling");
  c.replicas = 2000;
  c.workers = 1;
  const std::string a = run_experiment(c).dump();
  c.workers = 2;
  const std::string b = run_experiment(c).dump();
  CHECK(a == b);
  c.seed += 1;
  CHECK(run_experiment(c).dump() != a);
}

TEST_CASE("soup JSON and field binary round trips") {
  const auto d = build_domain(parse_domain_spec("rect:0,0,2,2"));
  const SoupSampler s(TransitionKernel(d, zero_killing(d)), 10);
  const auto soup = s.sample(1.0, 3, 1);
  const auto j = soup_to_json(soup, "rect:0,0,2,2", "0");
  const auto back = soup_from_json(nlohmann::json::parse(j.dump()));
  REQUIRE(back.size() == soup.size());
  for (std::size_t i = 0; i < soup.size(); ++i) {
    CHECK(back.loops[i].loop == soup.loops[i].loop);
    CHECK(back.loops[i].mark == soup.loops[i].mark);
    CHECK(back.loops[i].id == soup.loops[i].id);
  }
  CHECK(back.seed == soup.seed);
  nlohmann::json wrong = j;
  wrong["version"] = 7;
  CHECK_THROWS(soup_from_json(wrong));

  std::vector<OccupationField> f{{{1.0, 2.5}}, {{0.0, -3.0}}};
  std::stringstream ss;
  write_fields_binary(ss, f);
  const auto g = read_fields_binary(ss);
  REQUIRE(g.size() == 2);
  CHECK(g[1].L == f[1].L);
}

TEST_CASE("scaling runs reject sub-lattice cutoffs and unordered N") {
  ScalingParams p;
  p.N = {8, 16};
  p.t0 = 0.01;  // 4 / 8^2 = 0.0625
  CHECK_THROWS(p.validate());
  p.t0 = 0.1;
  p.N = {16, 8};
  CHECK_THROWS(p.validate());
  p.N = {2, 8};
  CHECK_THROWS(p.validate());
  CHECK_THROWS(sample_rescaled_walk_soups(8, PlaneDomain::rectangle(0, 0, 1, 1), 1.0, 0.01, 2.0, 10, 1));
}

TEST_CASE("rescaled walk soups respect the duration window and the domain") {
  const auto w = sample_rescaled_walk_soups(8, PlaneDomain::rectangle(0, 0, 1, 1), 1.0, 0.1, 2.0, 300, 4);
  CHECK(w.replicas == 300);
  CHECK(!w.loops.empty());
  for (const auto& l : w.loops) {
    CHECK(l.duration >= 0.1 - 1e-12);
    CHECK(l.duration <= 2.0 + 1e-12);
    CHECK(l.diameter < std::sqrt(2.0));
    CHECK(l.length == static_cast<int>(std::lround(l.duration * 128)));
  }
}
