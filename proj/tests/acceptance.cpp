// One line per acceptance criterion: PASS/FAIL, asserted checks passed, runtime against its limit.

#include <chrono>
#include <cstdio>
#include <map>

#include "CLI11.hpp"
#include "loopsoup/experiments.hpp"

using namespace loopsoup;

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string out = "reports";
  std::vector<std::string> only;
  int workers = 0;
  app.add_option("--out", out, "report directory");
  app.add_option("--only", only, "run a subset of experiments");
  app.add_option("--workers", workers, "OpenMP threads");
  CLI11_PARSE(app, argc, argv);

  // Runtime limits in seconds, in criterion order.
  const std::map<std::string, double> limits = {
      {"measure-oracle", 10},       {"determinant-identity", 10}, {"poisson-sampling", 60},
      {"massive-thinning", 60},     {"laplace-identity", 300},    {"iso-covariance", 600},
      {"sign-exactness", 300},      {"perturbation-coupling", 600}, {"brownian-sanity", 300},
      {"geometry", 3600},           {"near-critical", 3600},      {"determinism", 3600}};

  int index = 0, failed = 0;
  for (const auto& name : experiment_names()) {
    ++index;
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
    RunConfig c = default_config(name);
    c.workers = workers;
    const auto t0 = std::chrono::steady_clock::now();
    StatReport r;
    std::string error;
    try {
      r = run_experiment(c);
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::size_t asserted = 0, ok = 0;
    for (const Check& ch : r.checks) {
      if (!ch.asserted) continue;
      ++asserted;
      ok += ch.pass();
    }
    const double limit = limits.at(name);
    const bool pass = error.empty() && asserted > 0 && ok == asserted && seconds < limit;
    failed += !pass;
    if (error.empty()) write_report(r, out, seconds);
    std::printf("%s  %2d %-22s %zu/%zu asserted checks, %.1f s (limit %.0f s)%s%s\n", pass ? "PASS" : "FAIL", index,
                name.c_str(), ok, asserted, seconds, limit, error.empty() ? "" : "  error: ", error.c_str());
    if (!pass)
      for (const Check& ch : r.checks)
        if (ch.asserted && !ch.pass())
          std::printf("        failed: %s (estimate %.6g, target %.6g, tol %.3g)\n", ch.name.c_str(), ch.estimate,
                      ch.target, ch.tolerance);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
