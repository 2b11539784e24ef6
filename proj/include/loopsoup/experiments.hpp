#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "json.hpp"
#include "loopsoup/config.hpp"

namespace loopsoup {

// One asserted (or reported) comparison. The pass/fail flag is recomputed
// from the stored numbers:
//   within:   |estimate - target| <= tolerance
//   above:    estimate > target + tolerance
//   below:    estimate < target - tolerance
//   at_least: estimate >= target - tolerance
//   at_most:  estimate <= target + tolerance
struct Check {
  std::string name;
  std::string rule = "within";
  double estimate = 0.0;
  double target = 0.0;
  double tolerance = 0.0;
  // Standard error of the estimate where one exists (informational).
  double stderr_ = 0.0;
  std::size_t replicas = 0;
  bool asserted = true;

  bool pass() const;
};

nlohmann::json to_json(const Check& c);
Check check_from_json(const nlohmann::json& j);

struct StatReport {
  std::string experiment;
  nlohmann::json config;
  std::vector<Check> checks;
  // Cutoffs, bias bounds and supporting numbers.
  nlohmann::json details = nlohmann::json::object();
  // Raw tables written next to the report as CSV (name -> contents).
  std::map<std::string, std::string> tables;

  bool passed() const;
  nlohmann::json to_json() const;
  // Deterministic text form of to_json().
  std::string dump() const;
};

using Experiment = std::function<StatReport(const RunConfig&)>;

// Registered experiments in criterion order.
const std::vector<std::pair<std::string, Experiment>>& experiment_registry();
std::vector<std::string> experiment_names();

// Validates, applies the worker count and dispatches. Unknown names raise an
// error listing the available ones.
StatReport run_experiment(const RunConfig& config);

// Writes <out>/<experiment>.json, the CSV tables and a timing sidecar
// <out>/<experiment>.timing.json (kept out of the report so reports stay
// byte-identical across runs).
void write_report(const StatReport& report, const std::string& out_dir, double seconds);

// Runs body(i) for i in [0, n) on the OpenMP team; the first exception is
// rethrown after the loop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

// Experiments, one per acceptance criterion.
StatReport measure_oracle_experiment(const RunConfig& c);
StatReport determinant_identity_experiment(const RunConfig& c);
StatReport poisson_sampling_experiment(const RunConfig& c);
StatReport massive_thinning_experiment(const RunConfig& c);
StatReport laplace_identity_experiment(const RunConfig& c);
StatReport iso_covariance_experiment(const RunConfig& c);
StatReport sign_exactness_experiment(const RunConfig& c);
StatReport perturbation_coupling_experiment(const RunConfig& c);
StatReport brownian_sanity_experiment(const RunConfig& c);
StatReport geometry_experiment(const RunConfig& c);
StatReport near_critical_experiment(const RunConfig& c);
StatReport determinism_experiment(const RunConfig& c);

}  // namespace loopsoup
