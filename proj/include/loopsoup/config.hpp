#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace loopsoup {

inline constexpr int kConfigVersion = 1;

// One run of one experiment. Fields an experiment does not use are ignored by
// it but still validated and serialized.
struct RunConfig {
  int version = kConfigVersion;
  std::string experiment;
  // Lattice domains ("rect:...", "disc:...", "sites:...") and mass specs.
  std::vector<std::string> domains;
  std::vector<std::string> masses;
  // Second domain for the perturbation coupling and its marked site "x,y".
  std::string inner_domain;
  std::string x0;
  // Continuum domain ("rect:..." or "disc:...").
  std::string plane_domain = "rect:0,0,1,1";
  std::vector<double> lambdas{0.5};
  int maxlen = 40;
  double t0 = 0.01;
  // Spatial step of the Brownian paths.
  double h = 0.01;
  std::vector<int> N{8, 16, 32, 64};
  // Duration threshold for the near-critical comparisons.
  double threshold = 0.1;
  std::vector<double> eps;
  std::size_t replicas = 1000;
  std::uint64_t seed = 20261016;
  // Execution settings; never part of a report.
  int workers = 0;
  std::string out;

  void validate() const;
};

// Defaults for a registered experiment (its criterion's parameters).
RunConfig default_config(const std::string& experiment);

// Strict parsing: unknown keys and wrong types are errors. Keys absent from
// the file keep the experiment's defaults.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

// Everything except workers and out.
nlohmann::json to_json(const RunConfig& c);
// Full round-trip form, including workers and out.
nlohmann::json to_json_full(const RunConfig& c);

}  // namespace loopsoup
