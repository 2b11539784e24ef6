#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "loopsoup/experiments.hpp"
#include "loopsoup/plane.hpp"

namespace loopsoup {

// Loops of a critical random-walk soup on N D ∩ Z^2 with duration
// |loop| / (2 N^2) in [t0, t_max], seen at scale 1/N.
struct WalkLoopRecord {
  int length = 0;
  double duration = 0.0;
  double diameter = 0.0;
  double mark = 0.0;
  std::size_t replica = 0;
};

struct WalkSoupSample {
  int N = 0;
  std::vector<WalkLoopRecord> loops;
  std::size_t replicas = 0;
};

// Rectangular domains only. Throws if t0 < 4 / N^2.
WalkSoupSample sample_rescaled_walk_soups(int N, const PlaneDomain& domain, double lambda, double t0, double t_max,
                                          std::size_t replicas, std::uint64_t seed);

struct ScalingParams {
  std::vector<int> N{8, 16, 32, 64};
  double lambda = 1.0;
  double m = 1.0;
  PlaneDomain domain = PlaneDomain::rectangle(0.0, 0.0, 1.0, 1.0);
  double t0 = 0.1;
  double t_max = 2.0;
  double h = 0.005;
  std::size_t replicas = 100000;
  std::uint64_t seed = 1;
  // Dichotomy: per-step lattice mass c N^{-alpha}.
  double c = 1.0;
  std::vector<double> alphas{0.5, 1.0, 1.5};
  std::size_t bootstrap = 200;

  void validate() const;
};

// Rescaled massive walk soups (per-step mass m / (sqrt 2 N)) against the massive
// Brownian soup: loop counts, and two-sample KS on durations and diameters.
StatReport scaling_comparison(const ScalingParams& p);
// Survival of loops with duration >= t0 under per-step mass c N^{-alpha}.
StatReport dichotomy_experiment(const ScalingParams& p);

ScalingParams scaling_params(const RunConfig& c);

}  // namespace loopsoup
