#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "loopsoup/mass.hpp"
#include "loopsoup/plane.hpp"
#include "loopsoup/rng.hpp"

namespace loopsoup {

struct BrownianLoop {
  Point root;
  double duration = 0.0;
  // path[j] = loop(times[j]); times is empty for the uniform grid j * duration / M.
  std::vector<Point> path;
  std::vector<double> times;
  double mark = 0.0;
  std::uint64_t id = 0;

  std::size_t resolution() const { return path.empty() ? 0 : path.size() - 1; }
  double time_at(std::size_t j) const;
  // True if some step exceeds 6 sqrt(dt) (only meaningful on the uniform grid).
  bool suspicious_step() const;
};

struct BrownianSoupConfig {
  PlaneDomain domain = PlaneDomain::rectangle(0.0, 0.0, 1.0, 1.0);
  double lambda = 0.5;
  double t0 = 0.01;
  // Durations above t_max are not sampled.
  double t_max = std::numeric_limits<double>::infinity();
  // Spatial step: resolution M is the power of two >= max(min_resolution, t / h^2).
  double h = 0.01;
  int min_resolution = 64;
  int max_resolution = 1 << 20;
  // Constant masses can be applied by the marks before paths are drawn; the
  // law is that of thin_to_massive_brownian applied afterwards.
  MassSpec mass;
  std::uint64_t seed = 1;

  void validate() const;
  // Poisson mean of the number of proposed loops: lambda A / (2 pi) (1/t0 - 1/t_max), A the box area.
  double expected_proposals() const;
};

struct BrownianSoup {
  std::vector<BrownianLoop> loops;
  std::size_t proposals = 0;
  // Durations of all proposals, before restriction and thinning.
  std::vector<double> proposal_durations;
  // Proposals removed by the mass before their path was drawn.
  std::size_t killed = 0;
  std::uint64_t replica = 0;
};

int brownian_resolution(double duration, const BrownianSoupConfig& config);

// Standard 2-d Brownian bridge from root back to root in the given time,
// with M + 1 points (M a power of two). Returns nullopt as soon as a point
// leaves `inside` (coarse levels are checked first).
std::optional<std::vector<Point>> brownian_bridge(Point root, double duration, int M, Xoshiro256& rng,
                                                  const std::function<bool(Point)>& inside);

BrownianSoup sample_brownian_soup(const BrownianSoupConfig& config, std::uint64_t replica = 0);

// Trapezoid rule for the integral of m^2 along the loop.
double killing_functional(const BrownianLoop& loop, const MassFunction& m);

// Keeps the loops with killing_functional <= mark.
BrownianSoup thin_to_massive_brownian(const BrownianSoup& soup, const MassFunction& m);

struct ConformalMap {
  std::function<Point(Point)> f;
  std::function<Point(Point)> df;
  std::function<Point(Point)> inverse;
  // Optional range predicate for the inverse.
  std::function<bool(Point)> in_range;

  static ConformalMap identity();
  static ConformalMap scaling(double alpha);
  // z -> z^2 / 2 with the principal square root as inverse (right half-plane).
  static ConformalMap half_square();
};

// Points f(path[j]); times s_j = integral of |f'|^2 up to t_j (trapezoid).
BrownianLoop conformal_transport(const BrownianLoop& loop, const ConformalMap& f);

// m~(w) = |f'(f^{-1}(w))|^{-1} m(f^{-1}(w)).
MassFunction mass_transport(const MassFunction& m, const ConformalMap& f);

double loop_diameter(const BrownianLoop& loop);

}  // namespace loopsoup
