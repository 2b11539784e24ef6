#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "loopsoup/lattice.hpp"
#include "loopsoup/loop_measure.hpp"
#include "loopsoup/mass.hpp"
#include "loopsoup/plane.hpp"
#include "loopsoup/rng.hpp"

namespace loopsoup {

struct SoupLoop {
  UnrootedLoop loop;
  // Exp(1) mark driving the thinning couplings.
  double mark = 0.0;
  // Key of the loop's own random stream (occupation times are drawn from it).
  std::uint64_t id = 0;
};

struct LoopSoupRealization {
  std::vector<SoupLoop> loops;
  double lambda = 0.0;
  KillingRates killing;
  int maxlen = 0;
  std::uint64_t seed = 0;
  std::uint64_t replica = 0;

  std::size_t size() const { return loops.size(); }
};

struct SoupConfig {
  double lambda = 0.5;
  MassSpec mass;
  int maxlen = 40;
  std::uint64_t seed = 1;
  std::size_t replicas = 1;

  void validate() const;
};

// Draws a rooted loop from the rooted measure conditioned on root and length,
// by an h-transform: from z with r steps left, step to w with probability
// p(z,w) (P^{r-1})_{w,x} / (P^r)_{z,x}.
RootedLoop sample_bridge(std::size_t x, int length, const TransitionKernel& P, Xoshiro256& rng);

// Poisson sampler for the random-walk loop soup truncated at maxlen. The
// kernel's killing rates decide whether the soup is critical or massive.
class SoupSampler {
 public:
  SoupSampler(TransitionKernel P, int maxlen);

  const TransitionKernel& kernel() const { return P_; }
  const LatticeDomain& domain() const { return P_.domain(); }
  const ReturnTable& returns() const { return q_; }
  int maxlen() const { return maxlen_; }

  // Poisson mean of the number of loops rooted at x with the given length, per unit lambda.
  double intensity(std::size_t x, int length) const { return q_.rooted_mass(length, x); }
  // Expected total loop count per unit lambda.
  double total_intensity() const;

  LoopSoupRealization sample(double lambda, std::uint64_t seed, std::uint64_t replica = 0) const;
  // Appends the loops of one independent Poisson layer.
  void sample_layer(std::vector<SoupLoop>& out, double lambda, std::uint64_t seed, std::uint64_t replica,
                    std::uint64_t layer) const;

  RootedLoop bridge(std::size_t x, int length, Xoshiro256& rng) const;

 private:
  const std::vector<Eigen::VectorXd>* cached_h(std::size_t x) const;

  TransitionKernel P_;
  int maxlen_;
  ReturnTable q_;
  // h[x][r] proportional to the column (P^r)_{., x}; filled only for small domains.
  std::vector<std::vector<Eigen::VectorXd>> h_;
};

LoopSoupRealization sample_critical_soup(const LatticeDomain& domain, double lambda, int maxlen, std::uint64_t seed,
                                         std::uint64_t replica = 0);

// Sum over the loop's visits of m^2 at the visited sites.
double thinning_exponent(const UnrootedLoop& loop, const MassFunction& m);

// Removes each loop whose exponent exceeds its mark. The killing rates of the
// result are (k + 4) e^{m^2} - 4, i.e. 4(e^{m^2} - 1) for a critical input.
LoopSoupRealization thin_to_massive(const LoopSoupRealization& soup, const LatticeDomain& domain,
                                    const MassFunction& m);

// Per-(root, length) intensity tables, flattened as [x * (maxlen/2) + (length/2 - 1)].
std::vector<double> intensity_table(const TransitionKernel& P, int maxlen);
// Intensities of the thinned critical soup: critical intensity times the mean
// survival probability over its loops, evaluated exactly by the bridge weights.
std::vector<double> thinned_intensity_table(const LatticeDomain& domain, const MassFunction& m, int maxlen);

// Realization i holds the Poisson layers 0..i; layer i has intensity lambdas[i] - lambdas[i-1].
std::vector<LoopSoupRealization> layered_soup(const SoupSampler& sampler, std::span<const double> lambdas,
                                              std::uint64_t seed, std::uint64_t replica = 0);

struct RescaledLoop {
  // Closed polyline, points[0] == points.back(), one point per lattice step.
  std::vector<Point> points;
  double duration = 0.0;
  double mark = 0.0;
};

// t -> N^{-1} loop(2 N^2 t); duration |loop| / (2 N^2).
RescaledLoop rescale_loop(const UnrootedLoop& loop, int N);
std::vector<RescaledLoop> rescale_soup(const LoopSoupRealization& soup, int N);

// Exact sampler for critical soups on large domains: loops are drawn from the
// whole-plane measure (root uniform over the sites, length weighted by
// q(len)/len with q the Z^2 return probability) and kept when they stay in
// the domain. Lengths outside [min_len, max_len] are not sampled.
class RestrictionSampler {
 public:
  RestrictionSampler(LatticeDomain domain, int min_len, int max_len);

  const LatticeDomain& domain() const { return domain_; }
  int min_len() const { return min_len_; }
  int max_len() const { return max_len_; }
  // Expected number of proposals per unit lambda.
  double proposal_intensity() const { return total_ * static_cast<double>(domain_.size()); }

  LoopSoupRealization sample(double lambda, std::uint64_t seed, std::uint64_t replica = 0) const;

 private:
  LatticeDomain domain_;
  int min_len_, max_len_;
  std::vector<int> lengths_;
  std::vector<double> cdf_;
  double total_ = 0.0;
};

// (P^{2n})_{0,0} for simple random walk on Z^2.
double plane_return_probability(int length);

}  // namespace loopsoup
