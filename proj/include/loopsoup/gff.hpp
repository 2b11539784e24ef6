#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "loopsoup/lattice.hpp"
#include "loopsoup/occupation.hpp"
#include "loopsoup/rng.hpp"

namespace loopsoup {

struct GffSample {
  std::vector<double> phi;
};

// Mean-zero Gaussian vectors with covariance G via its Cholesky factor.
class GffSampler {
 public:
  explicit GffSampler(const Eigen::MatrixXd& G);
  std::size_t size() const { return static_cast<std::size_t>(factor_.rows()); }
  GffSample sample(Xoshiro256& rng) const;

 private:
  Eigen::MatrixXd factor_;
};

GffSample sample_gff(const Eigen::MatrixXd& G, std::uint64_t seed);

struct SignField {
  std::vector<int> S;
};

// Ferromagnetic couplings on unordered nearest-neighbour pairs. The law
// exp(sum over ordered neighbour pairs sqrt(L_x L_y) s_x s_y) / Z gives every
// edge the coupling J = 2 sqrt(L_x L_y).
struct Coupling {
  std::size_t a = 0, b = 0;
  double J = 0.0;
};
std::vector<Coupling> ising_couplings(const LatticeDomain& domain, std::span<const double> L);

// Exact law by enumerating 2^n configurations (n <= 16). Configuration c has
// S_i = +1 iff bit i of c is set.
inline constexpr std::size_t kExactSignLimit = 16;
class ExactSignLaw {
 public:
  ExactSignLaw(std::size_t n, std::span<const Coupling> couplings);
  std::size_t sites() const { return n_; }
  const std::vector<double>& probabilities() const { return p_; }
  double prob_equal(std::size_t a, std::size_t b) const;
  double prob_plus(std::size_t a) const;
  SignField sample(Xoshiro256& rng) const;

 private:
  std::size_t n_;
  std::vector<double> p_;
  std::vector<double> cdf_;
};

enum class SignMethod { SwendsenWang, HeatBath };

// Markov chain sampler for the sign law. Each draw runs an independent chain
// from a uniformly random start for the given number of sweeps.
class SignSampler {
 public:
  SignSampler(std::size_t n, std::vector<Coupling> couplings, SignMethod method = SignMethod::SwendsenWang);

  std::size_t sites() const { return n_; }
  void sweep(std::vector<int>& S, Xoshiro256& rng) const;
  SignField sample(Xoshiro256& rng, int sweeps) const;

  // Pilot run estimating the integrated autocorrelation time of the energy;
  // returns a burn-in of max(min_sweeps, ceil(20 tau)).
  int calibrate_burn_in(Xoshiro256& rng, int min_sweeps = 8, int pilot = 2000) const;

 private:
  double energy(const std::vector<int>& S) const;
  std::size_t n_;
  std::vector<Coupling> couplings_;
  SignMethod method_;
  // Per-site adjacency for heat-bath: (neighbour, J).
  std::vector<std::vector<std::pair<std::size_t, double>>> adj_;
};

SignField sample_signs(const LatticeDomain& domain, std::span<const double> L, std::uint64_t seed, int sweeps);

// psi_x = sqrt(2 L_x) S_x.
std::vector<double> isomorphism_field(std::span<const double> L, const SignField& S);

struct PerturbationDraw {
  std::vector<double> phi;        // on D
  std::vector<double> phi_prime;  // on D'
  bool touched = false;           // some loop through x0 meets D \ D'
};

// Coupled fields on D and D' ⊂ D built from one soup at intensity 1/2 with
// killing from m. The D' field uses the loops avoiding D \ D' and shares the
// base occupation and loop occupation times with the D field.
class PerturbationCoupling {
 public:
  PerturbationCoupling(const LatticeDomain& D, const LatticeDomain& Dprime, Site x0, const MassFunction& m,
                       int maxlen, int sweeps);

  const LatticeDomain& outer() const { return D_; }
  const LatticeDomain& inner() const { return Dp_; }
  std::size_t x0_outer() const { return x0_; }
  std::size_t x0_inner() const { return x0p_; }

  PerturbationDraw draw(std::uint64_t seed, std::uint64_t replica) const;
  // Soup-only indicator that a loop through x0 meets D \ D', from the same
  // sampler but an unrelated stream family.
  bool loop_event(std::uint64_t seed, std::uint64_t replica) const;
  // 1 - exp(-mass / 2), with mass the truncated measure of loops in D through x0 meeting D \ D'.
  double event_probability() const;

 private:
  bool crosses(const UnrootedLoop& loop) const;
  LatticeDomain D_, Dp_;
  Site x0site_;
  std::size_t x0_ = 0, x0p_ = 0;
  KillingRates kD_, kDp_;
  SoupSampler sampler_;
  int maxlen_;
  int sweeps_;
};

}  // namespace loopsoup
