#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "loopsoup/lattice.hpp"
#include "loopsoup/loop_measure.hpp"
#include "loopsoup/rng.hpp"
#include "loopsoup/soup_sampler.hpp"

namespace loopsoup {

// L_x indexed like the domain's sites.
struct OccupationField {
  std::vector<double> L;
  std::size_t size() const { return L.size(); }
  double operator[](std::size_t i) const { return L[i]; }
};

// T_x = sum over the visits to x of tau / (k_x + 4), tau ~ Exp(1), one tau per
// visit in cycle order. Returns (site index, T_x) for touched sites, sorted.
std::vector<std::pair<std::size_t, double>> occupation_time(const UnrootedLoop& loop, const LatticeDomain& domain,
                                                            const KillingRates& k, Xoshiro256& rng);

// The tau variables of a loop come from a stream keyed by the loop's id and
// the dressing seed, so the same loop gets the same occupation times in any
// soup that contains it.
Xoshiro256 occupation_stream(std::uint64_t loop_id, std::uint64_t dressing_seed);

// Sum of the loops' occupation times plus an independent base term
// Gamma(shape 1/2, scale 1/(k_x + 4)) per site. Uses the soup's killing rates.
OccupationField occupation_field(const LoopSoupRealization& soup, const LatticeDomain& domain,
                                 std::uint64_t dressing_seed);
OccupationField occupation_field(const LoopSoupRealization& soup, const LatticeDomain& domain, const KillingRates& k,
                                 std::uint64_t dressing_seed);

// Base term alone, drawn from a stream keyed by (dressing seed, replica).
std::vector<double> base_occupation(const LatticeDomain& domain, const KillingRates& k, std::uint64_t dressing_seed,
                                    std::uint64_t replica);

struct Estimate {
  double value = 0.0;
  double stderr_ = 0.0;
};

inline constexpr std::size_t kMinLaplaceReplicas = 1000;

// Sample mean of exp(-sum v_x L_x) and its standard error.
Estimate laplace_mc(std::span<const OccupationField> fields, std::span<const double> v);

// sqrt(det A / det(A + diag v)): the Laplace transform of the occupation field at lambda = 1/2.
double laplace_exact(const PrecisionMatrix& A, std::span<const double> v);

// Same transform for the soup truncated at maxlen, at intensity 1/2:
// exact * exp((tail_k - tail_{k+v}) / 2). The difference to laplace_exact is
// the truncation bias; it is nonnegative.
double laplace_truncated(const LatticeDomain& domain, const KillingRates& k, std::span<const double> v, int maxlen);

}  // namespace loopsoup
