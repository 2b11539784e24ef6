#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "loopsoup/lattice.hpp"

namespace loopsoup {

// Closed nearest-neighbour walk x_0, ..., x_{2n} with x_0 == x_{2n}.
struct RootedLoop {
  std::vector<Site> points;
  std::size_t length() const { return points.empty() ? 0 : points.size() - 1; }
};

// Throws std::invalid_argument unless the loop is closed, nearest-neighbour and of even length >= 2.
void validate(const RootedLoop& loop);

// Index of the lexicographically least rotation of a cyclic sequence.
std::size_t least_rotation(std::span<const Site> cycle);

// Equivalence class of rooted loops under time rotation, stored as its
// lexicographically least rotation. Reversal is not quotiented.
class UnrootedLoop {
 public:
  UnrootedLoop() = default;
  // `cycle` lists x_0..x_{len-1} (the closing point is implicit).
  static UnrootedLoop from_cycle(std::vector<Site> cycle);
  static UnrootedLoop from_rooted(const RootedLoop& loop);

  std::span<const Site> cycle() const { return cycle_; }
  std::size_t length() const { return cycle_.size(); }
  // Number of distinct rotations, i.e. the period of the cycle.
  int rho() const { return rho_; }
  // Visit counts n(x, loop) over indices 0..len-1, sorted by site.
  std::vector<std::pair<Site, int>> multiplicities() const;
  bool touches(Site s) const;
  RootedLoop rotation(std::size_t shift) const;

  friend bool operator==(const UnrootedLoop& a, const UnrootedLoop& b) { return a.cycle_ == b.cycle_; }
  friend bool operator<(const UnrootedLoop& a, const UnrootedLoop& b) {
    if (a.cycle_.size() != b.cycle_.size()) return a.cycle_.size() < b.cycle_.size();
    return a.cycle_ < b.cycle_;
  }

 private:
  std::vector<Site> cycle_;
  int rho_ = 0;
};

// |loop|^{-1} prod_i p(x_i, x_{i+1}); zero if the loop leaves the domain.
double rooted_weight(const RootedLoop& loop, const TransitionKernel& P);
// (rho/|loop|) prod_x (k_x + 4)^{-n(x, loop)}; zero if the loop leaves the domain.
double unrooted_weight(const UnrootedLoop& loop, const TransitionKernel& P);

// q[n][x] = (P^{2n})_{x,x} for n = 0..maxlen/2.
class ReturnTable {
 public:
  ReturnTable() = default;
  ReturnTable(int maxlen, std::vector<std::vector<double>> q) : maxlen_(maxlen), q_(std::move(q)) {}

  int maxlen() const { return maxlen_; }
  std::size_t sites() const { return q_.empty() ? 0 : q_.front().size(); }
  // Return probability for an even length 2n <= maxlen.
  double at(int length, std::size_t x) const { return q_[static_cast<std::size_t>(length / 2)][x]; }
  // Rooted measure of loops rooted at x with the given length: q / length.
  double rooted_mass(int length, std::size_t x) const { return at(length, x) / length; }

 private:
  int maxlen_ = 0;
  std::vector<std::vector<double>> q_;
};

ReturnTable return_probabilities(const TransitionKernel& P, int maxlen);

// -log det(I - P), the total unrooted loop mass.
double total_mass(const TransitionKernel& P);

// sum over lengths > maxlen of tr(P^len)/len, from the spectrum of P.
double truncation_tail(const TransitionKernel& P, int maxlen);

struct WeightedLoop {
  UnrootedLoop loop;
  double weight = 0.0;
};

// Exhaustive search over closed walks. Admissible when maxlen <= 12 and the
// domain has <= 16 sites, or when the number of closed walks to visit is
// below kEnumerationWalkBudget.
inline constexpr double kEnumerationWalkBudget = 5e7;
std::vector<WeightedLoop> enumerate_loops(const TransitionKernel& P, int maxlen);

}  // namespace loopsoup
