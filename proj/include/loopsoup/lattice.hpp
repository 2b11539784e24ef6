#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "loopsoup/mass.hpp"

namespace loopsoup {

struct Site {
  int x = 0;
  int y = 0;
  friend auto operator<=>(const Site&, const Site&) = default;
};

inline bool adjacent(Site a, Site b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y) == 1; }

struct RectangleSpec {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  friend bool operator==(const RectangleSpec&, const RectangleSpec&) = default;
};
struct DiscSpec {
  double cx = 0.0, cy = 0.0, r = 0.0;
  friend bool operator==(const DiscSpec&, const DiscSpec&) = default;
};
struct SiteListSpec {
  std::vector<Site> sites;
  friend bool operator==(const SiteListSpec&, const SiteListSpec&) = default;
};
using DomainSpec = std::variant<RectangleSpec, DiscSpec, SiteListSpec>;

// Parses "rect:x0,y0,x1,y1", "disc:cx,cy,r" or "sites:x,y;x,y;...".
DomainSpec parse_domain_spec(const std::string& text);
std::string describe(const DomainSpec& spec);

// Finite subset of Z^2 with 4-neighbour adjacency. Sites are indexed
// row-major by (y, x).
class LatticeDomain {
 public:
  static constexpr int kNoNeighbor = -1;
  static constexpr std::array<Site, 4> kSteps{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};

  explicit LatticeDomain(std::vector<Site> sites);

  std::size_t size() const { return sites_.size(); }
  const Site& site(std::size_t i) const { return sites_[i]; }
  std::span<const Site> sites() const { return sites_; }

  std::optional<std::size_t> index_of(Site s) const;
  bool contains(Site s) const { return index_of(s).has_value(); }

  // In-domain neighbours in the fixed order +x, -x, +y, -y; kNoNeighbor where absent.
  const std::array<int, 4>& neighbor_slots(std::size_t i) const { return neighbors_[i]; }
  int degree(std::size_t i) const;
  bool is_boundary(std::size_t i) const { return boundary_[i]; }
  std::vector<std::size_t> boundary() const;

  friend bool operator==(const LatticeDomain& a, const LatticeDomain& b) { return a.sites_ == b.sites_; }

 private:
  std::vector<Site> sites_;
  std::vector<std::array<int, 4>> neighbors_;
  std::vector<bool> boundary_;
  int xmin_ = 0, ymin_ = 0, width_ = 0, height_ = 0;
  std::vector<int> lookup_;
};

LatticeDomain build_domain(const DomainSpec& spec);

struct KillingRates {
  std::vector<double> k;
  std::size_t size() const { return k.size(); }
  double operator[](std::size_t i) const { return k[i]; }
};

KillingRates zero_killing(const LatticeDomain& domain);
// k_x = 4 (e^{m(x)^2} - 1), with m evaluated at site coordinates.
KillingRates killing_from_mass(const LatticeDomain& domain, const MassFunction& m);
KillingRates killing_from_mass(std::span<const double> m);
// Inverse map m = sqrt(log(1 + k/4)).
std::vector<double> mass_from_killing(const KillingRates& k);

// Killed walk: p(x,y) = 1/(k_x + 4) for in-domain neighbours.
class TransitionKernel {
 public:
  TransitionKernel(LatticeDomain domain, KillingRates k);

  std::size_t size() const { return domain_.size(); }
  const LatticeDomain& domain() const { return domain_; }
  const KillingRates& killing() const { return k_; }
  double step_weight(std::size_t x) const { return weight_[x]; }

  double operator()(std::size_t x, std::size_t y) const;
  // out = P v
  void apply(const Eigen::VectorXd& v, Eigen::VectorXd& out) const;
  Eigen::MatrixXd dense() const;
  // D^{1/2} P D^{-1/2} with D = diag(k + 4); symmetric and similar to P.
  Eigen::MatrixXd symmetrized() const;

 private:
  LatticeDomain domain_;
  KillingRates k_;
  std::vector<double> weight_;
};

TransitionKernel transition_kernel(const LatticeDomain& domain, const KillingRates& k);

// A = diag(k + 4) - adjacency.
struct PrecisionMatrix {
  Eigen::SparseMatrix<double> A;
  std::size_t size() const { return static_cast<std::size_t>(A.rows()); }
  Eigen::MatrixXd dense() const { return Eigen::MatrixXd(A); }
};

PrecisionMatrix precision_matrix(const LatticeDomain& domain, const KillingRates& k);

// Dense Cholesky inverse up to kDenseGreenLimit sites, conjugate gradients above.
inline constexpr std::size_t kDenseGreenLimit = 4000;
Eigen::MatrixXd green_function(const PrecisionMatrix& A);

// log det via sparse Cholesky; throws if A is not positive definite.
double log_determinant(const Eigen::SparseMatrix<double>& A);

}  // namespace loopsoup
