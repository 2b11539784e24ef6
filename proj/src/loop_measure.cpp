#include "loopsoup/loop_measure.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace loopsoup {

void validate(const RootedLoop& loop) {
  const auto& p = loop.points;
  if (p.size() < 3) throw std::invalid_argument("malformed loop: fewer than 2 steps");
  if (p.front() != p.back()) throw std::invalid_argument("malformed loop: not closed");
  if ((p.size() - 1) % 2 != 0) throw std::invalid_argument("malformed loop: odd length");
  for (std::size_t i = 1; i < p.size(); ++i)
    if (!adjacent(p[i - 1], p[i])) throw std::invalid_argument("malformed loop: non nearest-neighbour step");
}

std::size_t least_rotation(std::span<const Site> s) {
  const std::size_t n = s.size();
  if (n < 2) return 0;
  std::size_t i = 0, j = 1, k = 0;
  while (i < n && j < n && k < n) {
    const Site& a = s[(i + k) % n];
    const Site& b = s[(j + k) % n];
    if (a == b) {
      ++k;
      continue;
    }
    if (b < a)
      i += k + 1;
    else
      j += k + 1;
    if (i == j) ++j;
    k = 0;
  }
  return std::min(i, j);
}

UnrootedLoop UnrootedLoop::from_cycle(std::vector<Site> cycle) {
  if (cycle.empty()) throw std::invalid_argument("malformed loop: empty cycle");
  const std::size_t n = cycle.size();
  for (std::size_t i = 0; i < n; ++i)
    if (!adjacent(cycle[i], cycle[(i + 1) % n]))
      throw std::invalid_argument("malformed loop: non nearest-neighbour step");
  if (n % 2 != 0) throw std::invalid_argument("malformed loop: odd length");

  const std::size_t shift = least_rotation(cycle);
  std::rotate(cycle.begin(), cycle.begin() + static_cast<std::ptrdiff_t>(shift), cycle.end());

  // Smallest period from the prefix function.
  std::vector<std::size_t> pi(n, 0);
  for (std::size_t i = 1; i < n; ++i) {
    std::size_t k = pi[i - 1];
    while (k > 0 && cycle[i] != cycle[k]) k = pi[k - 1];
    if (cycle[i] == cycle[k]) ++k;
    pi[i] = k;
  }
  std::size_t period = n - pi[n - 1];
  if (n % period != 0) period = n;

  UnrootedLoop out;
  out.cycle_ = std::move(cycle);
  out.rho_ = static_cast<int>(period);
  return out;
}

UnrootedLoop UnrootedLoop::from_rooted(const RootedLoop& loop) {
  validate(loop);
  return from_cycle(std::vector<Site>(loop.points.begin(), loop.points.end() - 1));
}

std::vector<std::pair<Site, int>> UnrootedLoop::multiplicities() const {
  std::vector<Site> sorted(cycle_);
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<Site, int>> out;
  for (const Site& s : sorted) {
    if (!out.empty() && out.back().first == s)
      ++out.back().second;
    else
      out.emplace_back(s, 1);
  }
  return out;
}

bool UnrootedLoop::touches(Site s) const { return std::find(cycle_.begin(), cycle_.end(), s) != cycle_.end(); }

RootedLoop UnrootedLoop::rotation(std::size_t shift) const {
  RootedLoop out;
  const std::size_t n = cycle_.size();
  out.points.reserve(n + 1);
  for (std::size_t i = 0; i <= n; ++i) out.points.push_back(cycle_[(shift + i) % n]);
  return out;
}

double rooted_weight(const RootedLoop& loop, const TransitionKernel& P) {
  validate(loop);
  const auto& dom = P.domain();
  double w = 1.0 / static_cast<double>(loop.length());
  for (std::size_t i = 0; i + 1 < loop.points.size(); ++i) {
    auto x = dom.index_of(loop.points[i]);
    if (!x || !dom.contains(loop.points[i + 1])) return 0.0;
    w *= P.step_weight(*x);
  }
  return w;
}

double unrooted_weight(const UnrootedLoop& loop, const TransitionKernel& P) {
  if (loop.length() == 0) throw std::invalid_argument("malformed loop: empty");
  const auto& dom = P.domain();
  double w = static_cast<double>(loop.rho()) / static_cast<double>(loop.length());
  for (const auto& [site, count] : loop.multiplicities()) {
    auto x = dom.index_of(site);
    if (!x) return 0.0;
    w *= std::pow(P.step_weight(*x), count);
  }
  return w;
}

namespace {

Eigen::VectorXd spectrum(const TransitionKernel& P) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(P.symmetrized(), Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw std::runtime_error("eigenvalue computation failed");
  return eig.eigenvalues();
}

// sum_{n > N} r^n / (2n) for 0 <= r < 1.
double even_length_tail(double r, long N) {
  if (r <= 0.0) return 0.0;
  if (r >= 1.0) throw std::runtime_error("spectral radius >= 1");
  if (r < 0.99) {
    double term = std::pow(r, static_cast<double>(N + 1));
    double sum = 0.0;
    for (long n = N + 1; term > 0.0; ++n) {
      const double add = term / (2.0 * static_cast<double>(n));
      sum += add;
      if (add < 1e-18 * sum || add < 1e-300) break;
      term *= r;
    }
    return sum;
  }
  double head = 0.0, power = 1.0;
  for (long n = 1; n <= N; ++n) {
    power *= r;
    head += power / static_cast<double>(n);
  }
  return std::max(0.0, 0.5 * (-std::log1p(-r) - head));
}

}  // namespace

ReturnTable return_probabilities(const TransitionKernel& P, int maxlen) {
  if (maxlen < 2 || maxlen % 2 != 0) throw std::invalid_argument("maxlen must be even and >= 2");
  const std::size_t n = P.size();
  const std::size_t half = static_cast<std::size_t>(maxlen / 2);
  std::vector<std::vector<double>> q(half + 1, std::vector<double>(n, 0.0));
  for (std::size_t x = 0; x < n; ++x) q[0][x] = 1.0;

  const double work = static_cast<double>(n) * static_cast<double>(n) * maxlen;
  if (work <= 5e8) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(n)), next;
    for (std::size_t x = 0; x < n; ++x) {
      v.setZero();
      v[static_cast<Eigen::Index>(x)] = 1.0;
      for (int r = 1; r <= maxlen; ++r) {
        P.apply(v, next);
        v.swap(next);
        if (r % 2 == 0) q[static_cast<std::size_t>(r / 2)][x] = v[static_cast<Eigen::Index>(x)];
      }
    }
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(P.symmetrized());
    if (eig.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
    const Eigen::VectorXd r2 = eig.eigenvalues().array().square();
    const Eigen::MatrixXd U2 = eig.eigenvectors().array().square();
    Eigen::VectorXd power = Eigen::VectorXd::Ones(r2.size());
    for (std::size_t m = 1; m <= half; ++m) {
      power = power.cwiseProduct(r2);
      const Eigen::VectorXd diag = U2 * power;
      for (std::size_t x = 0; x < n; ++x) q[m][x] = std::max(0.0, diag[static_cast<Eigen::Index>(x)]);
    }
  }
  return ReturnTable(maxlen, std::move(q));
}

double total_mass(const TransitionKernel& P) {
  const PrecisionMatrix A = precision_matrix(P.domain(), P.killing());
  double logdet_a = 0.0;
  try {
    logdet_a = log_determinant(A.A);
  } catch (const std::runtime_error&) {
    throw std::runtime_error("spectral radius of P >= 1: I - P is singular");
  }
  double log_diag = 0.0;
  for (double k : P.killing().k) log_diag += std::log(k + 4.0);
  // det(I - P) = det(A) / prod(k + 4)
  return -(logdet_a - log_diag);
}

double truncation_tail(const TransitionKernel& P, int maxlen) {
  const long N = std::max(0, maxlen) / 2;
  if (P.size() <= kDenseGreenLimit) {
    double tail = 0.0;
    const Eigen::VectorXd rho = spectrum(P);
    for (Eigen::Index i = 0; i < rho.size(); ++i) tail += even_length_tail(rho[i] * rho[i], N);
    return tail;
  }
  // Large domains: every eigenvalue is bounded by the spectral radius.
  Eigen::VectorXd v = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(P.size())), next;
  double radius = 0.0;
  for (int it = 0; it < 2000; ++it) {
    P.apply(v, next);
    const double norm = next.norm();
    if (norm == 0.0) return 0.0;
    const double estimate = norm / v.norm();
    v = next / norm;
    if (std::abs(estimate - radius) < 1e-12) {
      radius = estimate;
      break;
    }
    radius = estimate;
  }
  radius = std::min(radius * (1.0 + 1e-6), 1.0 - 1e-15);
  return static_cast<double>(P.size()) * even_length_tail(radius * radius, N);
}

std::vector<WeightedLoop> enumerate_loops(const TransitionKernel& P, int maxlen) {
  const auto& dom = P.domain();
  const std::size_t n = dom.size();
  if (maxlen < 2) return {};
  const bool small = maxlen <= 12 && n <= 16;
  if (!small) {
    // Closed-walk count: sum_len tr(Adj^len) = sum_len 4^len tr(P0^len).
    const TransitionKernel P0(dom, zero_killing(dom));
    const Eigen::VectorXd rho = spectrum(P0);
    double walks = 0.0;
    for (int len = 2; len <= maxlen; len += 2)
      for (Eigen::Index i = 0; i < rho.size(); ++i) walks += std::pow(4.0 * std::abs(rho[i]), len);
    if (walks > kEnumerationWalkBudget) {
      std::ostringstream msg;
      msg << "enumeration budget exceeded: ~" << walks << " closed walks for maxlen " << maxlen << " on "
          << n << " sites";
      throw std::invalid_argument(msg.str());
    }
  }

  std::vector<WeightedLoop> out;
  std::vector<Site> path;
  path.reserve(static_cast<std::size_t>(maxlen));
  std::vector<std::size_t> slot;  // next neighbour slot to try at each depth
  std::vector<std::size_t> idx;

  for (std::size_t root = 0; root < n; ++root) {
    const Site r = dom.site(root);
    path.assign(1, r);
    idx.assign(1, root);
    slot.assign(1, 0);
    while (!idx.empty()) {
      const std::size_t depth = idx.size() - 1;  // steps taken so far
      if (slot[depth] >= 4) {
        path.pop_back();
        idx.pop_back();
        slot.pop_back();
        continue;
      }
      const int j = dom.neighbor_slots(idx[depth])[slot[depth]++];
      if (j == LatticeDomain::kNoNeighbor) continue;
      const Site s = dom.site(static_cast<std::size_t>(j));
      // A canonical cycle starts at its least site.
      if (s < r) continue;
      const std::size_t steps = depth + 1;
      const int remaining = maxlen - static_cast<int>(steps);
      if (std::abs(s.x - r.x) + std::abs(s.y - r.y) > remaining) continue;
      if (s == r) {
        if (least_rotation(path) == 0) {
          UnrootedLoop loop = UnrootedLoop::from_cycle(path);
          const double w = unrooted_weight(loop, P);
          out.push_back({std::move(loop), w});
        }
      }
      if (remaining > 0) {
        path.push_back(s);
        idx.push_back(static_cast<std::size_t>(j));
        slot.push_back(0);
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const WeightedLoop& a, const WeightedLoop& b) { return a.loop < b.loop; });
  return out;
}

}  // namespace loopsoup
