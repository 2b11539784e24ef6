#include "loopsoup/soup_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace loopsoup {

namespace {

const std::uint64_t kSoupTag = stream_tag("rw-soup");
const std::uint64_t kLoopIdTag = stream_tag("rw-loop");
const std::uint64_t kPlaneSoupTag = stream_tag("plane-soup");

// Above this many stored doubles the h-transform columns are recomputed per bridge.
constexpr double kBridgeCacheLimit = 2e7;

std::vector<Eigen::VectorXd> h_columns(const TransitionKernel& P, std::size_t x, int length) {
  const auto n = static_cast<Eigen::Index>(P.size());
  std::vector<Eigen::VectorXd> h(static_cast<std::size_t>(length));
  h[0] = Eigen::VectorXd::Zero(n);
  h[0][static_cast<Eigen::Index>(x)] = 1.0;
  for (int r = 1; r < length; ++r) {
    P.apply(h[r - 1], h[r]);
    // Only ratios matter; rescale so long bridges do not underflow.
    const double top = h[r].maxCoeff();
    if (top > 0.0) h[r] /= top;
  }
  return h;
}

RootedLoop walk_bridge(std::size_t x, int length, const TransitionKernel& P, const std::vector<Eigen::VectorXd>& h,
                       Xoshiro256& rng) {
  const LatticeDomain& D = P.domain();
  RootedLoop loop;
  loop.points.reserve(static_cast<std::size_t>(length) + 1);
  std::size_t z = x;
  loop.points.push_back(D.site(z));
  for (int r = length; r >= 1; --r) {
    const auto& slots = D.neighbor_slots(z);
    const Eigen::VectorXd& next = h[static_cast<std::size_t>(r - 1)];
    double w[4];
    double total = 0.0;
    for (int j = 0; j < 4; ++j) {
      w[j] = slots[j] == LatticeDomain::kNoNeighbor ? 0.0 : next[slots[j]];
      total += w[j];
    }
    if (!(total > 0.0)) throw std::runtime_error("bridge reached a dead end");
    double u = rng.uniform() * total;
    int pick = -1;
    for (int j = 0; j < 4; ++j) {
      if (w[j] <= 0.0) continue;
      pick = j;
      if (u < w[j]) break;
      u -= w[j];
    }
    z = static_cast<std::size_t>(slots[pick]);
    loop.points.push_back(D.site(z));
  }
  return loop;
}

}  // namespace

void SoupConfig::validate() const {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (maxlen < 2 || maxlen % 2 != 0) throw std::invalid_argument("maxlen must be even and >= 2");
  if (mass.kind == MassSpec::Kind::Constant && mass.c0 < 0.0) throw std::invalid_argument("negative mass");
}

RootedLoop sample_bridge(std::size_t x, int length, const TransitionKernel& P, Xoshiro256& rng) {
  if (length < 2 || length % 2 != 0) throw std::invalid_argument("bridge length must be even and >= 2");
  if (x >= P.size()) throw std::out_of_range("bridge root outside the domain");
  auto h = h_columns(P, x, length);
  Eigen::VectorXd last;
  P.apply(h[static_cast<std::size_t>(length - 1)], last);
  if (!(last[static_cast<Eigen::Index>(x)] > 0.0)) throw std::invalid_argument("zero return probability");
  return walk_bridge(x, length, P, h, rng);
}

SoupSampler::SoupSampler(TransitionKernel P, int maxlen)
    : P_(std::move(P)), maxlen_(maxlen), q_(return_probabilities(P_, maxlen)) {
  const double n = static_cast<double>(P_.size());
  if (n * n * maxlen_ <= kBridgeCacheLimit) {
    h_.resize(P_.size());
    for (std::size_t x = 0; x < P_.size(); ++x) h_[x] = h_columns(P_, x, maxlen_);
  }
}

const std::vector<Eigen::VectorXd>* SoupSampler::cached_h(std::size_t x) const {
  return h_.empty() ? nullptr : &h_[x];
}

double SoupSampler::total_intensity() const {
  double total = 0.0;
  for (std::size_t x = 0; x < P_.size(); ++x)
    for (int len = 2; len <= maxlen_; len += 2) total += intensity(x, len);
  return total;
}

RootedLoop SoupSampler::bridge(std::size_t x, int length, Xoshiro256& rng) const {
  if (length > maxlen_) throw std::invalid_argument("bridge longer than maxlen");
  if (!(q_.at(length, x) > 0.0)) throw std::invalid_argument("zero return probability");
  if (const auto* h = cached_h(x)) return walk_bridge(x, length, P_, *h, rng);
  return walk_bridge(x, length, P_, h_columns(P_, x, length), rng);
}

void SoupSampler::sample_layer(std::vector<SoupLoop>& out, double lambda, std::uint64_t seed, std::uint64_t replica,
                               std::uint64_t layer) const {
  if (!(lambda >= 0.0)) throw std::invalid_argument("negative intensity");
  if (lambda == 0.0) return;
  for (std::size_t x = 0; x < P_.size(); ++x) {
    for (int len = 2; len <= maxlen_; len += 2) {
      const double mean = lambda * intensity(x, len);
      if (!(mean > 0.0)) continue;
      const std::uint64_t key = derive_key(seed, {kSoupTag, replica, layer, x, static_cast<std::uint64_t>(len)});
      Xoshiro256 rng(key);
      const long count = std::poisson_distribution<long>(mean)(rng);
      for (long i = 0; i < count; ++i) {
        RootedLoop rooted = bridge(x, len, rng);
        SoupLoop item;
        item.loop = UnrootedLoop::from_rooted(rooted);
        item.mark = std::exponential_distribution<double>(1.0)(rng);
        item.id = derive_key(key, {kLoopIdTag, static_cast<std::uint64_t>(i)});
        out.push_back(std::move(item));
      }
    }
  }
}

LoopSoupRealization SoupSampler::sample(double lambda, std::uint64_t seed, std::uint64_t replica) const {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  LoopSoupRealization soup;
  soup.lambda = lambda;
  soup.killing = P_.killing();
  soup.maxlen = maxlen_;
  soup.seed = seed;
  soup.replica = replica;
  sample_layer(soup.loops, lambda, seed, replica, 0);
  return soup;
}

LoopSoupRealization sample_critical_soup(const LatticeDomain& domain, double lambda, int maxlen, std::uint64_t seed,
                                         std::uint64_t replica) {
  SoupSampler sampler(transition_kernel(domain, zero_killing(domain)), maxlen);
  return sampler.sample(lambda, seed, replica);
}

double thinning_exponent(const UnrootedLoop& loop, const MassFunction& m) {
  double total = 0.0;
  for (const Site& s : loop.cycle()) {
    const double v = m(s.x, s.y);
    if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("mass undefined or negative on a visited site");
    total += v * v;
  }
  return total;
}

LoopSoupRealization thin_to_massive(const LoopSoupRealization& soup, const LatticeDomain& domain,
                                    const MassFunction& m) {
  if (soup.killing.size() != domain.size()) throw std::invalid_argument("soup and domain disagree");
  LoopSoupRealization out;
  out.lambda = soup.lambda;
  out.maxlen = soup.maxlen;
  out.seed = soup.seed;
  out.replica = soup.replica;
  out.killing.k.resize(domain.size());
  for (std::size_t i = 0; i < domain.size(); ++i) {
    const double v = m(domain.site(i).x, domain.site(i).y);
    if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("mass undefined or negative on the domain");
    out.killing.k[i] = (soup.killing[i] + 4.0) * std::exp(v * v) - 4.0;
  }
  for (const SoupLoop& item : soup.loops) {
    for (const Site& s : item.loop.cycle())
      if (!domain.contains(s)) throw std::invalid_argument("loop visits a site outside the domain");
    if (thinning_exponent(item.loop, m) <= item.mark) out.loops.push_back(item);
  }
  return out;
}

std::vector<double> intensity_table(const TransitionKernel& P, int maxlen) {
  const ReturnTable q = return_probabilities(P, maxlen);
  const std::size_t per = static_cast<std::size_t>(maxlen / 2);
  std::vector<double> table(P.size() * per);
  for (std::size_t x = 0; x < P.size(); ++x)
    for (int len = 2; len <= maxlen; len += 2) table[x * per + static_cast<std::size_t>(len / 2 - 1)] = q.rooted_mass(len, x);
  return table;
}

std::vector<double> thinned_intensity_table(const LatticeDomain& domain, const MassFunction& m, int maxlen) {
  if (maxlen < 2 || maxlen % 2 != 0) throw std::invalid_argument("maxlen must be even and >= 2");
  // Each rooted loop of the critical measure survives with probability
  // exp(-sum of m^2 over its visits); summing weight times survival over
  // loops rooted at x is the diagonal of (diag(e^{-m^2}) P_0)^len.
  const TransitionKernel P0 = transition_kernel(domain, zero_killing(domain));
  const auto n = static_cast<Eigen::Index>(domain.size());
  Eigen::VectorXd survive(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Site& s = domain.site(static_cast<std::size_t>(i));
    const double v = m(s.x, s.y);
    if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("mass undefined or negative on the domain");
    survive[i] = std::exp(-v * v);
  }
  const std::size_t per = static_cast<std::size_t>(maxlen / 2);
  std::vector<double> table(domain.size() * per);
  Eigen::VectorXd v, tmp;
  for (Eigen::Index x = 0; x < n; ++x) {
    v = Eigen::VectorXd::Zero(n);
    v[x] = 1.0;
    for (int len = 1; len <= maxlen; ++len) {
      P0.apply(v, tmp);
      v = survive.cwiseProduct(tmp);
      if (len % 2 == 0) table[static_cast<std::size_t>(x) * per + static_cast<std::size_t>(len / 2 - 1)] = v[x] / len;
    }
  }
  return table;
}

std::vector<LoopSoupRealization> layered_soup(const SoupSampler& sampler, std::span<const double> lambdas,
                                              std::uint64_t seed, std::uint64_t replica) {
  if (lambdas.empty()) throw std::invalid_argument("empty lambda list");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0.0)) throw std::invalid_argument("lambda must be positive");
    if (i > 0 && !(lambdas[i] > lambdas[i - 1])) throw std::invalid_argument("lambda list must be ascending");
  }
  std::vector<LoopSoupRealization> out;
  std::vector<SoupLoop> loops;
  double previous = 0.0;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    sampler.sample_layer(loops, lambdas[i] - previous, seed, replica, i);
    previous = lambdas[i];
    LoopSoupRealization soup;
    soup.loops = loops;
    soup.lambda = lambdas[i];
    soup.killing = sampler.kernel().killing();
    soup.maxlen = sampler.maxlen();
    soup.seed = seed;
    soup.replica = replica;
    out.push_back(std::move(soup));
  }
  return out;
}

RescaledLoop rescale_loop(const UnrootedLoop& loop, int N) {
  if (N < 2) throw std::invalid_argument("rescaling factor must be >= 2");
  RescaledLoop out;
  const double s = 1.0 / N;
  out.points.reserve(loop.length() + 1);
  for (const Site& p : loop.cycle()) out.points.emplace_back(s * p.x, s * p.y);
  if (!out.points.empty()) out.points.push_back(out.points.front());
  out.duration = static_cast<double>(loop.length()) / (2.0 * N * N);
  return out;
}

std::vector<RescaledLoop> rescale_soup(const LoopSoupRealization& soup, int N) {
  std::vector<RescaledLoop> out;
  out.reserve(soup.loops.size());
  for (const SoupLoop& item : soup.loops) {
    out.push_back(rescale_loop(item.loop, N));
    out.back().mark = item.mark;
  }
  return out;
}

double plane_return_probability(int length) {
  if (length < 0 || length % 2 != 0) return 0.0;
  // One coordinate in the rotated frame: C(2n, n) / 4^n.
  double a = 1.0;
  for (int k = 1; k <= length / 2; ++k) a *= (2.0 * k - 1.0) / (2.0 * k);
  return a * a;
}

RestrictionSampler::RestrictionSampler(LatticeDomain domain, int min_len, int max_len)
    : domain_(std::move(domain)), min_len_(std::max(2, min_len + (min_len % 2))), max_len_(max_len) {
  if (max_len_ < min_len_) throw std::invalid_argument("empty length range");
  double a = 1.0;
  for (int n = 1; 2 * n <= max_len_; ++n) {
    a *= (2.0 * n - 1.0) / (2.0 * n);
    if (2 * n < min_len_) continue;
    total_ += a * a / (2.0 * n);
    lengths_.push_back(2 * n);
    cdf_.push_back(total_);
  }
}

LoopSoupRealization RestrictionSampler::sample(double lambda, std::uint64_t seed, std::uint64_t replica) const {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  LoopSoupRealization soup;
  soup.lambda = lambda;
  soup.killing = zero_killing(domain_);
  soup.maxlen = max_len_;
  soup.seed = seed;
  soup.replica = replica;

  const std::uint64_t key = derive_key(seed, {kPlaneSoupTag, replica});
  Xoshiro256 rng(key);
  const long proposals = std::poisson_distribution<long>(lambda * proposal_intensity())(rng);
  std::vector<Site> path;
  for (long i = 0; i < proposals; ++i) {
    const auto root = static_cast<std::size_t>(rng.uniform() * static_cast<double>(domain_.size()));
    const double u = rng.uniform() * total_;
    const auto at = static_cast<std::size_t>(std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin());
    const int len = lengths_[std::min(at, lengths_.size() - 1)];
    const double mark = std::exponential_distribution<double>(1.0)(rng);
    // Independent +-1 bridges for u = x + y and v = x - y, stopped at the first exit.
    int up_u = len / 2, up_v = len / 2;
    Site s = domain_.site(std::min(root, domain_.size() - 1));
    path.assign(1, s);
    bool inside = true;
    for (int r = len; r > 0; --r) {
      const bool du = rng.uniform() * r < up_u;
      const bool dv = rng.uniform() * r < up_v;
      if (du) --up_u;
      if (dv) --up_v;
      const int su = du ? 1 : -1, sv = dv ? 1 : -1;
      s.x += (su + sv) / 2;
      s.y += (su - sv) / 2;
      if (!domain_.contains(s)) {
        inside = false;
        break;
      }
      if (r > 1) path.push_back(s);
    }
    if (!inside) continue;
    SoupLoop item;
    item.loop = UnrootedLoop::from_cycle(path);
    item.mark = mark;
    item.id = derive_key(key, {kLoopIdTag, static_cast<std::uint64_t>(i)});
    soup.loops.push_back(std::move(item));
  }
  return soup;
}

}  // namespace loopsoup
