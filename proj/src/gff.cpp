#include "loopsoup/gff.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace loopsoup {

namespace {

const std::uint64_t kGffTag = stream_tag("gff");
const std::uint64_t kSignTag = stream_tag("signs");
const std::uint64_t kPerturbSoupTag = stream_tag("perturbation-soup");
const std::uint64_t kPerturbDressTag = stream_tag("perturbation-dress");
const std::uint64_t kPerturbCheckTag = stream_tag("perturbation-check");

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

KillingRates restrict_killing(const LatticeDomain& from, const KillingRates& k, const LatticeDomain& to) {
  KillingRates out;
  out.k.resize(to.size());
  for (std::size_t i = 0; i < to.size(); ++i) {
    const auto j = from.index_of(to.site(i));
    if (!j) throw std::invalid_argument("subdomain is not contained in the domain");
    out.k[i] = k[*j];
  }
  return out;
}

double truncated_mass(const std::vector<Site>& sites, const LatticeDomain& from, const KillingRates& k, int maxlen) {
  if (sites.empty()) return 0.0;
  LatticeDomain d(sites);
  const TransitionKernel P = transition_kernel(d, restrict_killing(from, k, d));
  return total_mass(P) - truncation_tail(P, maxlen);
}

}  // namespace

GffSampler::GffSampler(const Eigen::MatrixXd& G) {
  if (G.rows() != G.cols() || G.rows() == 0) throw std::invalid_argument("covariance must be square and nonempty");
  if (!G.isApprox(G.transpose(), 1e-12)) throw std::invalid_argument("covariance is not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success) throw std::runtime_error("covariance factorization failed");
  factor_ = llt.matrixL();
}

GffSample GffSampler::sample(Xoshiro256& rng) const {
  const Eigen::Index n = factor_.rows();
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = normal(rng);
  const Eigen::VectorXd phi = factor_.triangularView<Eigen::Lower>() * z;
  return {std::vector<double>(phi.data(), phi.data() + n)};
}

GffSample sample_gff(const Eigen::MatrixXd& G, std::uint64_t seed) {
  GffSampler sampler(G);
  Xoshiro256 rng = make_stream(seed, {kGffTag});
  return sampler.sample(rng);
}

std::vector<Coupling> ising_couplings(const LatticeDomain& domain, std::span<const double> L) {
  if (L.size() != domain.size()) throw std::invalid_argument("occupation field does not match the domain");
  for (double v : L)
    if (!(v > 0.0)) throw std::invalid_argument("occupation field must be positive");
  std::vector<Coupling> out;
  for (std::size_t i = 0; i < domain.size(); ++i) {
    for (int j : domain.neighbor_slots(i)) {
      if (j == LatticeDomain::kNoNeighbor || static_cast<std::size_t>(j) < i) continue;
      out.push_back({i, static_cast<std::size_t>(j), 2.0 * std::sqrt(L[i] * L[static_cast<std::size_t>(j)])});
    }
  }
  return out;
}

ExactSignLaw::ExactSignLaw(std::size_t n, std::span<const Coupling> couplings) : n_(n) {
  if (n > kExactSignLimit) throw std::invalid_argument("exact sign law limited to 16 sites");
  const std::size_t count = std::size_t{1} << n;
  std::vector<double> logw(count, 0.0);
  for (std::size_t c = 0; c < count; ++c) {
    double e = 0.0;
    for (const Coupling& cp : couplings) {
      const bool same = ((c >> cp.a) & 1U) == ((c >> cp.b) & 1U);
      e += same ? cp.J : -cp.J;
    }
    logw[c] = e;
  }
  const double top = *std::max_element(logw.begin(), logw.end());
  p_.resize(count);
  double z = 0.0;
  for (std::size_t c = 0; c < count; ++c) z += (p_[c] = std::exp(logw[c] - top));
  cdf_.resize(count);
  double acc = 0.0;
  for (std::size_t c = 0; c < count; ++c) {
    p_[c] /= z;
    cdf_[c] = (acc += p_[c]);
  }
}

double ExactSignLaw::prob_equal(std::size_t a, std::size_t b) const {
  double s = 0.0;
  for (std::size_t c = 0; c < p_.size(); ++c)
    if (((c >> a) & 1U) == ((c >> b) & 1U)) s += p_[c];
  return s;
}

double ExactSignLaw::prob_plus(std::size_t a) const {
  double s = 0.0;
  for (std::size_t c = 0; c < p_.size(); ++c)
    if ((c >> a) & 1U) s += p_[c];
  return s;
}

SignField ExactSignLaw::sample(Xoshiro256& rng) const {
  const double u = rng.uniform() * cdf_.back();
  auto c = static_cast<std::size_t>(std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin());
  c = std::min(c, cdf_.size() - 1);
  SignField S;
  S.S.resize(n_);
  for (std::size_t i = 0; i < n_; ++i) S.S[i] = ((c >> i) & 1U) ? 1 : -1;
  return S;
}

SignSampler::SignSampler(std::size_t n, std::vector<Coupling> couplings, SignMethod method)
    : n_(n), couplings_(std::move(couplings)), method_(method), adj_(n) {
  for (const Coupling& c : couplings_) {
    if (c.a >= n || c.b >= n) throw std::invalid_argument("coupling refers to a missing site");
    if (c.J < 0.0) throw std::invalid_argument("couplings must be ferromagnetic");
    adj_[c.a].emplace_back(c.b, c.J);
    adj_[c.b].emplace_back(c.a, c.J);
  }
}

void SignSampler::sweep(std::vector<int>& S, Xoshiro256& rng) const {
  if (method_ == SignMethod::HeatBath) {
    for (std::size_t i = 0; i < n_; ++i) {
      double h = 0.0;
      for (const auto& [j, J] : adj_[i]) h += J * S[j];
      S[i] = rng.uniform() * (1.0 + std::exp(-2.0 * h)) < 1.0 ? 1 : -1;
    }
    return;
  }
  // Swendsen-Wang: open bonds between aligned neighbours with probability
  // 1 - e^{-2J}, then flip each bond cluster with probability 1/2.
  std::vector<std::size_t> parent(n_);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  for (const Coupling& c : couplings_) {
    if (S[c.a] != S[c.b]) continue;
    if (rng.uniform() < -std::expm1(-2.0 * c.J)) {
      const std::size_t ra = find_root(parent, c.a), rb = find_root(parent, c.b);
      if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
    }
  }
  std::vector<signed char> flip(n_, 0);
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t r = find_root(parent, i);
    if (r == i) flip[i] = rng.uniform() < 0.5 ? 1 : -1;
  }
  for (std::size_t i = 0; i < n_; ++i)
    if (flip[find_root(parent, i)] < 0) S[i] = -S[i];
}

SignField SignSampler::sample(Xoshiro256& rng, int sweeps) const {
  SignField out;
  out.S.resize(n_);
  for (auto& s : out.S) s = rng.uniform() < 0.5 ? 1 : -1;
  for (int t = 0; t < sweeps; ++t) sweep(out.S, rng);
  return out;
}

double SignSampler::energy(const std::vector<int>& S) const {
  double e = 0.0;
  for (const Coupling& c : couplings_) e -= c.J * S[c.a] * S[c.b];
  return e;
}

int SignSampler::calibrate_burn_in(Xoshiro256& rng, int min_sweeps, int pilot) const {
  if (couplings_.empty()) return min_sweeps;
  std::vector<int> S(n_);
  for (auto& s : S) s = rng.uniform() < 0.5 ? 1 : -1;
  std::vector<double> e(static_cast<std::size_t>(pilot));
  for (int t = 0; t < pilot; ++t) {
    sweep(S, rng);
    e[static_cast<std::size_t>(t)] = energy(S);
  }
  const double mean = std::accumulate(e.begin(), e.end(), 0.0) / pilot;
  double c0 = 0.0;
  for (double v : e) c0 += (v - mean) * (v - mean);
  c0 /= pilot;
  if (c0 <= 0.0) return min_sweeps;
  // Integrated autocorrelation time with a self-consistent window (c = 5).
  double tau = 0.5;
  for (int lag = 1; lag < pilot / 2; ++lag) {
    double c = 0.0;
    for (int t = 0; t + lag < pilot; ++t)
      c += (e[static_cast<std::size_t>(t)] - mean) * (e[static_cast<std::size_t>(t + lag)] - mean);
    tau += c / (pilot - lag) / c0;
    if (lag >= 5.0 * tau) break;
  }
  return std::max(min_sweeps, static_cast<int>(std::ceil(20.0 * std::max(tau, 0.5))));
}

SignField sample_signs(const LatticeDomain& domain, std::span<const double> L, std::uint64_t seed, int sweeps) {
  if (sweeps < 1) throw std::invalid_argument("sweeps must be positive");
  SignSampler sampler(domain.size(), ising_couplings(domain, L));
  Xoshiro256 rng = make_stream(seed, {kSignTag});
  return sampler.sample(rng, sweeps);
}

std::vector<double> isomorphism_field(std::span<const double> L, const SignField& S) {
  if (L.size() != S.S.size()) throw std::invalid_argument("occupation and sign fields differ in size");
  std::vector<double> psi(L.size());
  for (std::size_t i = 0; i < L.size(); ++i) psi[i] = std::sqrt(2.0 * L[i]) * S.S[i];
  return psi;
}

PerturbationCoupling::PerturbationCoupling(const LatticeDomain& D, const LatticeDomain& Dprime, Site x0,
                                           const MassFunction& m, int maxlen, int sweeps)
    : D_(D),
      Dp_(Dprime),
      x0site_(x0),
      kD_(killing_from_mass(D, m)),
      sampler_(transition_kernel(D, kD_), maxlen),
      maxlen_(maxlen),
      sweeps_(sweeps) {
  for (const Site& s : Dp_.sites())
    if (!D_.contains(s)) throw std::invalid_argument("D' is not contained in D");
  const auto a = D_.index_of(x0), b = Dp_.index_of(x0);
  if (!a || !b) throw std::invalid_argument("x0 outside D'");
  x0_ = *a;
  x0p_ = *b;
  kDp_ = restrict_killing(D_, kD_, Dp_);
}

bool PerturbationCoupling::crosses(const UnrootedLoop& loop) const {
  if (!loop.touches(x0site_)) return false;
  for (const Site& s : loop.cycle())
    if (!Dp_.contains(s)) return true;
  return false;
}

PerturbationDraw PerturbationCoupling::draw(std::uint64_t seed, std::uint64_t replica) const {
  const std::uint64_t dress = derive_key(seed, {kPerturbDressTag});
  const LoopSoupRealization soup = sampler_.sample(0.5, derive_key(seed, {kPerturbSoupTag}), replica);

  PerturbationDraw out;
  std::vector<double> L = base_occupation(D_, kD_, dress, replica);
  std::vector<double> Lp(Dp_.size());
  for (std::size_t i = 0; i < Dp_.size(); ++i) Lp[i] = L[*D_.index_of(Dp_.site(i))];

  for (const SoupLoop& item : soup.loops) {
    bool inside = true;
    for (const Site& s : item.loop.cycle())
      if (!Dp_.contains(s)) inside = false;
    if (crosses(item.loop)) out.touched = true;
    // Same tau sequence for both fields.
    Xoshiro256 rng = occupation_stream(item.id, dress);
    Xoshiro256 rng_copy = rng;
    std::exponential_distribution<double> tau(1.0), tau_copy(1.0);
    for (const Site& s : item.loop.cycle()) {
      const std::size_t i = *D_.index_of(s);
      L[i] += tau(rng) / (kD_[i] + 4.0);
      if (inside) {
        const std::size_t j = *Dp_.index_of(s);
        Lp[j] += tau_copy(rng_copy) / (kDp_[j] + 4.0);
      }
    }
  }

  SignSampler signs(D_.size(), ising_couplings(D_, L));
  SignSampler signs_p(Dp_.size(), ising_couplings(Dp_, Lp));
  Xoshiro256 rng_s = make_stream(seed, {kSignTag, replica, 0});
  Xoshiro256 rng_sp = make_stream(seed, {kSignTag, replica, 1});
  SignField S = signs.sample(rng_s, sweeps_);
  SignField Sp = signs_p.sample(rng_sp, sweeps_);
  // The sign law is invariant under a global flip, so matching the sign at x0
  // keeps the law of the D' field.
  if (!out.touched && Sp.S[x0p_] != S.S[x0_])
    for (int& s : Sp.S) s = -s;

  out.phi = isomorphism_field(L, S);
  out.phi_prime = isomorphism_field(Lp, Sp);
  return out;
}

bool PerturbationCoupling::loop_event(std::uint64_t seed, std::uint64_t replica) const {
  const LoopSoupRealization soup = sampler_.sample(0.5, derive_key(seed, {kPerturbCheckTag}), replica);
  for (const SoupLoop& item : soup.loops)
    if (crosses(item.loop)) return true;
  return false;
}

double PerturbationCoupling::event_probability() const {
  auto without = [&](const LatticeDomain& d) {
    std::vector<Site> s;
    for (const Site& p : d.sites())
      if (p != x0site_) s.push_back(p);
    return s;
  };
  const std::vector<Site> all(D_.sites().begin(), D_.sites().end());
  const std::vector<Site> inner(Dp_.sites().begin(), Dp_.sites().end());
  const double mass = truncated_mass(all, D_, kD_, maxlen_) - truncated_mass(without(D_), D_, kD_, maxlen_) -
                      truncated_mass(inner, D_, kD_, maxlen_) + truncated_mass(without(Dp_), D_, kD_, maxlen_);
  return -std::expm1(-0.5 * std::max(0.0, mass));
}

}  // namespace loopsoup
