#include "loopsoup/occupation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

namespace loopsoup {

namespace {

const std::uint64_t kOccupationTag = stream_tag("occupation");
const std::uint64_t kBaseTag = stream_tag("occupation-base");

void add_loop(std::vector<double>& L, const UnrootedLoop& loop, const LatticeDomain& domain, const KillingRates& k,
              Xoshiro256& rng) {
  std::exponential_distribution<double> tau(1.0);
  for (const Site& s : loop.cycle()) {
    const auto i = domain.index_of(s);
    if (!i) throw std::invalid_argument("loop visits a site outside the domain");
    L[*i] += tau(rng) / (k[*i] + 4.0);
  }
}

}  // namespace

std::vector<std::pair<std::size_t, double>> occupation_time(const UnrootedLoop& loop, const LatticeDomain& domain,
                                                            const KillingRates& k, Xoshiro256& rng) {
  std::exponential_distribution<double> tau(1.0);
  std::map<std::size_t, double> acc;
  for (const Site& s : loop.cycle()) {
    const auto i = domain.index_of(s);
    if (!i) throw std::invalid_argument("loop visits a site outside the domain");
    acc[*i] += tau(rng) / (k[*i] + 4.0);
  }
  return {acc.begin(), acc.end()};
}

Xoshiro256 occupation_stream(std::uint64_t loop_id, std::uint64_t dressing_seed) {
  return make_stream(loop_id, {kOccupationTag, dressing_seed});
}

std::vector<double> base_occupation(const LatticeDomain& domain, const KillingRates& k, std::uint64_t dressing_seed,
                                    std::uint64_t replica) {
  if (k.size() != domain.size()) throw std::invalid_argument("killing rates do not match the domain");
  Xoshiro256 rng = make_stream(dressing_seed, {kBaseTag, replica});
  std::vector<double> L(domain.size());
  for (std::size_t i = 0; i < domain.size(); ++i)
    L[i] = std::gamma_distribution<double>(0.5, 1.0 / (k[i] + 4.0))(rng);
  return L;
}

OccupationField occupation_field(const LoopSoupRealization& soup, const LatticeDomain& domain,
                                 std::uint64_t dressing_seed) {
  return occupation_field(soup, domain, soup.killing, dressing_seed);
}

OccupationField occupation_field(const LoopSoupRealization& soup, const LatticeDomain& domain, const KillingRates& k,
                                 std::uint64_t dressing_seed) {
  OccupationField field;
  field.L = base_occupation(domain, k, dressing_seed, soup.replica);
  for (const SoupLoop& item : soup.loops) {
    Xoshiro256 rng = occupation_stream(item.id, dressing_seed);
    add_loop(field.L, item.loop, domain, k, rng);
  }
  return field;
}

Estimate laplace_mc(std::span<const OccupationField> fields, std::span<const double> v) {
  if (fields.size() < kMinLaplaceReplicas) throw std::invalid_argument("laplace_mc needs at least 1000 replicas");
  const bool zero = std::all_of(v.begin(), v.end(), [](double a) { return a == 0.0; });
  if (zero) return {1.0, 0.0};
  double sum = 0.0, sumsq = 0.0;
  for (const OccupationField& f : fields) {
    if (f.size() != v.size()) throw std::invalid_argument("field and v sizes differ");
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * f.L[i];
    const double e = std::exp(-s);
    sum += e;
    sumsq += e * e;
  }
  const double n = static_cast<double>(fields.size());
  const double mean = sum / n;
  const double var = std::max(0.0, (sumsq - n * mean * mean) / (n - 1.0));
  return {mean, std::sqrt(var / n)};
}

double laplace_exact(const PrecisionMatrix& A, std::span<const double> v) {
  if (v.size() != A.size()) throw std::invalid_argument("v size does not match the precision matrix");
  Eigen::SparseMatrix<double> B = A.A;
  for (std::size_t i = 0; i < v.size(); ++i) B.coeffRef(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += v[i];
  double perturbed;
  try {
    perturbed = log_determinant(B);
  } catch (const std::exception&) {
    throw std::invalid_argument("A + diag(v) is not positive definite");
  }
  return std::exp(0.5 * (log_determinant(A.A) - perturbed));
}

double laplace_truncated(const LatticeDomain& domain, const KillingRates& k, std::span<const double> v, int maxlen) {
  if (v.size() != domain.size()) throw std::invalid_argument("v size does not match the domain");
  KillingRates kv = k;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] < 0.0) throw std::invalid_argument("truncated transform needs v >= 0");
    kv.k[i] += v[i];
  }
  const double exact = laplace_exact(precision_matrix(domain, k), v);
  const double tk = truncation_tail(transition_kernel(domain, k), maxlen);
  const double tkv = truncation_tail(transition_kernel(domain, kv), maxlen);
  return exact * std::exp(0.5 * (tk - tkv));
}

}  // namespace loopsoup
