#include "loopsoup/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/poisson.hpp>

namespace loopsoup {

MeanEstimate mean_stderr(std::span<const double> x) {
  if (x.size() < 2) throw std::invalid_argument("need at least two values for a standard error");
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n), x.size()};
}

MeanEstimate proportion(std::size_t hits, std::size_t n) {
  if (n == 0) throw std::invalid_argument("empty sample");
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(n)), n};
}

GofResult poisson_gof(std::span<const long> counts, double mean) {
  if (counts.size() < kMinStatSample) throw std::invalid_argument("sample too small for a goodness-of-fit test");
  if (!(mean > 0.0)) throw std::invalid_argument("Poisson mean must be positive");
  const double n = static_cast<double>(counts.size());
  const boost::math::poisson_distribution<double> law(mean);

  // Bins 0..K-1 and a tail bin [K, inf), with K as large as the expected >= 5 rule allows.
  long K = 0;
  while (n * boost::math::pdf(law, static_cast<double>(K)) >= 5.0 &&
         n * boost::math::cdf(boost::math::complement(law, static_cast<double>(K))) >= 5.0)
    ++K;
  if (K < 1) throw std::invalid_argument("expected counts too small for a chi-square test");

  GofResult out;
  out.observed.assign(static_cast<std::size_t>(K) + 1, 0.0);
  out.expected.assign(static_cast<std::size_t>(K) + 1, 0.0);
  for (long c : counts) {
    if (c < 0) throw std::invalid_argument("negative count");
    out.observed[static_cast<std::size_t>(std::min(c, K))] += 1.0;
  }
  double below = 0.0;
  for (long k = 0; k < K; ++k) {
    const double p = boost::math::pdf(law, static_cast<double>(k));
    out.expected[static_cast<std::size_t>(k)] = n * p;
    below += p;
  }
  out.expected[static_cast<std::size_t>(K)] = n * std::max(0.0, 1.0 - below);
  for (std::size_t i = 0; i < out.observed.size(); ++i) {
    const double d = out.observed[i] - out.expected[i];
    out.statistic += d * d / out.expected[i];
  }
  out.dof = static_cast<int>(out.observed.size()) - 1;
  const boost::math::chi_squared_distribution<double> chi(out.dof);
  out.p_value = boost::math::cdf(boost::math::complement(chi, out.statistic));
  return out;
}

double kolmogorov_q(double t) {
  if (t < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * t * t);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-300) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

KsResult two_sample_ks(std::span<const double> a, std::span<const double> b) {
  if (a.size() < kMinStatSample || b.size() < kMinStatSample)
    throw std::invalid_argument("sample too small for a KS test");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n = static_cast<double>(x.size()), m = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  const double ne = n * m / (n + m);
  const double s = std::sqrt(ne);
  return {d, kolmogorov_q((s + 0.12 + 0.11 / s) * d)};
}

KsResult one_sample_ks(std::span<const double> a, const std::function<double(double)>& cdf) {
  if (a.size() < kMinStatSample) throw std::invalid_argument("sample too small for a KS test");
  std::vector<double> x(a.begin(), a.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double F = cdf(x[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
  }
  const double s = std::sqrt(n);
  return {d, kolmogorov_q((s + 0.12 + 0.11 / s) * d)};
}

MomentMatrix second_moments(std::span<const std::vector<double>> samples) {
  if (samples.size() < 2) throw std::invalid_argument("need at least two replicas");
  MomentMatrix out;
  out.dim = samples.front().size();
  const std::size_t d = out.dim;
  std::vector<double> sum(d * d, 0.0), sumsq(d * d, 0.0);
  for (const auto& s : samples) {
    if (s.size() != d) throw std::invalid_argument("replicas differ in dimension");
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i; j < d; ++j) {
        const double p = s[i] * s[j];
        sum[i * d + j] += p;
        sumsq[i * d + j] += p * p;
      }
  }
  const double n = static_cast<double>(samples.size());
  out.value.assign(d * d, 0.0);
  out.stderr_.assign(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) {
      const double mean = sum[i * d + j] / n;
      const double var = std::max(0.0, (sumsq[i * d + j] - n * mean * mean) / (n - 1.0));
      out.value[i * d + j] = out.value[j * d + i] = mean;
      out.stderr_[i * d + j] = out.stderr_[j * d + i] = std::sqrt(var / n);
    }
  return out;
}

}  // namespace loopsoup
