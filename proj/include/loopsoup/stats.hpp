#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace loopsoup {

inline constexpr std::size_t kMinStatSample = 30;

struct MeanEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t n = 0;
};

// Sample mean and sd / sqrt(n) (n >= 2).
MeanEstimate mean_stderr(std::span<const double> x);

// Proportion and sqrt(p (1 - p) / n).
MeanEstimate proportion(std::size_t hits, std::size_t n);

struct GofResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 0.0;
  std::vector<double> observed;
  std::vector<double> expected;
};

// Pearson chi-square test of counts against Poisson(mean). Bins 0, 1, 2, ...
// are pooled from the top until every expected count is >= 5.
GofResult poisson_gof(std::span<const long> counts, double mean);

struct KsResult {
  double statistic = 0.0;
  double p_value = 0.0;
};

// Two-sample Kolmogorov-Smirnov with the asymptotic p-value
// Q((sqrt(ne) + 0.12 + 0.11 / sqrt(ne)) D), ne = n m / (n + m).
KsResult two_sample_ks(std::span<const double> a, std::span<const double> b);
// One-sample test against a continuous CDF.
KsResult one_sample_ks(std::span<const double> a, const std::function<double(double)>& cdf);
// Kolmogorov tail Q(t) = 2 sum (-1)^{k-1} exp(-2 k^2 t^2).
double kolmogorov_q(double t);

// Second-moment estimate E[x_i x_j] (mean known to be zero) with the standard
// error of the product sample mean. samples[r] is replica r.
struct MomentMatrix {
  std::size_t dim = 0;
  std::vector<double> value;   // dim * dim
  std::vector<double> stderr_;  // dim * dim
  double at(std::size_t i, std::size_t j) const { return value[i * dim + j]; }
  double se(std::size_t i, std::size_t j) const { return stderr_[i * dim + j]; }
};
MomentMatrix second_moments(std::span<const std::vector<double>> samples);

}  // namespace loopsoup
