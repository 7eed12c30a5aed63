#pragma once
// Test-only statistics: KS statistics and p-values, moments, batch-means MCSE.
// Deliberately independent of the library so they can act as oracles.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace testsupport {

inline double mean(const std::vector<double>& x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

inline double variance(const std::vector<double>& x) {
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

// Upper-tail normal probability straight from the C library.
inline double normal_sf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
inline double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

// CDF of N(mu, sigma^2) truncated to (a, b); evaluated on the upper tail when
// the interval sits right of the mean so (5, 6) keeps its digits.
inline double truncated_normal_cdf(double x, double mu, double sigma, double a, double b) {
  if (x <= a) return 0.0;
  if (x >= b) return 1.0;
  const double za = (a - mu) / sigma, zb = (b - mu) / sigma, zx = (x - mu) / sigma;
  if (za > 0) return (normal_sf(za) - normal_sf(zx)) / (normal_sf(za) - normal_sf(zb));
  return (normal_cdf(zx) - normal_cdf(za)) / (normal_cdf(zb) - normal_cdf(za));
}

inline double truncated_normal_mean(double mu, double sigma, double a, double b) {
  const double za = (a - mu) / sigma, zb = (b - mu) / sigma;
  const double pa = std::isinf(za) ? 0.0 : normal_pdf(za);
  const double pb = std::isinf(zb) ? 0.0 : normal_pdf(zb);
  const double mass = za > 0 ? normal_sf(za) - normal_sf(zb) : normal_cdf(zb) - normal_cdf(za);
  return mu + sigma * (pa - pb) / mass;
}

// sup |F_n - F|.
inline double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, (static_cast<double>(i) + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

inline double ks_two_sample_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

// Kolmogorov limiting survival function Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
inline double kolmogorov_sf(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

// Stephens' small-sample correction of the asymptotic p-value.
inline double ks_pvalue(double d, double effective_n) {
  const double s = std::sqrt(effective_n);
  return kolmogorov_sf((s + 0.12 + 0.11 / s) * d);
}

inline double ks_two_sample_pvalue(double d, std::size_t n, std::size_t m) {
  const double ne = static_cast<double>(n) * static_cast<double>(m) / static_cast<double>(n + m);
  return ks_pvalue(d, ne);
}

// Non-overlapping batch means standard error of the mean.
inline double batch_mcse(const std::vector<double>& x, int batches = 20) {
  const std::size_t len = x.size() / static_cast<std::size_t>(batches);
  std::vector<double> means;
  for (int b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t k = 0; k < len; ++k) s += x[static_cast<std::size_t>(b) * len + k];
    means.push_back(s / static_cast<double>(len));
  }
  return std::sqrt(variance(means) / batches);
}

}  // namespace testsupport
