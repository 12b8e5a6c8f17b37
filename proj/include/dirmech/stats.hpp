#pragma once

// Monte Carlo bookkeeping: streaming moments, CLT intervals and
// Kolmogorov-Smirnov checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace dirmech {

inline constexpr double kZ99 = 2.5758293035489004;  // two-sided 99% normal quantile

/// Welford accumulator; merge() is Chan's pairwise update, so merging chunk
/// results in a fixed order gives the same answer for any thread count.
struct MeanAccumulator {
  std::uint64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) {
    ++n;
    const double d = v - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (v - mean);
  }

  void merge(const MeanAccumulator& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const double na = static_cast<double>(n);
    const double nb = static_cast<double>(o.n);
    const double d = o.mean - mean;
    const double tot = na + nb;
    mean += d * nb / tot;
    m2 += o.m2 + d * d * na * nb / tot;
    n += o.n;
  }

  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double std_error() const { return n > 0 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0; }
};

struct MonteCarloEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  double half_width = 0.0;  // 99% CLT
  std::uint64_t trials = 0;

  static MonteCarloEstimate from(const MeanAccumulator& acc) {
    return {acc.mean, acc.std_error(), kZ99 * acc.std_error(), acc.n};
  }
};

/// Binomial standard error sqrt(p(1-p)/n).
inline double binomial_sigma(double p, std::uint64_t n) {
  return n > 0 ? std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n)) : 0.0;
}

/// Asymptotic Kolmogorov critical coefficient c(alpha) = sqrt(-ln(alpha/2)/2).
inline double ks_coefficient(double alpha) { return std::sqrt(-0.5 * std::log(alpha / 2.0)); }

inline double ks_critical(std::size_t n, double alpha) {
  return ks_coefficient(alpha) / std::sqrt(static_cast<double>(n));
}

inline double ks_critical_two_sample(std::size_t n, std::size_t m, double alpha) {
  const double dn = static_cast<double>(n);
  const double dm = static_cast<double>(m);
  return ks_coefficient(alpha) * std::sqrt((dn + dm) / (dn * dm));
}

/// sup |F_n - F| for a sample against a continuous CDF.
template <class Cdf>
double ks_statistic(std::vector<double> sample, Cdf cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

inline double ks_statistic_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  return d;
}

}  // namespace dirmech
