#include "anw/numeric/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace anw::stats {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double kolmogorov_survival(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.2) return 1.0;
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    s += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

KsResult ks_test_standard_normal(std::span<const float> samples) {
  if (samples.empty()) throw std::invalid_argument("ks_test: no samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double cdf = normal_cdf(sorted[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - cdf, cdf - static_cast<double>(i) / n});
  }
  // Stephens' small-sample correction of the asymptotic statistic.
  const double sqn = std::sqrt(n);
  return {d, kolmogorov_survival((sqn + 0.12 + 0.11 / sqn) * d)};
}

Moments moments(std::span<const float> samples) {
  if (samples.size() < 2) throw std::invalid_argument("moments: need at least two samples");
  double s = 0.0;
  for (float x : samples) s += x;
  const double mu = s / static_cast<double>(samples.size());
  double v = 0.0;
  for (float x : samples) v += (x - mu) * (x - mu);
  return {mu, v / static_cast<double>(samples.size() - 1)};
}

double correlation(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("correlation: bad sample sizes");
  const auto ma = moments(a);
  const auto mb = moments(b);
  double c = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) c += (a[i] - ma.mean) * (b[i] - mb.mean);
  c /= static_cast<double>(a.size() - 1);
  return c / std::sqrt(ma.variance * mb.variance);
}

}  // namespace anw::stats
