#pragma once

#include <span>

namespace anw::stats {

double normal_cdf(double x);

struct KsResult {
  double statistic = 0.0;  // sup |F_n - Phi|
  double p_value = 0.0;    // asymptotic Kolmogorov distribution
};

/// One-sample Kolmogorov–Smirnov test against the standard normal CDF.
KsResult ks_test_standard_normal(std::span<const float> samples);

/// Survival function of the Kolmogorov distribution, P(K > x).
double kolmogorov_survival(double x);

struct Moments {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
};
Moments moments(std::span<const float> samples);

/// Pearson correlation of paired samples.
double correlation(std::span<const float> a, std::span<const float> b);

}  // namespace anw::stats
