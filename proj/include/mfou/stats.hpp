#pragma once

#include <span>

namespace mfou {

double mean(std::span<const double> x);
/// Unbiased sample variance (R - 1 denominator).
double variance(std::span<const double> x);
double median(std::span<const double> x);
double normal_cdf(double x, double sigma = 1.0);

/// sup_x |F_R(x) - Phi(x / sigma)|. Throws on an empty sample or sigma <= 0.
double ks_statistic(std::span<const double> sample, double sigma);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  ///< root mean square residual
};
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

}  // namespace mfou
