#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace calib {

double normal_cdf(double z);
double normal_tail(double z); // 1 - Phi(z), accurate in the far tail
double normal_quantile(double p);
double normal_log_pdf(double x, double mean, double sd);

// Upper tail of a chi-squared distribution with k degrees of freedom.
double chi_squared_tail(double x, unsigned k);

// Compensated (Neumaier) summation.
double neumaier_sum(std::span<const double> values);

// log(sum(exp(x_i))) with the max subtracted before exponentiation.
double log_sum_exp(std::span<const double> log_values);

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0; // sample sd, n-1 denominator
};
MeanSd mean_sd(std::span<const double> values);

// Standard error of a proportion estimate, sqrt(p(1-p)/n).
double binomial_se(double p_hat, std::size_t n);

struct WilsonInterval {
    double lo = 0.0;
    double hi = 1.0;
};
WilsonInterval wilson_interval(std::size_t successes, std::size_t n, double z);

// Kolmogorov-Smirnov distance between the empirical CDF of `sorted` (must be
// ascending) and a reference CDF.
double ks_distance(std::span<const double> sorted, const std::function<double(double)>& cdf);

// Type-7 (linear interpolation) quantile of an ascending sample.
double quantile_sorted(std::span<const double> sorted, double q);

} // namespace calib
