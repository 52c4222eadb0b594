#include "calib/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

namespace calib {

namespace {
const boost::math::normal_distribution<double> kStdNormal(0.0, 1.0);
constexpr double kHalfLog2Pi = 0.91893853320467274178;
} // namespace

double normal_cdf(double z) {
    return boost::math::cdf(kStdNormal, z);
}

double normal_tail(double z) {
    return boost::math::cdf(boost::math::complement(kStdNormal, z));
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p must be in (0, 1)");
    return boost::math::quantile(kStdNormal, p);
}

double normal_log_pdf(double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return -0.5 * z * z - std::log(sd) - kHalfLog2Pi;
}

double chi_squared_tail(double x, unsigned k) {
    if (k == 0) throw std::domain_error("chi_squared_tail: k must be positive");
    if (x <= 0.0) return 1.0;
    const boost::math::chi_squared_distribution<double> dist(static_cast<double>(k));
    return boost::math::cdf(boost::math::complement(dist, x));
}

double neumaier_sum(std::span<const double> values) {
    double sum = 0.0;
    double comp = 0.0;
    for (double v : values) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    return sum + comp;
}

double log_sum_exp(std::span<const double> log_values) {
    if (log_values.empty()) throw std::invalid_argument("log_sum_exp: empty input");
    const double m = *std::max_element(log_values.begin(), log_values.end());
    if (!std::isfinite(m)) return m; // all -inf, or a nan/inf poisoning the max
    double sum = 0.0;
    double comp = 0.0;
    for (double lv : log_values) {
        const double v = std::exp(lv - m);
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    return m + std::log(sum + comp);
}

MeanSd mean_sd(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n == 0) throw std::invalid_argument("mean_sd: empty input");
    const double mean = neumaier_sum(values) / static_cast<double>(n);
    if (n == 1) return MeanSd{mean, 0.0};
    double ss = 0.0;
    for (double v : values) {
        const double d = v - mean;
        ss += d * d;
    }
    return MeanSd{mean, std::sqrt(ss / static_cast<double>(n - 1))};
}

double binomial_se(double p_hat, std::size_t n) {
    if (n == 0) throw std::invalid_argument("binomial_se: n must be positive");
    const double p = std::clamp(p_hat, 0.0, 1.0);
    return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

WilsonInterval wilson_interval(std::size_t successes, std::size_t n, double z) {
    if (n == 0) throw std::invalid_argument("wilson_interval: n must be positive");
    if (successes > n) throw std::invalid_argument("wilson_interval: successes > n");
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(successes) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    return WilsonInterval{std::max(0.0, center - half), std::min(1.0, center + half)};
}

double ks_distance(std::span<const double> sorted, const std::function<double(double)>& cdf) {
    const std::size_t n = sorted.size();
    if (n == 0) throw std::invalid_argument("ks_distance: empty sample");
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = cdf(sorted[i]);
        const double lo = static_cast<double>(i) / static_cast<double>(n);
        const double hi = static_cast<double>(i + 1) / static_cast<double>(n);
        d = std::max(d, std::max(std::abs(f - lo), std::abs(f - hi)));
    }
    return d;
}

double quantile_sorted(std::span<const double> sorted, double q) {
    const std::size_t n = sorted.size();
    if (n == 0) throw std::invalid_argument("quantile_sorted: empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("quantile_sorted: q must be in [0, 1]");
    if (n == 1) return sorted[0];
    const double h = q * static_cast<double>(n - 1);
    const std::size_t i = static_cast<std::size_t>(std::floor(h));
    if (i + 1 >= n) return sorted[n - 1];
    const double frac = h - static_cast<double>(i);
    return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

} // namespace calib
