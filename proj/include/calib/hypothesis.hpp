#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "calib/model_family.hpp"
#include "calib/optimize.hpp"
#include "calib/rng.hpp"

namespace calib {

// Convention used throughout: significance levels alpha sit near 1 (e.g.
// 0.95) and a test REJECTS the null when p < 1 - alpha.  The false discovery
// rate of the induced test equals 1 - alpha.
bool reject_null(double p_value, double alpha);

// Default scalar summary: mean of all observation entries.
double test_statistic(const Observation& y);

// Upper-tail probability P(T >= t | theta_null) of the mean statistic for
// families with a Gaussian row law; two_sided uses |T - m0| instead.
double p_value_analytic(const ModelFamily& model, const ParamPoint& theta_null, double t,
                        bool two_sided = false);

struct PValueMc {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t n_mc = 0;
};

// Monte Carlo tail probability with the (k + 1) / (n + 1) adjustment; never
// returns 0 or 1.  Requires n_mc >= 100.
PValueMc p_value_mc(const ModelFamily& model, const ParamPoint& theta_null, double t,
                    std::size_t n_mc, RngKey key, bool two_sided = false);

struct TestResult {
    double statistic = 0.0;
    double p_value = 0.0;
    double alpha = 0.0;
    bool rejected = false;
};

TestResult run_test(const ModelFamily& model, const ParamPoint& theta_null, const Observation& y,
                    double alpha, bool two_sided = false);

struct PowerPoint {
    ParamPoint theta;
    double power = 0.0;      // rejection rate under this alternative
    double std_error = 0.0;  // binomial SE of the rejection rate
    double mean_p = 0.0;     // average p-value under the alternative
    double power_avg_p = 0.0; // 1 - mean_p, the averaged-p diagnostic
    std::size_t n_rep = 0;
};

// Rejection rate under a fixed alternative; the operative true discovery
// rate.  The averaged-p variant is reported alongside as a diagnostic.
PowerPoint power(const ModelFamily& model, const ParamPoint& theta_null,
                 const ParamPoint& theta_alt, double alpha, std::size_t n_rep, RngKey key,
                 bool two_sided = false, unsigned workers = 1);

struct PowerCurve {
    std::vector<PowerPoint> points;
    std::size_t argmin = 0;
    double min_power = 0.0;
    double target = 0.0;
    std::vector<std::size_t> meeting_target;
};

PowerCurve power_curve(const ModelFamily& model, const ParamPoint& theta_null,
                       std::span<const ParamPoint> alternatives, double alpha, std::size_t n_rep,
                       RngKey key, double target = 0.999, bool two_sided = false,
                       unsigned workers = 1);

// theta_null with its phenomenological components replaced.
ParamPoint with_phenom(const ParamSpace& space, const ParamPoint& base,
                       std::span<const double> phenom);

struct ConditionalPower {
    PowerPoint worst;                 // minimum over the nuisance grid
    std::size_t argmin = 0;
    std::vector<PowerPoint> per_nuisance;
};

// Worst-case power over nuisance configurations.  Each nuisance point is
// paired with its own null (phenom components zeroed at that nuisance), so a
// pure location nuisance leaves the power constant.
ConditionalPower conditional_power(const ModelFamily& model, std::span<const double> phenom_alt,
                                   std::span<const ParamPoint> nuisance_grid, double alpha,
                                   std::size_t n_rep, RngKey key, bool two_sided = false,
                                   unsigned workers = 1);

struct ProfileResult {
    double log_profile = 0.0;
    ParamPoint theta; // full point: pinned phenom plus maximizing nuisance
    bool on_boundary = false;
};

// Profile log likelihood: nuisance components maximized with the
// phenomenological components pinned.  nuisance_box covers the nuisance
// components in space order; empty when the family has no nuisance.
ProfileResult profile_likelihood(const ModelFamily& model, std::span<const double> phenom,
                                 const Observation& y, const BoxSpec& nuisance_box);

struct LrtResult {
    double lambda = 1.0;      // profile / global maximum, in [0, 1]
    double minus2log = 0.0;   // -2 log lambda
    ParamPoint theta_hat;      // global maximizer
    ParamPoint theta_hat_null; // maximizer with phenom pinned
};

// Likelihood ratio of the pinned-phenom submodel to the full family.  `box`
// bounds the full-space search; the nuisance search reuses its nuisance
// components.  Negative -2 log lambda beyond 1e-6 is an optimizer failure.
LrtResult likelihood_ratio_statistic(const ModelFamily& model, std::span<const double> phenom_null,
                                     const Observation& y, const BoxSpec& box);

// Upper chi-squared tail of -2 log lambda with k degrees of freedom.
double wilks_p_value(double minus2log, unsigned k);

// Composite null: the smallest per-point p-value over an explicit null grid.
// Caveat: the minimum understates the least-favorable tail probability, so
// rejections based on it can be anti-conservative; the per-point values are
// what the grid actually supports.
double composite_p_value(const ModelFamily& model, std::span<const ParamPoint> null_grid, double t,
                         bool two_sided = false);

} // namespace calib
