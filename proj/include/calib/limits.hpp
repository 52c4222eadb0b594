#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "calib/grid_posterior.hpp"
#include "calib/model_family.hpp"
#include "calib/rng.hpp"

namespace calib {

enum class LimitKind { AnchoredFrequentist, PosteriorQuantile };

struct LimitResult {
    double upper = 0.0;
    double level = 0.0;
    LimitKind kind = LimitKind::AnchoredFrequentist;
};

// One-sided confidence interval [0, upper) for a non-negative location
// parameter: upper = max(0, ybar) + z_alpha * sigma / sqrt(n).  Requires a
// single-component family with a Gaussian row law of parameter-independent
// sd (the built-in known-sigma mean family).  Coverage is at least alpha for
// every truth >= 0.
LimitResult anchored_interval(const ModelFamily& model, const Observation& y, double alpha);

// Exclusion quantile of the component's marginal: the value below which
// 1 - alpha of the posterior mass sits.  The marginal support must lie in
// [0, inf).  Larger alpha demands more excluded mass above the limit, so the
// limit decreases as alpha grows.
LimitResult posterior_upper_limit(const GridPosterior& gp, std::size_t component, double alpha);

struct LimitBand {
    // quantiles 0.025, 0.25, 0.5, 0.75, 0.975 of the limit distribution
    std::array<double, 5> quantiles = {0, 0, 0, 0, 0};
};

struct LimitStudy {
    std::vector<LimitResult> limits; // one per replication, in order
    LimitBand band;
};

// Distribution of the posterior upper limit under the absence model: per
// replication the nuisance components are drawn from the prior conditioned
// on phenom = 0, data simulated, and the limit of the first phenom
// component computed from the grid posterior.
LimitStudy limit_sensitivity(const ModelFamily& model, const Prior& prior, double alpha,
                             std::size_t n_rep, const GridSpec& grid, RngKey key,
                             unsigned workers = 1);

std::string limit_records_csv(const LimitStudy& study);
std::string limit_band_csv(const LimitBand& band);

} // namespace calib
