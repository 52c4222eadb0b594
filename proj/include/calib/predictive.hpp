#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>

#include "calib/grid_posterior.hpp"
#include "calib/model_family.hpp"
#include "calib/rng.hpp"
#include "calib/stats.hpp"

namespace calib {

enum class PredictiveKind { Plugin, PriorPredictive, PosteriorPredictive };

// A density over single observation rows.
struct PredictiveDistribution {
    PredictiveKind kind = PredictiveKind::Plugin;
    std::size_t row_dim = 1;
    std::function<double(std::span<const double> row)> row_log_density;
    std::string name;
};

// The model density at a fixed parameter point.
PredictiveDistribution plugin_predictive(const ModelFamily& model, const ParamPoint& theta);

// Mixture of the model density over grid posterior masses.  The posterior
// must cover the model's full parameter space.
PredictiveDistribution posterior_predictive(const ModelFamily& model, const GridPosterior& gp);

// Mixture over the prior via the same quadrature grid.
PredictiveDistribution prior_predictive(const ModelFamily& model, const Prior& prior,
                                        const GridSpec& grid);

struct ScoreEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
};

// Out-of-sample log score: minus the average predictive log density over
// holdout rows.  Smaller is better.
ScoreEstimate predictive_score(const PredictiveDistribution& pred, const Observation& holdout);

// Monte Carlo divergence of the predictive from the truth:
// E_truth[log truth_density(row) - log predictive(row)].
ScoreEstimate kl_divergence_mc(const ModelFamily& model, const ParamPoint& theta_true,
                               const PredictiveDistribution& pred, std::size_t n_mc, RngKey key);

} // namespace calib
