#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "calib/grid_posterior.hpp"
#include "calib/model_family.hpp"
#include "calib/predictive.hpp"
#include "calib/stats.hpp"

using namespace calib;

TEST_CASE("plugin predictive is the model row density at the point") {
    const ModelFamily model = normal_mean_family(1.0, 1);
    const PredictiveDistribution pred = plugin_predictive(model, ParamPoint{{1.0}});
    CHECK(pred.kind == PredictiveKind::Plugin);
    const double row[] = {2.0};
    CHECK(pred.row_log_density(row) == doctest::Approx(normal_log_pdf(2.0, 1.0, 1.0)).epsilon(1e-14));
}

TEST_CASE("posterior predictive matches the conjugate closed form") {
    // y ~ N(mu, 1), mu ~ N(0, 1), observed y = 2: posterior N(1, 1/2), so the
    // predictive is N(1, sqrt(3/2)); at y' = 1 the log density is -1.12167.
    const ModelFamily model = normal_mean_family(1.0, 1);
    const Prior prior = independent_prior(model.param_space, {normal_component(0.0, 1.0)});
    GridSpec grid;
    grid.axes = {GridAxis{-8.0, 8.0, 1601}};
    const Observation y = make_observation(1, 1, {2.0});
    const GridPosterior gp = build_grid_posterior(model, prior, y, grid);
    const PredictiveDistribution pred = posterior_predictive(model, gp);
    CHECK(pred.kind == PredictiveKind::PosteriorPredictive);
    const double row[] = {1.0};
    CHECK(pred.row_log_density(row) == doctest::Approx(-1.1216710872587549).epsilon(1e-3));
}

TEST_CASE("posterior predictive insists on a full-space posterior") {
    ModelFamily model = gaussian_signal_background(1);
    const std::size_t fix_idx[] = {2};
    const double fix_val[] = {1.0};
    model = fix_components(model, fix_idx, fix_val);
    const Prior prior = independent_prior(
        model.param_space, {normal_component(0.0, 1.0), normal_component(0.0, 1.0)});
    GridSpec grid;
    grid.axes = {GridAxis{-5.0, 5.0, 101}, GridAxis{-5.0, 5.0, 101}};
    const Observation y = make_observation(1, 1, {0.5});
    const GridPosterior gp = build_grid_posterior(model, prior, y, grid);
    CHECK_NOTHROW(posterior_predictive(model, gp));
    const std::size_t keep[] = {0};
    const GridPosterior marg = marginal_posterior(gp, keep);
    CHECK_THROWS(posterior_predictive(model, marg));
}

TEST_CASE("prior predictive integrates the prior through the quadrature grid") {
    // Marginal law of a single y under mu ~ N(0,1), y|mu ~ N(mu,1) is
    // N(0, sqrt 2).
    const ModelFamily model = normal_mean_family(1.0, 1);
    const Prior prior = independent_prior(model.param_space, {normal_component(0.0, 1.0)});
    GridSpec grid;
    grid.axes = {GridAxis{-8.0, 8.0, 1601}};
    const PredictiveDistribution pred = prior_predictive(model, prior, grid);
    CHECK(pred.kind == PredictiveKind::PriorPredictive);
    const double row[] = {2.0};
    CHECK(pred.row_log_density(row) ==
          doctest::Approx(normal_log_pdf(2.0, 0.0, std::sqrt(2.0))).epsilon(1e-3));
}

TEST_CASE("predictive score is minus the average holdout log density") {
    const ModelFamily model = normal_mean_family(1.0, 3);
    const PredictiveDistribution pred = plugin_predictive(model, ParamPoint{{0.0}});
    const Observation holdout = make_observation(3, 1, {0.0, 1.0, -1.0});
    const ScoreEstimate s = predictive_score(pred, holdout);
    const double expect =
        -(normal_log_pdf(0.0, 0.0, 1.0) + 2.0 * normal_log_pdf(1.0, 0.0, 1.0)) / 3.0;
    CHECK(s.value == doctest::Approx(expect).epsilon(1e-14));
    CHECK(s.n == 3);
    CHECK(s.std_error > 0.0);

    const Observation single = make_observation(1, 1, {0.5});
    CHECK(predictive_score(pred, single).std_error == doctest::Approx(0.0));
}

TEST_CASE("score of the truth converges to its entropy") {
    // N(0,1) differential entropy: 0.5 log(2 pi e) = 1.4189385.
    const ModelFamily model = normal_mean_family(1.0, 2000);
    const PredictiveDistribution truth = plugin_predictive(model, ParamPoint{{0.0}});
    RngStream rng(271, 0);
    const Observation big = sample_observation(model, ParamPoint{{0.0}}, rng);
    const ScoreEstimate s = predictive_score(truth, big);
    CHECK(std::abs(s.value - 1.4189385332046727) < 4.0 * s.std_error + 1e-9);
}

TEST_CASE("kl divergence monte carlo matches closed forms") {
    const ModelFamily model = normal_mean_family(1.0, 1);
    // KL(N(0,1) || N(1,1)) = 0.5.
    const PredictiveDistribution shifted = plugin_predictive(model, ParamPoint{{1.0}});
    const ScoreEstimate kl = kl_divergence_mc(model, ParamPoint{{0.0}}, shifted, 200000, RngKey{3});
    CHECK(std::abs(kl.value - 0.5) < 4.0 * kl.std_error + 1e-9);

    // KL against itself is exactly zero termwise.
    const PredictiveDistribution self = plugin_predictive(model, ParamPoint{{0.0}});
    const ScoreEstimate zero = kl_divergence_mc(model, ParamPoint{{0.0}}, self, 1000, RngKey{3});
    CHECK(zero.value == doctest::Approx(0.0));
    CHECK(zero.std_error == doctest::Approx(0.0));

    CHECK_THROWS(kl_divergence_mc(model, ParamPoint{{0.0}}, self, 1, RngKey{3}));
}

TEST_CASE("kl of a scale mismatch matches the closed form") {
    // KL(N(0,1) || N(0,2)): 0.5 (1/4 - 1 + log 4) = 0.31814718.
    const ModelFamily truth = normal_mean_family(1.0, 1);
    const ModelFamily wide = normal_mean_family(2.0, 1);
    const PredictiveDistribution pred = plugin_predictive(wide, ParamPoint{{0.0}});
    const ScoreEstimate kl = kl_divergence_mc(truth, ParamPoint{{0.0}}, pred, 200000, RngKey{9});
    CHECK(std::abs(kl.value - 0.3181471805599453) < 4.0 * kl.std_error + 1e-9);
}
