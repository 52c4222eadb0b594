#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "calib/grid_posterior.hpp"
#include "calib/model_family.hpp"
#include "calib/stats.hpp"

using namespace calib;

namespace {

// Conjugate reference: y ~ N(mu, 1), mu ~ N(0, 1), single scalar observation.
struct ConjugateCase {
    ModelFamily model = normal_mean_family(1.0, 1);
    Prior prior = independent_prior(model.param_space, {normal_component(0.0, 1.0)});
    Observation y = make_observation(1, 1, {2.0});

    GridPosterior build(std::size_t nodes = 1001, double lo = -6.0, double hi = 6.0) const {
        GridSpec grid;
        grid.axes = {GridAxis{lo, hi, nodes}};
        return build_grid_posterior(model, prior, y, grid);
    }
};

} // namespace

TEST_CASE("grid spec validation") {
    GridSpec g;
    CHECK_THROWS_AS(g.validate(), std::invalid_argument); // no axes
    g.axes = {GridAxis{0.0, 1.0, 1}};
    CHECK_THROWS_AS(g.validate(), std::invalid_argument); // too few nodes
    g.axes = {GridAxis{1.0, 0.0, 10}};
    CHECK_THROWS_AS(g.validate(), std::invalid_argument); // inverted bounds
    g.axes = {GridAxis{0.0, 1.0, 10}, GridAxis{0.0, 1.0, 10}, GridAxis{0.0, 1.0, 10},
              GridAxis{0.0, 1.0, 10}};
    CHECK_THROWS_AS(g.validate(), std::invalid_argument); // more than 3 axes
    g.axes = {GridAxis{0.0, 1.0, 4000}, GridAxis{0.0, 1.0, 4000}};
    CHECK_THROWS_AS(g.validate(), std::invalid_argument); // node budget exceeded
    g.axes = {GridAxis{0.0, 1.0, 101}, GridAxis{0.0, 1.0, 101}};
    CHECK_NOTHROW(g.validate());
    CHECK(g.total_nodes() == 101 * 101);
}

TEST_CASE("grid must sit inside the parameter bounds") {
    const ModelFamily model = normal_mean_family(1.0, 1, 0.0, 5.0);
    GridSpec grid;
    grid.axes = {GridAxis{-1.0, 5.0, 11}};
    CHECK_THROWS_AS(require_grid_in_bounds(model.param_space, grid), std::domain_error);
    grid.axes = {GridAxis{0.0, 5.0, 11}};
    CHECK_NOTHROW(require_grid_in_bounds(model.param_space, grid));

    // Open bound: sigma axis may not touch 0.
    const ModelFamily sb = gaussian_signal_background(1);
    GridSpec g3;
    g3.axes = {GridAxis{-1.0, 1.0, 5}, GridAxis{-1.0, 1.0, 5}, GridAxis{0.0, 2.0, 5}};
    CHECK_THROWS_AS(require_grid_in_bounds(sb.param_space, g3), std::domain_error);
    g3.axes[2].lo = 0.1;
    CHECK_NOTHROW(require_grid_in_bounds(sb.param_space, g3));
}

TEST_CASE("conjugate posterior mean, sd, and evidence match closed forms") {
    const ConjugateCase c;
    const GridPosterior gp = c.build();

    // Posterior N(1, 1/2); evidence is the N(0, sqrt 2) density at y = 2.
    const MeanSd ms = posterior_mean_sd(gp, 0);
    CHECK(ms.mean == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(ms.sd == doctest::Approx(std::sqrt(0.5)).epsilon(1e-3));
    CHECK(gp.log_evidence == doctest::Approx(-2.2655121234846454).epsilon(1e-3));

    double total = 0.0;
    for (double w : gp.weights) total += w;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("posterior quantile inverts the step CDF") {
    const ConjugateCase c;
    const GridPosterior gp = c.build(2001);
    // N(1, 1/sqrt 2) quantile at 0.975.
    CHECK(posterior_quantile(gp, 0, 0.975) ==
          doctest::Approx(2.3859038243496779).epsilon(2e-3));
    CHECK(posterior_quantile(gp, 0, 0.0) == doctest::Approx(-6.0));
    CHECK(posterior_quantile(gp, 0, 1.0) == doctest::Approx(6.0));
    CHECK_THROWS(posterior_quantile(gp, 0, -0.1));
    CHECK_THROWS(posterior_quantile(gp, 0, 1.1));
}

TEST_CASE("interval probability matches the normal law") {
    const ConjugateCase c;
    const GridPosterior gp = c.build(4001);
    const double sd = std::sqrt(0.5);
    const double expect = normal_cdf((2.0 - 1.0) / sd) - normal_cdf((0.0 - 1.0) / sd);
    CHECK(interval_probability(gp, 0, 0.0, 2.0) == doctest::Approx(expect).epsilon(1e-3));
    CHECK(interval_probability(gp, 0, -100.0, 100.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(interval_probability(gp, 0, 50.0, 60.0) == doctest::Approx(0.0));
}

TEST_CASE("posterior expectation integrates arbitrary functions") {
    const ConjugateCase c;
    const GridPosterior gp = c.build(2001);
    // E[mu^2] = var + mean^2 = 0.5 + 1.
    const double second_moment =
        posterior_expectation(gp, [](const ParamPoint& p) { return p[0] * p[0]; });
    CHECK(second_moment == doctest::Approx(1.5).epsilon(1e-3));
}

TEST_CASE("two-dimensional posterior marginalizes consistently") {
    // y ~ N(mu_s + mu_b, 0.5), independent N(0,1) priors on both means.
    ModelFamily model = gaussian_signal_background(1);
    const std::size_t fix_idx[] = {2};
    const double fix_val[] = {0.5};
    model = fix_components(model, fix_idx, fix_val);
    const Prior prior = independent_prior(
        model.param_space, {normal_component(0.0, 1.0), normal_component(0.0, 1.0)});
    const Observation y = make_observation(1, 1, {1.0});

    GridSpec grid;
    grid.axes = {GridAxis{-5.0, 5.0, 301}, GridAxis{-5.0, 5.0, 301}};
    const GridPosterior gp = build_grid_posterior(model, prior, y, grid);

    // Conjugate 2d case: posterior mean of each component is y/(2 + sd^2/1)
    // with sd = 0.5: precision arithmetic gives mean = y / (2 + 0.25) = 0.444...
    const MeanSd m0 = posterior_mean_sd(gp, 0);
    const MeanSd m1 = posterior_mean_sd(gp, 1);
    CHECK(m0.mean == doctest::Approx(1.0 / 2.25).epsilon(1e-3));
    CHECK(m1.mean == doctest::Approx(1.0 / 2.25).epsilon(1e-3));

    const std::size_t keep[] = {1};
    const GridPosterior marg = marginal_posterior(gp, keep);
    CHECK(marg.n_axes() == 1);
    CHECK(marg.components == std::vector<std::size_t>{1});
    CHECK(marg.log_evidence == doctest::Approx(gp.log_evidence));
    const MeanSd mm = posterior_mean_sd(marg, 1);
    CHECK(mm.mean == doctest::Approx(m1.mean).epsilon(1e-12));
    CHECK(mm.sd == doctest::Approx(m1.sd).epsilon(1e-12));

    double total = 0.0;
    for (double w : marg.weights) total += w;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("axis_of_component rejects unknown components") {
    const ConjugateCase c;
    const GridPosterior gp = c.build(101);
    CHECK(gp.axis_of_component(0) == 0);
    CHECK_THROWS_AS(gp.axis_of_component(3), std::out_of_range);
}

TEST_CASE("degenerate posterior raises a numerical error") {
    // Prior support disjoint from the grid: every node carries -inf log mass.
    const ModelFamily model = normal_mean_family(1.0, 1);
    const Prior prior = independent_prior(model.param_space, {uniform_component(10.0, 11.0)});
    const Observation y = make_observation(1, 1, {0.5});
    GridSpec grid;
    grid.axes = {GridAxis{-1.0, 1.0, 51}};
    CHECK_THROWS_AS(build_grid_posterior(model, prior, y, grid), std::runtime_error);
}

TEST_CASE("trapezoid weights halve the endpoints") {
    // Flat prior, flat likelihood: weights must be proportional to the
    // trapezoid rule, i.e. half weight at the two ends.
    const ModelFamily model = normal_mean_family(1.0, 1, -10.0, 10.0);
    Prior prior = independent_prior(model.param_space, {uniform_component(-10.0, 10.0)});
    ModelFamily flat = model;
    flat.row_log_density = [](std::span<const double>, const ParamPoint&) { return 0.0; };
    flat.gaussian_row.reset();
    const Observation y = make_observation(1, 1, {0.0});
    GridSpec grid;
    grid.axes = {GridAxis{-2.0, 2.0, 5}};
    const GridPosterior gp = build_grid_posterior(flat, prior, y, grid);
    CHECK(gp.weights[0] == doctest::Approx(gp.weights[1] / 2.0).epsilon(1e-12));
    CHECK(gp.weights[4] == doctest::Approx(gp.weights[3] / 2.0).epsilon(1e-12));
}
