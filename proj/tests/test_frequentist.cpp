#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "calib/frequentist.hpp"
#include "calib/model_family.hpp"
#include "calib/rng.hpp"
#include "calib/stats.hpp"

using namespace calib;

TEST_CASE("lp loss closed forms and shape checks") {
    const LossFunction l2 = lp_loss(2.0);
    CHECK(l2.name == "l2");
    CHECK(l2.evaluate(ParamPoint{{1.0, 2.0}}, ParamPoint{{0.0, 0.0}}) == doctest::Approx(5.0));
    const LossFunction l1 = lp_loss(1.0);
    CHECK(l1.evaluate(ParamPoint{{-1.0}}, ParamPoint{{1.0}}) == doctest::Approx(2.0));
    CHECK_THROWS_AS(l2.evaluate(ParamPoint{{1.0}}, ParamPoint{{1.0, 2.0}}),
                    std::invalid_argument);
    CHECK_THROWS(lp_loss(0.0));
}

TEST_CASE("expected squared-error loss of the sample mean matches sigma^2/n") {
    const ModelFamily model = normal_mean_family(2.0, 4);
    const RiskEstimate r = expected_loss(model, ParamPoint{{1.0}}, mean_estimator(), lp_loss(2.0),
                                         20000, RngKey{31});
    CHECK(r.value == doctest::Approx(1.0).epsilon(0.05)); // 4/4
    CHECK(r.n_failures == 0);
    CHECK(r.n_replications == 20000);
    CHECK(r.std_error > 0.0);
    CHECK(r.std_error < 0.05);
}

TEST_CASE("expected loss is reproducible and worker-count invariant") {
    const ModelFamily model = normal_mean_family(1.0, 2);
    const RiskEstimate a = expected_loss(model, ParamPoint{{0.0}}, mean_estimator(), lp_loss(2.0),
                                         5000, RngKey{7}, 1);
    const RiskEstimate b = expected_loss(model, ParamPoint{{0.0}}, mean_estimator(), lp_loss(2.0),
                                         5000, RngKey{7}, 4);
    CHECK(a.value == b.value); // byte identical, not merely close
    CHECK(a.std_error == b.std_error);
}

TEST_CASE("estimator failures are excluded, counted, and capped") {
    const ModelFamily model = normal_mean_family(1.0, 1);
    int calls = 0;
    PointEstimator flaky{"flaky", [&calls](const Observation& y) {
                             if (++calls % 200 == 0) throw EstimatorFailure("solver stalled");
                             return ParamPoint{{observation_mean(y)}};
                         }};
    const RiskEstimate r =
        expected_loss(model, ParamPoint{{0.0}}, flaky, lp_loss(2.0), 1000, RngKey{3});
    CHECK(r.n_failures == 5);
    CHECK(r.n_replications == 995);

    PointEstimator broken{"broken", [](const Observation&) -> ParamPoint {
                              throw EstimatorFailure("always fails");
                          }};
    CHECK_THROWS_AS(
        expected_loss(model, ParamPoint{{0.0}}, broken, lp_loss(2.0), 1000, RngKey{3}),
        std::runtime_error);
}

TEST_CASE("coverage of the exact normal interval") {
    const ModelFamily model = normal_mean_family(1.0, 4);
    const SetEstimator interval = normal_mean_interval(model, 0.95);
    const RiskEstimate r = coverage(model, ParamPoint{{0.5}}, interval, 20000, RngKey{17});
    CHECK(r.value == doctest::Approx(0.95).epsilon(0.01));
    // Binomial SE at p = 0.95, n = 2e4.
    CHECK(r.std_error == doctest::Approx(binomial_se(r.value, 20000)).epsilon(1e-12));

    const auto iv = interval.intervals(make_observation(4, 1, {1.0, 1.0, 1.0, 1.0}));
    REQUIRE(iv.size() == 1);
    CHECK(iv[0][0] == doctest::Approx(1.0 - 1.9599639845400545 * 0.5).epsilon(1e-12));
    CHECK(iv[0][1] == doctest::Approx(1.0 + 1.9599639845400545 * 0.5).epsilon(1e-12));
}

TEST_CASE("max expected loss uses common random numbers across the grid") {
    const ModelFamily model = normal_mean_family(1.0, 1);
    // Shrinkage by c = 0: risk is theta^2, worst at the grid edge.
    const std::vector<ParamPoint> grid = {ParamPoint{{-1.0}}, ParamPoint{{0.0}},
                                          ParamPoint{{1.0}}};
    const WorstRisk w = max_expected_loss(model, grid, scaled_mean_estimator(0.0), lp_loss(2.0),
                                          100, RngKey{5});
    CHECK(w.per_point.size() == 3);
    CHECK(w.risk.value == doctest::Approx(1.0));
    CHECK(w.per_point[1].value == doctest::Approx(0.0));
    CHECK(w.index == 0); // tie between -1 and 1 resolves to the lowest index
    CHECK(w.at[0] == doctest::Approx(-1.0));
}

TEST_CASE("minimax selection recovers the known optimum") {
    const ModelFamily model = normal_mean_family(1.0, 1);
    std::vector<PointEstimator> estimators;
    for (double c : {0.0, 0.25, 0.5, 0.75, 1.0}) estimators.push_back(scaled_mean_estimator(c));
    std::vector<ParamPoint> grid;
    for (int i = -2; i <= 2; ++i) grid.push_back(ParamPoint{{static_cast<double>(i) / 2.0}});

    const MinimaxSelection sel =
        minimax_select(model, estimators, grid, lp_loss(2.0), 4000, RngKey{23});
    // Risk of c*ybar at theta: c^2 + (1-c)^2 theta^2; on [-1,1] the minimax
    // choice among these five factors is c = 0.5 with worst risk 0.5.
    CHECK(sel.index == 2);
    CHECK(sel.name == "scaled_mean_0.5");
    CHECK(sel.worst.risk.value == doctest::Approx(0.5).epsilon(0.1));
    CHECK(sel.per_estimator.size() == 5);
}

TEST_CASE("mle recovers the conjugate optimum with curvature") {
    const ModelFamily model = normal_mean_family(2.0, 8);
    std::vector<double> data(8, 1.25);
    const Observation y = make_observation(8, 1, data);
    BoxSpec box;
    box.lo = {-10.0};
    box.hi = {10.0};
    const MleResult r = mle(model, y, box);
    CHECK(r.theta[0] == doctest::Approx(1.25).epsilon(1e-6));
    CHECK_FALSE(r.on_boundary);
    // Observed information for the known-sigma mean: n/sigma^2 = 8/4.
    CHECK(r.observed_info(0, 0) == doctest::Approx(2.0).epsilon(1e-4));

    // Optimum pinned at the box edge is flagged.
    BoxSpec tight;
    tight.lo = {-10.0};
    tight.hi = {0.5};
    const MleResult edge = mle(model, y, tight);
    CHECK(edge.on_boundary);
    CHECK(edge.theta[0] == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("two-parameter mle separates signal and background means") {
    ModelFamily model = gaussian_signal_background(50);
    const std::size_t fix_idx[] = {2};
    const double fix_val[] = {1.0};
    model = fix_components(model, fix_idx, fix_val);
    RngStream rng(909, 0);
    const Observation y = sample_observation(model, ParamPoint{{1.0, 0.5}}, rng);

    BoxSpec box;
    box.lo = {-5.0, -5.0};
    box.hi = {5.0, 5.0};
    const MleResult r = mle(model, y, box);
    // Only the sum mu_s + mu_b is identified; the fit must match the sample
    // mean on that ridge.
    CHECK(r.theta[0] + r.theta[1] == doctest::Approx(observation_mean(y)).epsilon(1e-4));
    CHECK(r.log_likelihood == doctest::Approx(log_density(model, y, r.theta)).epsilon(1e-12));
}

TEST_CASE("mle estimator integrates with expected loss") {
    const ModelFamily model = normal_mean_family(1.0, 4);
    BoxSpec box;
    box.lo = {-10.0};
    box.hi = {10.0};
    const PointEstimator est = mle_estimator(model, box);
    const RiskEstimate r =
        expected_loss(model, ParamPoint{{0.7}}, est, lp_loss(2.0), 2000, RngKey{41});
    CHECK(r.value == doctest::Approx(0.25).epsilon(0.1)); // sigma^2/n = 1/4
}
