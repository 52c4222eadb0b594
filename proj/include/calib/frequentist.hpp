#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "calib/model_family.hpp"
#include "calib/optimize.hpp"
#include "calib/rng.hpp"

namespace calib {

struct PointEstimator {
    std::string name;
    std::function<ParamPoint(const Observation&)> estimate;
};

// Set-valued estimator; `contains` is the defining operation, the interval
// form is optional convenience for reporting.
struct SetEstimator {
    std::string name;
    std::function<bool(const Observation&, const ParamPoint&)> contains;
    std::function<std::vector<std::array<double, 2>>(const Observation&)> intervals;
};

struct LossFunction {
    std::string name;
    std::function<double(const ParamPoint& estimate, const ParamPoint& truth)> evaluate;
};

// sum_i |estimate_i - truth_i|^p
LossFunction lp_loss(double p);

struct SetLossFunction {
    std::string name;
    std::function<double(const SetEstimator&, const Observation&, const ParamPoint&)> evaluate;
};

// 1 when the truth lies in the reported set, else 0; its expectation is the
// coverage probability.
SetLossFunction inclusion_loss();

// Thrown by estimators to signal a recoverable per-replication failure.
struct EstimatorFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RiskEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t n_replications = 0;
    std::size_t n_failures = 0;
};

// Monte Carlo expected loss at a fixed truth.  Observations for replication
// r are drawn from key.stream(r), so estimators and truths share common
// random numbers under the same key.  Replications where the estimator
// throws EstimatorFailure are excluded and counted; more than 1% failures is
// an error.
RiskEstimate expected_loss(const ModelFamily& model, const ParamPoint& theta,
                           const PointEstimator& estimator, const LossFunction& loss,
                           std::size_t n_rep, RngKey key, unsigned workers = 1);

RiskEstimate expected_set_loss(const ModelFamily& model, const ParamPoint& theta,
                               const SetEstimator& estimator, const SetLossFunction& loss,
                               std::size_t n_rep, RngKey key, unsigned workers = 1);

// Coverage probability of a set estimator at a fixed truth (expected
// inclusion loss, binomial standard error).
RiskEstimate coverage(const ModelFamily& model, const ParamPoint& theta,
                      const SetEstimator& estimator, std::size_t n_rep, RngKey key,
                      unsigned workers = 1);

struct WorstRisk {
    RiskEstimate risk;
    ParamPoint at;
    std::size_t index = 0;
    std::vector<RiskEstimate> per_point;
};

// Worst-case expected loss over a finite grid of truths; common random
// numbers across grid points.
WorstRisk max_expected_loss(const ModelFamily& model, std::span<const ParamPoint> truth_grid,
                            const PointEstimator& estimator, const LossFunction& loss,
                            std::size_t n_rep, RngKey key, unsigned workers = 1);

struct MinimaxSelection {
    std::size_t index = 0;
    std::string name;
    WorstRisk worst;
    std::vector<WorstRisk> per_estimator;
};

// Estimator with the smallest worst-case risk; ties resolve to the lowest
// index.
MinimaxSelection minimax_select(const ModelFamily& model,
                                std::span<const PointEstimator> estimators,
                                std::span<const ParamPoint> truth_grid, const LossFunction& loss,
                                std::size_t n_rep, RngKey key, unsigned workers = 1);

struct SquareMatrix {
    std::size_t n = 0;
    std::vector<double> data; // row-major

    double operator()(std::size_t i, std::size_t j) const { return data[i * n + j]; }
    double& operator()(std::size_t i, std::size_t j) { return data[i * n + j]; }
};

struct MleResult {
    ParamPoint theta;
    double log_likelihood = 0.0;
    SquareMatrix observed_info; // negative Hessian of the log likelihood
    bool on_boundary = false;
};

// Maximum likelihood over the box (coarse scan + simplex refinement).
// Observed information uses central differences with step 1e-4 per unit
// scale; a boundary optimum is flagged, not an error.
MleResult mle(const ModelFamily& model, const Observation& y, const BoxSpec& box);

// Convenience estimators over single-component families.
PointEstimator mean_estimator(std::string name = "sample_mean");
PointEstimator scaled_mean_estimator(double factor);
PointEstimator mle_estimator(const ModelFamily& model, BoxSpec box, std::string name = "mle");

// Central interval mean +- z * sd/sqrt(n) for families with a Gaussian row
// law whose sd does not depend on the parameter.
SetEstimator normal_mean_interval(const ModelFamily& model, double level);

} // namespace calib
