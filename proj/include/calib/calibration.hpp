#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "calib/decisions.hpp"
#include "calib/frequentist.hpp"
#include "calib/grid_posterior.hpp"
#include "calib/model_family.hpp"
#include "calib/rng.hpp"

namespace calib {

// |post_mean - truth| / post_sd
double z_score(double post_mean, double post_sd, double theta_true);

// 1 - (post_sd / prior_sd)^2; negative when the posterior is wider than the
// prior, never clipped.
double shrinkage(double post_sd, double prior_sd);

// Cumulative marginal mass strictly below the truth plus half the mass at
// the truth's nearest node; 0 below the grid, 1 above it.
double quantile_rank(const GridPosterior& gp, std::size_t component, double theta_true);

struct CalibrationRecord {
    std::size_t replication = 0;
    ParamPoint theta_true;
    std::vector<double> post_mean;
    std::vector<double> post_sd;
    std::vector<double> z;
    std::vector<double> shrinkage;
    std::vector<double> rank;
    std::optional<Decision> decision;
    std::optional<double> loss;
};

struct CalibrationStudy {
    std::vector<CalibrationRecord> records;
    std::vector<double> prior_sd; // tau per component
    std::uint64_t master_seed = 0;
    std::size_t n_requested = 0;
    std::size_t n_failed = 0;
    std::string config_fingerprint;
};

// Loss evaluated against the simulated truth; receives the replication's
// posterior so posterior-derived losses need not rebuild it.
using StudyLoss = std::function<double(const Observation&, const ParamPoint&, const GridPosterior&)>;

// Joint-simulation calibration: per replication draw (theta, y) from the
// prior-model joint, build the grid posterior, and record per-component
// z-score, shrinkage, and quantile rank.  Replications whose posterior
// degenerates numerically are excluded and counted; more than 1% is an
// error.
CalibrationStudy run_calibration_study(const ModelFamily& model, const Prior& prior,
                                       const GridSpec& grid, std::size_t n_rep, RngKey key,
                                       const DecisionRule* rule = nullptr,
                                       const StudyLoss* loss = nullptr, unsigned workers = 1,
                                       std::string config_fingerprint = {});

// Per-component prior sd: closed form where the prior provides it, otherwise
// Monte Carlo with n_mc draws.
std::vector<double> prior_component_sd(const Prior& prior, RngKey key, std::size_t n_mc = 100000);

// Expected loss under the prior-model joint distribution.
RiskEstimate joint_expected_loss(const ModelFamily& model, const Prior& prior,
                                 const std::function<double(const Observation&, const ParamPoint&)>& loss,
                                 std::size_t n_rep, RngKey key, unsigned workers = 1);

struct EyeChartRow {
    std::size_t component = 0;
    std::size_t replication = 0;
    double z = 0.0;
    double shrinkage = 0.0;
};

// Scatter data of z against shrinkage with fixed classification thresholds:
// weak identification when s < weak_s, overfit tail when z > overfit_z and
// s > overfit_s, prior tension when z > overfit_z and s < overfit_s.
struct EyeChart {
    std::vector<EyeChartRow> rows;
    double weak_s = 0.1;
    double overfit_z = 4.0;
    double overfit_s = 0.9;
    double frac_weak = 0.0;
    double frac_overfit = 0.0;
    double frac_prior_tension = 0.0;
    double median_shrinkage = 0.0;
};

EyeChart eye_chart_dataset(const CalibrationStudy& study, double weak_s = 0.1,
                           double overfit_z = 4.0, double overfit_s = 0.9);

// 20-bin chi-squared uniformity statistic for ranks in [0, 1].
double rank_uniformity_chi2(std::span<const double> ranks, std::size_t bins = 20);

// Per-component summary used by the study CSV output.
struct ComponentSummary {
    std::size_t component = 0;
    double frac_weak = 0.0;
    double frac_overfit = 0.0;
    double rank_chi2 = 0.0;
};

std::vector<ComponentSummary> summarize_study(const CalibrationStudy& study, double weak_s = 0.1,
                                              double overfit_z = 4.0, double overfit_s = 0.9);

std::string calibration_records_csv(const CalibrationStudy& study);
std::string calibration_summary_csv(const CalibrationStudy& study);
std::string eye_chart_csv(const EyeChart& chart);

} // namespace calib
