#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "calib/grid_posterior.hpp"
#include "calib/model_family.hpp"
#include "calib/rng.hpp"
#include "calib/stats.hpp"

namespace calib {

enum class Decision { ClaimAbsence = 0, ClaimPresence = 1, NoClaim = 2 };

const char* to_string(Decision d);

struct DecisionRule {
    std::string name;
    std::function<Decision(const Observation&)> decide;
};

// Null hypothesis test as a dichotomous rule: ClaimPresence on rejection
// (p < 1 - alpha), ClaimAbsence otherwise.
DecisionRule nhst_rule(const ModelFamily& model, const ParamPoint& theta_null, double alpha,
                       bool two_sided = false);

// Region-of-practical-equivalence rule on the first phenomenological
// component: ClaimPresence when the posterior mass of [-theta0, theta0]
// drops below 1 - alpha.
DecisionRule rope_rule(const ModelFamily& model, const Prior& prior, const GridSpec& grid,
                       double theta0, double alpha);

// One side of a model comparison: either a full model with prior and
// quadrature grid, or a point model (all parameters pinned).
struct Hypothesis {
    ModelFamily model;
    std::optional<Prior> prior;
    std::optional<GridSpec> grid;
    std::optional<ParamPoint> point;
    double prior_prob = 0.5;

    double log_evidence(const Observation& y) const;
};

Hypothesis point_hypothesis(ModelFamily model, ParamPoint theta, double prior_prob = 0.5);
Hypothesis model_hypothesis(ModelFamily model, Prior prior, GridSpec grid,
                            double prior_prob = 0.5);

// ClaimPresence when evidence_presence - evidence_absence exceeds the prior
// odds threshold log(P(absence)/P(presence)); ties claim absence.
Decision bayes_factor_decision(double log_evidence_absence, double log_evidence_presence,
                               double prior_prob_absence, double prior_prob_presence);
DecisionRule bayes_factor_rule(const Hypothesis& absence, const Hypothesis& presence);

// Fits each hypothesis's predictive distribution on the decision observation
// and scores it on the fixed holdout; ClaimPresence only when strictly
// better (lower score).
DecisionRule predictive_score_rule(const Hypothesis& absence, const Hypothesis& presence,
                                   Observation holdout);

// Plugin density for point hypotheses, grid posterior predictive otherwise.
struct PredictiveDistribution;
PredictiveDistribution fit_predictive(const Hypothesis& h, const Observation& y);

struct RateCell {
    double rate = 0.0;
    double std_error = 0.0;
    std::size_t count = 0;
};

// Decision rates conditional on the truth partition.  Row 0: absence
// (phenom = 0), row 1: presence.  Rows are normalized independently.
struct RateTable {
    std::array<std::array<RateCell, 3>, 2> cells;
    std::array<std::size_t, 2> row_totals = {0, 0};
    std::array<bool, 2> row_defined = {false, false};

    double fdr() const { return cells[0][1].rate; } // P(ClaimPresence | absence)
    double tdr() const { return cells[1][1].rate; } // P(ClaimPresence | presence)
    WilsonInterval wilson(std::size_t truth_row, Decision d, double z) const;
};

enum class RateTableMode {
    // Truths drawn from the prior conditioned on fixed phenom values per row.
    ConditionalOnPhenom,
    // Truths drawn from the full prior; rows split by |phenom| <= theta0.
    ModelPrior,
};

struct RateTableRequest {
    RateTableMode mode = RateTableMode::ConditionalOnPhenom;
    std::size_t n_rep = 1000;                 // per row in conditional mode, total otherwise
    std::vector<double> absence_phenom;        // conditional mode
    std::vector<double> presence_phenom;       // conditional mode
    double theta0 = 0.0;                       // partition half-width, model-prior mode
    unsigned workers = 1;
};

RateTable estimate_rate_table(const ModelFamily& model, const Prior& prior,
                              const DecisionRule& rule, const RateTableRequest& req, RngKey key);

void append_rate_table_csv(const RateTable& table, std::string& out, bool header = true);

struct ClaimLoss {
    double false_claim = 1.0; // penalty for claiming presence under absence
    double true_claim = 0.0;  // reward (negative) or cost for a correct claim
};

struct ClaimLossReport {
    // P(absence) * FDR * false_claim + P(presence) * TDR * true_claim
    double truth_weighted = 0.0;
    // (1 - FDR) * false_claim + TDR * true_claim, reported for comparison
    double unweighted_variant = 0.0;
};

ClaimLossReport expected_claim_loss(const RateTable& table, const ClaimLoss& loss,
                                    double prob_absence, double prob_presence);

} // namespace calib
