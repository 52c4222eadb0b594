#include "calib/decisions.hpp"

#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>

#include "calib/csv.hpp"
#include "calib/hypothesis.hpp"
#include "calib/parallel.hpp"
#include "calib/predictive.hpp"

namespace calib {

const char* to_string(Decision d) {
    switch (d) {
    case Decision::ClaimAbsence: return "claim_absence";
    case Decision::ClaimPresence: return "claim_presence";
    case Decision::NoClaim: return "no_claim";
    }
    throw std::logic_error("to_string: bad Decision");
}

DecisionRule nhst_rule(const ModelFamily& model, const ParamPoint& theta_null, double alpha,
                       bool two_sided) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("nhst_rule: alpha must be in (0, 1)");
    model.param_space.require_in_bounds(theta_null);
    auto m = std::make_shared<ModelFamily>(model);
    auto t0 = std::make_shared<ParamPoint>(theta_null);
    DecisionRule rule;
    rule.name = "nhst";
    rule.decide = [m, t0, alpha, two_sided](const Observation& y) {
        const double p = p_value_analytic(*m, *t0, test_statistic(y), two_sided);
        return reject_null(p, alpha) ? Decision::ClaimPresence : Decision::ClaimAbsence;
    };
    return rule;
}

DecisionRule rope_rule(const ModelFamily& model, const Prior& prior, const GridSpec& grid,
                       double theta0, double alpha) {
    if (!(theta0 >= 0.0)) throw std::invalid_argument("rope_rule: theta0 must be non-negative");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("rope_rule: alpha must be in (0, 1)");
    grid.validate();
    const auto ph = model.param_space.phenom_indices();
    if (ph.empty()) throw std::invalid_argument("rope_rule: no phenomenological component");
    const std::size_t component = ph[0];
    auto m = std::make_shared<ModelFamily>(model);
    auto pr = std::make_shared<Prior>(prior);
    auto g = std::make_shared<GridSpec>(grid);
    DecisionRule rule;
    rule.name = "rope";
    rule.decide = [m, pr, g, component, theta0, alpha](const Observation& y) {
        const GridPosterior gp = build_grid_posterior(*m, *pr, y, *g);
        const double mass = interval_probability(gp, component, -theta0, theta0);
        return mass < 1.0 - alpha ? Decision::ClaimPresence : Decision::ClaimAbsence;
    };
    return rule;
}

double Hypothesis::log_evidence(const Observation& y) const {
    if (point) {
        validate_observation(model, y);
        return log_density(model, y, *point);
    }
    if (!prior || !grid)
        throw std::logic_error("Hypothesis: needs either a point or prior and grid");
    return build_grid_posterior(model, *prior, y, *grid).log_evidence;
}

Hypothesis point_hypothesis(ModelFamily model, ParamPoint theta, double prior_prob) {
    if (!(prior_prob > 0.0 && prior_prob < 1.0))
        throw std::invalid_argument("point_hypothesis: prior probability must be in (0, 1)");
    model.param_space.require_in_bounds(theta);
    Hypothesis h;
    h.model = std::move(model);
    h.point = std::move(theta);
    h.prior_prob = prior_prob;
    return h;
}

Hypothesis model_hypothesis(ModelFamily model, Prior prior, GridSpec grid, double prior_prob) {
    if (!(prior_prob > 0.0 && prior_prob < 1.0))
        throw std::invalid_argument("model_hypothesis: prior probability must be in (0, 1)");
    grid.validate();
    Hypothesis h;
    h.model = std::move(model);
    h.prior = std::move(prior);
    h.grid = std::move(grid);
    h.prior_prob = prior_prob;
    return h;
}

Decision bayes_factor_decision(double log_evidence_absence, double log_evidence_presence,
                               double prior_prob_absence, double prior_prob_presence) {
    if (!(prior_prob_absence > 0.0) || !(prior_prob_presence > 0.0))
        throw std::invalid_argument("bayes_factor_decision: prior probabilities must be positive");
    const double threshold = std::log(prior_prob_absence / prior_prob_presence);
    return (log_evidence_presence - log_evidence_absence > threshold) ? Decision::ClaimPresence
                                                                      : Decision::ClaimAbsence;
}

DecisionRule bayes_factor_rule(const Hypothesis& absence, const Hypothesis& presence) {
    auto a = std::make_shared<Hypothesis>(absence);
    auto p = std::make_shared<Hypothesis>(presence);
    DecisionRule rule;
    rule.name = "bayes_factor";
    rule.decide = [a, p](const Observation& y) {
        return bayes_factor_decision(a->log_evidence(y), p->log_evidence(y), a->prior_prob,
                                     p->prior_prob);
    };
    return rule;
}

PredictiveDistribution fit_predictive(const Hypothesis& h, const Observation& y) {
    if (h.point) return plugin_predictive(h.model, *h.point);
    if (!h.prior || !h.grid)
        throw std::logic_error("Hypothesis: needs either a point or prior and grid");
    const GridPosterior gp = build_grid_posterior(h.model, *h.prior, y, *h.grid);
    return posterior_predictive(h.model, gp);
}

DecisionRule predictive_score_rule(const Hypothesis& absence, const Hypothesis& presence,
                                   Observation holdout) {
    if (holdout.n_rows == 0)
        throw std::invalid_argument("predictive_score_rule: empty holdout");
    auto a = std::make_shared<Hypothesis>(absence);
    auto p = std::make_shared<Hypothesis>(presence);
    auto h = std::make_shared<Observation>(std::move(holdout));
    DecisionRule rule;
    rule.name = "predictive_score";
    rule.decide = [a, p, h](const Observation& y) {
        const double score_a = predictive_score(fit_predictive(*a, y), *h).value;
        const double score_p = predictive_score(fit_predictive(*p, y), *h).value;
        return score_p < score_a ? Decision::ClaimPresence : Decision::ClaimAbsence;
    };
    return rule;
}

WilsonInterval RateTable::wilson(std::size_t truth_row, Decision d, double z) const {
    if (truth_row > 1) throw std::invalid_argument("RateTable: truth row must be 0 or 1");
    if (!row_defined[truth_row]) throw std::runtime_error("RateTable: undefined truth row");
    const RateCell& c = cells[truth_row][static_cast<std::size_t>(d)];
    return wilson_interval(c.count, row_totals[truth_row], z);
}

namespace {

double max_abs_phenom(const ParamSpace& space, const ParamPoint& theta) {
    double m = 0.0;
    for (std::size_t i : space.phenom_indices()) m = std::max(m, std::abs(theta[i]));
    return m;
}

void fill_row(std::array<RateCell, 3>& row, const std::array<std::size_t, 3>& counts,
              std::size_t total) {
    for (std::size_t d = 0; d < 3; ++d) {
        row[d].count = counts[d];
        row[d].rate = static_cast<double>(counts[d]) / static_cast<double>(total);
        row[d].std_error = binomial_se(row[d].rate, total);
    }
}

} // namespace

RateTable estimate_rate_table(const ModelFamily& model, const Prior& prior,
                              const DecisionRule& rule, const RateTableRequest& req, RngKey key) {
    if (req.n_rep < 2) throw std::invalid_argument("estimate_rate_table: n_rep must be at least 2");
    if (!(req.theta0 >= 0.0))
        throw std::invalid_argument("estimate_rate_table: theta0 must be non-negative");

    RateTable table;
    for (auto& row : table.cells)
        for (auto& c : row) c = RateCell{};

    if (req.mode == RateTableMode::ConditionalOnPhenom) {
        const auto ph = model.param_space.phenom_indices();
        if (req.absence_phenom.size() != ph.size() || req.presence_phenom.size() != ph.size())
            throw std::invalid_argument("estimate_rate_table: phenom value count mismatch");
        double abs_mag = 0.0, pres_mag = 0.0;
        for (double v : req.absence_phenom) abs_mag = std::max(abs_mag, std::abs(v));
        for (double v : req.presence_phenom) pres_mag = std::max(pres_mag, std::abs(v));
        if (abs_mag > req.theta0)
            throw std::invalid_argument("estimate_rate_table: absence phenom outside partition");
        if (pres_mag <= req.theta0)
            throw std::invalid_argument("estimate_rate_table: presence phenom inside partition");

        for (std::size_t rowi = 0; rowi < 2; ++rowi) {
            const std::vector<double>& phenom =
                rowi == 0 ? req.absence_phenom : req.presence_phenom;
            const RngKey row_key = key.derive(rowi + 1);
            std::vector<Decision> decisions(req.n_rep);
            parallel_for(req.n_rep, req.workers, [&](std::size_t r) {
                RngStream rng = row_key.stream(r);
                const auto [theta, y] = sample_conditional_joint(model, prior, phenom, rng);
                decisions[r] = rule.decide(y);
            });
            std::array<std::size_t, 3> counts = {0, 0, 0};
            for (Decision d : decisions) ++counts[static_cast<std::size_t>(d)];
            fill_row(table.cells[rowi], counts, req.n_rep);
            table.row_totals[rowi] = req.n_rep;
            table.row_defined[rowi] = true;
        }
        return table;
    }

    // Model-prior mode: joint draws, rows split by the phenom magnitude.
    std::vector<Decision> decisions(req.n_rep);
    std::vector<char> is_presence(req.n_rep);
    parallel_for(req.n_rep, req.workers, [&](std::size_t r) {
        RngStream rng = key.stream(r);
        const auto [theta, y] = sample_joint(model, prior, rng);
        is_presence[r] = max_abs_phenom(model.param_space, theta) > req.theta0 ? 1 : 0;
        decisions[r] = rule.decide(y);
    });
    std::array<std::array<std::size_t, 3>, 2> counts = {{{0, 0, 0}, {0, 0, 0}}};
    std::array<std::size_t, 2> totals = {0, 0};
    for (std::size_t r = 0; r < req.n_rep; ++r) {
        const std::size_t rowi = is_presence[r] ? 1 : 0;
        ++counts[rowi][static_cast<std::size_t>(decisions[r])];
        ++totals[rowi];
    }
    for (std::size_t rowi = 0; rowi < 2; ++rowi) {
        table.row_totals[rowi] = totals[rowi];
        table.row_defined[rowi] = totals[rowi] > 0;
        if (totals[rowi] > 0) fill_row(table.cells[rowi], counts[rowi], totals[rowi]);
    }
    return table;
}

void append_rate_table_csv(const RateTable& table, std::string& out, bool header) {
    CsvBuilder csv({"truth", "decision", "rate", "se", "count"});
    static const char* truth_names[2] = {"absence", "presence"};
    for (std::size_t rowi = 0; rowi < 2; ++rowi) {
        if (!table.row_defined[rowi]) continue;
        for (std::size_t d = 0; d < 3; ++d) {
            csv.begin_row();
            csv.add(truth_names[rowi]);
            csv.add(to_string(static_cast<Decision>(d)));
            csv.add(table.cells[rowi][d].rate);
            csv.add(table.cells[rowi][d].std_error);
            csv.add(table.cells[rowi][d].count);
            csv.end_row();
        }
    }
    out += csv.str(header);
}

ClaimLossReport expected_claim_loss(const RateTable& table, const ClaimLoss& loss,
                                    double prob_absence, double prob_presence) {
    if (!std::isfinite(loss.false_claim) || !std::isfinite(loss.true_claim))
        throw std::invalid_argument("expected_claim_loss: losses must be finite");
    if (std::abs(prob_absence + prob_presence - 1.0) > 1e-12)
        throw std::invalid_argument("expected_claim_loss: truth weights must sum to 1");
    if (!table.row_defined[0] || !table.row_defined[1])
        throw std::runtime_error("expected_claim_loss: undefined truth row");
    ClaimLossReport r;
    r.truth_weighted = prob_absence * table.fdr() * loss.false_claim +
                       prob_presence * table.tdr() * loss.true_claim;
    r.unweighted_variant = (1.0 - table.fdr()) * loss.false_claim + table.tdr() * loss.true_claim;
    return r;
}

} // namespace calib
