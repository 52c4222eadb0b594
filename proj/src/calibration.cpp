#include "calib/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "calib/csv.hpp"
#include "calib/parallel.hpp"
#include "calib/stats.hpp"

namespace calib {

double z_score(double post_mean, double post_sd, double theta_true) {
    if (!(post_sd > 0.0)) throw std::domain_error("z_score: post_sd must be positive");
    return std::abs((post_mean - theta_true) / post_sd);
}

double shrinkage(double post_sd, double prior_sd) {
    if (!(prior_sd > 0.0)) throw std::domain_error("shrinkage: prior_sd must be positive");
    const double r = post_sd / prior_sd;
    return 1.0 - r * r;
}

double quantile_rank(const GridPosterior& gp, std::size_t component, double theta_true) {
    const std::size_t axis = gp.axis_of_component(component);
    const std::vector<double>& x = gp.axis_nodes[axis];
    if (theta_true < x.front()) return 0.0;
    if (theta_true > x.back()) return 1.0;
    const std::vector<double> m = marginal_masses(gp, component);
    // nearest node; grids are uniform so midpoint comparison suffices
    std::size_t j = 0;
    double best = std::abs(x[0] - theta_true);
    for (std::size_t i = 1; i < x.size(); ++i) {
        const double d = std::abs(x[i] - theta_true);
        if (d < best) {
            best = d;
            j = i;
        }
    }
    double below = 0.0;
    for (std::size_t i = 0; i < j; ++i) below += m[i];
    return std::clamp(below + 0.5 * m[j], 0.0, 1.0);
}

std::vector<double> prior_component_sd(const Prior& prior, RngKey key, std::size_t n_mc) {
    const std::size_t dim = prior.param_space.size();
    std::vector<double> tau(dim, std::numeric_limits<double>::quiet_NaN());
    bool need_mc = false;
    for (std::size_t i = 0; i < dim; ++i) {
        if (i < prior.component_sd.size() && std::isfinite(prior.component_sd[i]))
            tau[i] = prior.component_sd[i];
        else
            need_mc = true;
    }
    if (!need_mc) return tau;

    if (n_mc < 2) throw std::invalid_argument("prior_component_sd: n_mc must be at least 2");
    std::vector<std::vector<double>> draws(dim, std::vector<double>(n_mc));
    RngStream rng = key.stream(0);
    for (std::size_t r = 0; r < n_mc; ++r) {
        const ParamPoint t = prior.sampler(rng);
        for (std::size_t i = 0; i < dim; ++i) draws[i][r] = t[i];
    }
    for (std::size_t i = 0; i < dim; ++i)
        if (!std::isfinite(tau[i])) tau[i] = mean_sd(draws[i]).sd;
    return tau;
}

CalibrationStudy run_calibration_study(const ModelFamily& model, const Prior& prior,
                                       const GridSpec& grid, std::size_t n_rep, RngKey key,
                                       const DecisionRule* rule, const StudyLoss* loss,
                                       unsigned workers, std::string config_fingerprint) {
    if (n_rep < 2) throw std::invalid_argument("run_calibration_study: n_rep must be at least 2");
    grid.validate();

    CalibrationStudy study;
    study.master_seed = key.seed;
    study.n_requested = n_rep;
    study.config_fingerprint = std::move(config_fingerprint);
    study.prior_sd = prior_component_sd(prior, key.derive(0xA5));

    const std::size_t dim = model.param_space.size();
    for (double tau : study.prior_sd)
        if (!(tau > 0.0))
            throw std::domain_error("run_calibration_study: prior sd must be positive per component");

    struct Slot {
        CalibrationRecord record;
        bool failed = false;
    };
    std::vector<Slot> slots(n_rep);

    parallel_for(n_rep, workers, [&](std::size_t r) {
        RngStream rng = key.stream(r);
        const auto [theta, y] = sample_joint(model, prior, rng);
        Slot& slot = slots[r];
        try {
            const GridPosterior gp = build_grid_posterior(model, prior, y, grid);
            CalibrationRecord& rec = slot.record;
            rec.replication = r;
            rec.theta_true = theta;
            rec.post_mean.resize(dim);
            rec.post_sd.resize(dim);
            rec.z.resize(dim);
            rec.shrinkage.resize(dim);
            rec.rank.resize(dim);
            for (std::size_t c = 0; c < dim; ++c) {
                const MeanSd ms = posterior_mean_sd(gp, c);
                rec.post_mean[c] = ms.mean;
                rec.post_sd[c] = ms.sd;
                rec.z[c] = z_score(ms.mean, ms.sd, theta[c]);
                rec.shrinkage[c] = shrinkage(ms.sd, study.prior_sd[c]);
                rec.rank[c] = quantile_rank(gp, c, theta[c]);
            }
            if (rule) rec.decision = rule->decide(y);
            if (loss) rec.loss = (*loss)(y, theta, gp);
        } catch (const std::runtime_error&) {
            slot.failed = true; // degenerate posterior; excluded and counted
        }
    });

    for (Slot& slot : slots) {
        if (slot.failed)
            ++study.n_failed;
        else
            study.records.push_back(std::move(slot.record));
    }
    if (study.n_failed * 100 > n_rep)
        throw std::runtime_error("run_calibration_study: degenerate-posterior rate above 1%");
    return study;
}

RiskEstimate joint_expected_loss(const ModelFamily& model, const Prior& prior,
                                 const std::function<double(const Observation&, const ParamPoint&)>& loss,
                                 std::size_t n_rep, RngKey key, unsigned workers) {
    if (n_rep < 2) throw std::invalid_argument("joint_expected_loss: n_rep must be at least 2");
    std::vector<double> losses(n_rep);
    parallel_for(n_rep, workers, [&](std::size_t r) {
        RngStream rng = key.stream(r);
        const auto [theta, y] = sample_joint(model, prior, rng);
        losses[r] = loss(y, theta);
    });
    const MeanSd ms = mean_sd(losses);
    RiskEstimate out;
    out.value = ms.mean;
    out.std_error = ms.sd / std::sqrt(static_cast<double>(n_rep));
    out.n_replications = n_rep;
    return out;
}

EyeChart eye_chart_dataset(const CalibrationStudy& study, double weak_s, double overfit_z,
                           double overfit_s) {
    EyeChart chart;
    chart.weak_s = weak_s;
    chart.overfit_z = overfit_z;
    chart.overfit_s = overfit_s;

    std::vector<double> shrinkages;
    std::size_t weak = 0, overfit = 0, tension = 0;
    for (const CalibrationRecord& rec : study.records) {
        for (std::size_t c = 0; c < rec.z.size(); ++c) {
            chart.rows.push_back(EyeChartRow{c, rec.replication, rec.z[c], rec.shrinkage[c]});
            shrinkages.push_back(rec.shrinkage[c]);
            if (rec.shrinkage[c] < weak_s) ++weak;
            if (rec.z[c] > overfit_z && rec.shrinkage[c] > overfit_s) ++overfit;
            if (rec.z[c] > overfit_z && rec.shrinkage[c] < overfit_s) ++tension;
        }
    }
    if (!chart.rows.empty()) {
        const double n = static_cast<double>(chart.rows.size());
        chart.frac_weak = static_cast<double>(weak) / n;
        chart.frac_overfit = static_cast<double>(overfit) / n;
        chart.frac_prior_tension = static_cast<double>(tension) / n;
        std::sort(shrinkages.begin(), shrinkages.end());
        chart.median_shrinkage = quantile_sorted(shrinkages, 0.5);
    }
    return chart;
}

double rank_uniformity_chi2(std::span<const double> ranks, std::size_t bins) {
    if (bins < 2) throw std::invalid_argument("rank_uniformity_chi2: need at least 2 bins");
    if (ranks.empty()) throw std::invalid_argument("rank_uniformity_chi2: empty sample");
    std::vector<std::size_t> counts(bins, 0);
    for (double r : ranks) {
        if (!(r >= 0.0 && r <= 1.0))
            throw std::domain_error("rank_uniformity_chi2: rank outside [0, 1]");
        std::size_t b = static_cast<std::size_t>(r * static_cast<double>(bins));
        if (b >= bins) b = bins - 1;
        ++counts[b];
    }
    const double expected = static_cast<double>(ranks.size()) / static_cast<double>(bins);
    double chi2 = 0.0;
    for (std::size_t c : counts) {
        const double d = static_cast<double>(c) - expected;
        chi2 += d * d / expected;
    }
    return chi2;
}

std::vector<ComponentSummary> summarize_study(const CalibrationStudy& study, double weak_s,
                                              double overfit_z, double overfit_s) {
    if (study.records.empty()) return {};
    const std::size_t dim = study.records.front().z.size();
    std::vector<ComponentSummary> out(dim);
    for (std::size_t c = 0; c < dim; ++c) {
        std::vector<double> ranks;
        ranks.reserve(study.records.size());
        std::size_t weak = 0, overfit = 0;
        for (const CalibrationRecord& rec : study.records) {
            ranks.push_back(rec.rank[c]);
            if (rec.shrinkage[c] < weak_s) ++weak;
            if (rec.z[c] > overfit_z && rec.shrinkage[c] > overfit_s) ++overfit;
        }
        const double n = static_cast<double>(study.records.size());
        out[c].component = c;
        out[c].frac_weak = static_cast<double>(weak) / n;
        out[c].frac_overfit = static_cast<double>(overfit) / n;
        out[c].rank_chi2 = rank_uniformity_chi2(ranks);
    }
    return out;
}

std::string calibration_records_csv(const CalibrationStudy& study) {
    CsvBuilder csv({"replication", "component", "theta_true", "post_mean", "post_sd", "z",
                    "shrinkage", "rank"});
    for (const CalibrationRecord& rec : study.records) {
        for (std::size_t c = 0; c < rec.z.size(); ++c) {
            csv.begin_row();
            csv.add(rec.replication);
            csv.add(c);
            csv.add(rec.theta_true[c]);
            csv.add(rec.post_mean[c]);
            csv.add(rec.post_sd[c]);
            csv.add(rec.z[c]);
            csv.add(rec.shrinkage[c]);
            csv.add(rec.rank[c]);
            csv.end_row();
        }
    }
    return csv.str();
}

std::string calibration_summary_csv(const CalibrationStudy& study) {
    CsvBuilder csv({"component", "frac_weak", "frac_overfit", "rank_chi2"});
    for (const ComponentSummary& s : summarize_study(study)) {
        csv.begin_row();
        csv.add(s.component);
        csv.add(s.frac_weak);
        csv.add(s.frac_overfit);
        csv.add(s.rank_chi2);
        csv.end_row();
    }
    return csv.str();
}

std::string eye_chart_csv(const EyeChart& chart) {
    CsvBuilder csv({"component", "replication", "z", "shrinkage"});
    for (const EyeChartRow& row : chart.rows) {
        csv.begin_row();
        csv.add(row.component);
        csv.add(row.replication);
        csv.add(row.z);
        csv.add(row.shrinkage);
        csv.end_row();
    }
    return csv.str();
}

} // namespace calib
