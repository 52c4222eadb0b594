#include "calib/limits.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "calib/csv.hpp"
#include "calib/parallel.hpp"
#include "calib/stats.hpp"

namespace calib {

LimitResult anchored_interval(const ModelFamily& model, const Observation& y, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("anchored_interval: alpha must be in (0, 1)");
    if (!model.gaussian_row || model.param_space.size() != 1 || model.obs_dim != 1)
        throw std::invalid_argument(
            "anchored_interval: requires a single-component scalar family with a Gaussian row law");
    validate_observation(model, y);
    const double sigma = model.gaussian_row->sd(representative_point(model.param_space));
    const double z = normal_quantile(alpha);
    const double ybar = observation_mean(y);
    LimitResult r;
    r.level = alpha;
    r.kind = LimitKind::AnchoredFrequentist;
    r.upper = std::max(0.0, ybar) + z * sigma / std::sqrt(static_cast<double>(model.n_obs));
    return r;
}

LimitResult posterior_upper_limit(const GridPosterior& gp, std::size_t component, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("posterior_upper_limit: alpha must be in (0, 1)");
    const std::size_t axis = gp.axis_of_component(component);
    if (gp.axis_nodes[axis].front() < 0.0)
        throw std::domain_error("posterior_upper_limit: marginal support must lie in [0, inf)");
    LimitResult r;
    r.level = alpha;
    r.kind = LimitKind::PosteriorQuantile;
    r.upper = posterior_quantile(gp, component, 1.0 - alpha);
    return r;
}

LimitStudy limit_sensitivity(const ModelFamily& model, const Prior& prior, double alpha,
                             std::size_t n_rep, const GridSpec& grid, RngKey key,
                             unsigned workers) {
    if (n_rep < 2) throw std::invalid_argument("limit_sensitivity: n_rep must be at least 2");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("limit_sensitivity: alpha must be in (0, 1)");
    grid.validate();
    const auto ph = model.param_space.phenom_indices();
    if (ph.empty()) throw std::invalid_argument("limit_sensitivity: no phenomenological component");
    const std::size_t component = ph[0];
    const std::vector<double> zeros(ph.size(), 0.0);

    LimitStudy study;
    study.limits.resize(n_rep);
    parallel_for(n_rep, workers, [&](std::size_t r) {
        RngStream rng = key.stream(r);
        const auto [theta, y] = sample_conditional_joint(model, prior, zeros, rng);
        const GridPosterior gp = build_grid_posterior(model, prior, y, grid);
        study.limits[r] = posterior_upper_limit(gp, component, alpha);
    });

    std::vector<double> uppers(n_rep);
    for (std::size_t r = 0; r < n_rep; ++r) uppers[r] = study.limits[r].upper;
    std::sort(uppers.begin(), uppers.end());
    const double qs[5] = {0.025, 0.25, 0.5, 0.75, 0.975};
    for (std::size_t i = 0; i < 5; ++i)
        study.band.quantiles[i] = quantile_sorted(uppers, qs[i]);
    return study;
}

std::string limit_records_csv(const LimitStudy& study) {
    CsvBuilder csv({"replication", "upper"});
    for (std::size_t r = 0; r < study.limits.size(); ++r) {
        csv.begin_row();
        csv.add(r);
        csv.add(study.limits[r].upper);
        csv.end_row();
    }
    return csv.str();
}

std::string limit_band_csv(const LimitBand& band) {
    CsvBuilder csv({"quantile", "upper"});
    const double qs[5] = {0.025, 0.25, 0.5, 0.75, 0.975};
    for (std::size_t i = 0; i < 5; ++i) {
        csv.begin_row();
        csv.add(qs[i]);
        csv.add(band.quantiles[i]);
        csv.end_row();
    }
    return csv.str();
}

} // namespace calib
