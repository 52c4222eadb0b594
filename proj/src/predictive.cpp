#include "calib/predictive.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

namespace calib {

PredictiveDistribution plugin_predictive(const ModelFamily& model, const ParamPoint& theta) {
    model.param_space.require_in_bounds(theta);
    PredictiveDistribution p;
    p.kind = PredictiveKind::Plugin;
    p.row_dim = model.obs_dim;
    p.name = "plugin(" + model.name + ")";
    p.row_log_density = [f = model.row_log_density, t = theta](std::span<const double> row) {
        return f(row, t);
    };
    return p;
}

namespace {

// Nodes with their log masses; the predictive is a finite mixture.
struct MixtureSupport {
    std::vector<ParamPoint> nodes;
    std::vector<double> log_mass;
};

std::shared_ptr<MixtureSupport> mixture_from_grid(const GridPosterior& gp) {
    auto mix = std::make_shared<MixtureSupport>();
    const std::size_t dim = gp.n_axes();
    std::vector<std::size_t> idx(dim, 0);
    mix->nodes.reserve(gp.n_nodes());
    mix->log_mass.reserve(gp.n_nodes());
    for (std::size_t flat = 0; flat < gp.n_nodes(); ++flat) {
        if (gp.weights[flat] > 0.0) {
            ParamPoint t;
            t.values.resize(dim);
            for (std::size_t d = 0; d < dim; ++d) t[d] = gp.axis_nodes[d][idx[d]];
            mix->nodes.push_back(std::move(t));
            mix->log_mass.push_back(std::log(gp.weights[flat]));
        }
        for (std::size_t d = dim; d-- > 0;) {
            if (++idx[d] < gp.axis_nodes[d].size()) break;
            idx[d] = 0;
        }
    }
    if (mix->nodes.empty())
        throw std::runtime_error("posterior_predictive: no support nodes with positive mass");
    return mix;
}

PredictiveDistribution mixture_predictive(const ModelFamily& model,
                                          std::shared_ptr<MixtureSupport> mix,
                                          PredictiveKind kind, std::string name) {
    PredictiveDistribution p;
    p.kind = kind;
    p.row_dim = model.obs_dim;
    p.name = std::move(name);
    p.row_log_density = [f = model.row_log_density, mix](std::span<const double> row) {
        std::vector<double> terms(mix->nodes.size());
        for (std::size_t i = 0; i < mix->nodes.size(); ++i)
            terms[i] = mix->log_mass[i] + f(row, mix->nodes[i]);
        return log_sum_exp(terms);
    };
    return p;
}

} // namespace

PredictiveDistribution posterior_predictive(const ModelFamily& model, const GridPosterior& gp) {
    if (gp.n_axes() != model.param_space.size())
        throw std::invalid_argument("posterior_predictive: posterior must cover the full space");
    for (std::size_t a = 0; a < gp.n_axes(); ++a)
        if (gp.components[a] != a)
            throw std::invalid_argument("posterior_predictive: marginal posteriors not supported");
    return mixture_predictive(model, mixture_from_grid(gp), PredictiveKind::PosteriorPredictive,
                              "posterior_predictive(" + model.name + ")");
}

PredictiveDistribution prior_predictive(const ModelFamily& model, const Prior& prior,
                                        const GridSpec& grid) {
    grid.validate();
    if (grid.axes.size() != model.param_space.size())
        throw std::invalid_argument("prior_predictive: grid must cover the full space");

    // Quadrature masses proportional to prior density times trapezoid weight.
    GridPosterior gp;
    for (std::size_t d = 0; d < grid.axes.size(); ++d) {
        gp.components.push_back(d);
        const GridAxis& a = grid.axes[d];
        std::vector<double> nodes(a.nodes);
        const double h = (a.hi - a.lo) / static_cast<double>(a.nodes - 1);
        for (std::size_t i = 0; i < a.nodes; ++i) nodes[i] = a.lo + h * static_cast<double>(i);
        nodes.back() = a.hi;
        gp.axis_nodes.push_back(std::move(nodes));
    }
    const std::size_t dim = grid.axes.size();
    const std::size_t total = grid.total_nodes();
    std::vector<double> log_mass(total);
    std::vector<std::size_t> idx(dim, 0);
    ParamPoint theta;
    theta.values.resize(dim);
    for (std::size_t flat = 0; flat < total; ++flat) {
        double lw = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
            theta[d] = gp.axis_nodes[d][idx[d]];
            const GridAxis& a = grid.axes[d];
            const double h = (a.hi - a.lo) / static_cast<double>(a.nodes - 1);
            lw += std::log((idx[d] == 0 || idx[d] + 1 == a.nodes) ? 0.5 * h : h);
        }
        log_mass[flat] = prior.log_density(theta) + lw;
        for (std::size_t d = dim; d-- > 0;) {
            if (++idx[d] < gp.axis_nodes[d].size()) break;
            idx[d] = 0;
        }
    }
    const double lse = log_sum_exp(log_mass);
    if (!std::isfinite(lse))
        throw std::runtime_error("prior_predictive: prior mass vanishes on the grid");
    gp.weights.resize(total);
    for (std::size_t i = 0; i < total; ++i) gp.weights[i] = std::exp(log_mass[i] - lse);
    gp.log_evidence = 0.0;

    return mixture_predictive(model, mixture_from_grid(gp), PredictiveKind::PriorPredictive,
                              "prior_predictive(" + model.name + ")");
}

ScoreEstimate predictive_score(const PredictiveDistribution& pred, const Observation& holdout) {
    if (holdout.n_rows == 0) throw std::invalid_argument("predictive_score: empty holdout");
    if (holdout.row_dim != pred.row_dim)
        throw std::invalid_argument("predictive_score: row dimension mismatch");
    std::vector<double> neg_log(holdout.n_rows);
    for (std::size_t i = 0; i < holdout.n_rows; ++i)
        neg_log[i] = -pred.row_log_density(holdout.row(i));
    const MeanSd ms = mean_sd(neg_log);
    ScoreEstimate s;
    s.value = ms.mean;
    s.std_error = holdout.n_rows > 1
                      ? ms.sd / std::sqrt(static_cast<double>(holdout.n_rows))
                      : 0.0;
    s.n = holdout.n_rows;
    return s;
}

ScoreEstimate kl_divergence_mc(const ModelFamily& model, const ParamPoint& theta_true,
                               const PredictiveDistribution& pred, std::size_t n_mc, RngKey key) {
    if (n_mc < 2) throw std::invalid_argument("kl_divergence_mc: n_mc must be at least 2");
    if (model.obs_dim != pred.row_dim)
        throw std::invalid_argument("kl_divergence_mc: row dimension mismatch");
    model.param_space.require_in_bounds(theta_true);
    RngStream rng = key.stream(0);
    std::vector<double> row(model.obs_dim);
    std::vector<double> terms(n_mc);
    for (std::size_t i = 0; i < n_mc; ++i) {
        model.row_sampler(theta_true, rng, row);
        terms[i] = model.row_log_density(row, theta_true) - pred.row_log_density(row);
    }
    const MeanSd ms = mean_sd(terms);
    ScoreEstimate s;
    s.value = ms.mean;
    s.std_error = ms.sd / std::sqrt(static_cast<double>(n_mc));
    s.n = n_mc;
    return s;
}

} // namespace calib
