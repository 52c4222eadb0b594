#include "calib/frequentist.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>

#include "calib/parallel.hpp"
#include "calib/stats.hpp"

namespace calib {

LossFunction lp_loss(double p) {
    if (!(p > 0.0) || !std::isfinite(p)) throw std::invalid_argument("lp_loss: p must be positive");
    char buf[32];
    std::snprintf(buf, sizeof buf, "l%g", p);
    LossFunction loss;
    loss.name = buf;
    loss.evaluate = [p](const ParamPoint& est, const ParamPoint& truth) {
        if (est.size() != truth.size())
            throw std::invalid_argument("lp_loss: estimate/truth dimension mismatch");
        double total = 0.0;
        for (std::size_t i = 0; i < est.size(); ++i) {
            const double d = std::abs(est[i] - truth[i]);
            total += (p == 2.0) ? d * d : (p == 1.0 ? d : std::pow(d, p));
        }
        return total;
    };
    return loss;
}

SetLossFunction inclusion_loss() {
    SetLossFunction loss;
    loss.name = "inclusion";
    loss.evaluate = [](const SetEstimator& est, const Observation& y, const ParamPoint& truth) {
        return est.contains(y, truth) ? 1.0 : 0.0;
    };
    return loss;
}

namespace {

struct RepOutcome {
    double loss = 0.0;
    bool failed = false;
};

RiskEstimate reduce_outcomes(const std::vector<RepOutcome>& outcomes) {
    std::vector<double> losses;
    losses.reserve(outcomes.size());
    std::size_t failures = 0;
    for (const RepOutcome& o : outcomes) {
        if (o.failed)
            ++failures;
        else
            losses.push_back(o.loss);
    }
    if (failures * 100 > outcomes.size())
        throw std::runtime_error("expected_loss: estimator failure rate above 1%");
    if (losses.size() < 2)
        throw std::runtime_error("expected_loss: fewer than 2 successful replications");
    const MeanSd ms = mean_sd(losses);
    RiskEstimate r;
    r.value = ms.mean;
    r.std_error = ms.sd / std::sqrt(static_cast<double>(losses.size()));
    r.n_replications = losses.size();
    r.n_failures = failures;
    return r;
}

} // namespace

RiskEstimate expected_loss(const ModelFamily& model, const ParamPoint& theta,
                           const PointEstimator& estimator, const LossFunction& loss,
                           std::size_t n_rep, RngKey key, unsigned workers) {
    if (n_rep < 2) throw std::invalid_argument("expected_loss: n_rep must be at least 2");
    model.param_space.require_in_bounds(theta);
    std::vector<RepOutcome> outcomes(n_rep);
    parallel_for(n_rep, workers, [&](std::size_t r) {
        RngStream rng = key.stream(r);
        const Observation y = sample_observation(model, theta, rng);
        try {
            const ParamPoint est = estimator.estimate(y);
            outcomes[r].loss = loss.evaluate(est, theta);
        } catch (const EstimatorFailure&) {
            outcomes[r].failed = true;
        }
    });
    return reduce_outcomes(outcomes);
}

RiskEstimate expected_set_loss(const ModelFamily& model, const ParamPoint& theta,
                               const SetEstimator& estimator, const SetLossFunction& loss,
                               std::size_t n_rep, RngKey key, unsigned workers) {
    if (n_rep < 2) throw std::invalid_argument("expected_set_loss: n_rep must be at least 2");
    model.param_space.require_in_bounds(theta);
    std::vector<RepOutcome> outcomes(n_rep);
    parallel_for(n_rep, workers, [&](std::size_t r) {
        RngStream rng = key.stream(r);
        const Observation y = sample_observation(model, theta, rng);
        try {
            outcomes[r].loss = loss.evaluate(estimator, y, theta);
        } catch (const EstimatorFailure&) {
            outcomes[r].failed = true;
        }
    });
    return reduce_outcomes(outcomes);
}

RiskEstimate coverage(const ModelFamily& model, const ParamPoint& theta,
                      const SetEstimator& estimator, std::size_t n_rep, RngKey key,
                      unsigned workers) {
    RiskEstimate r = expected_set_loss(model, theta, estimator, inclusion_loss(), n_rep, key, workers);
    r.std_error = binomial_se(r.value, r.n_replications);
    return r;
}

WorstRisk max_expected_loss(const ModelFamily& model, std::span<const ParamPoint> truth_grid,
                            const PointEstimator& estimator, const LossFunction& loss,
                            std::size_t n_rep, RngKey key, unsigned workers) {
    if (truth_grid.empty()) throw std::invalid_argument("max_expected_loss: empty truth grid");
    WorstRisk worst;
    worst.per_point.reserve(truth_grid.size());
    for (std::size_t g = 0; g < truth_grid.size(); ++g) {
        // Same key for every grid point: common random numbers.
        const RiskEstimate r = expected_loss(model, truth_grid[g], estimator, loss, n_rep, key, workers);
        worst.per_point.push_back(r);
        if (g == 0 || r.value > worst.risk.value) {
            worst.risk = r;
            worst.at = truth_grid[g];
            worst.index = g;
        }
    }
    return worst;
}

MinimaxSelection minimax_select(const ModelFamily& model,
                                std::span<const PointEstimator> estimators,
                                std::span<const ParamPoint> truth_grid, const LossFunction& loss,
                                std::size_t n_rep, RngKey key, unsigned workers) {
    if (estimators.empty()) throw std::invalid_argument("minimax_select: no estimators");
    MinimaxSelection sel;
    sel.per_estimator.reserve(estimators.size());
    for (std::size_t e = 0; e < estimators.size(); ++e) {
        WorstRisk w = max_expected_loss(model, truth_grid, estimators[e], loss, n_rep, key, workers);
        if (e == 0 || w.risk.value < sel.worst.risk.value) {
            sel.index = e;
            sel.name = estimators[e].name;
            sel.worst = w;
        }
        sel.per_estimator.push_back(std::move(w));
    }
    return sel;
}

namespace {

// Second-order partials by central differences; stencil points are pulled
// inside the box when the center sits near a face.
class HessianProbe {
public:
    HessianProbe(const std::function<double(std::span<const double>)>& f, const BoxSpec& box,
                 std::vector<double> center)
        : f_(f), box_(box), x_(std::move(center)) {}

    double step(std::size_t d) const {
        const double h = 1e-4 * std::max(1.0, std::abs(x_[d]));
        return std::min(h, 0.25 * (box_.hi[d] - box_.lo[d]));
    }

    double center_for(std::size_t d, double h) const {
        return std::clamp(x_[d], box_.lo[d] + h, box_.hi[d] - h);
    }

    double eval(std::span<const double> p) const { return f_(p); }

    double diag(std::size_t d) const {
        const double h = step(d);
        std::vector<double> p = x_;
        p[d] = center_for(d, h);
        const double c = p[d];
        const double f0 = eval(p);
        p[d] = c + h;
        const double fp = eval(p);
        p[d] = c - h;
        const double fm = eval(p);
        return (fp - 2.0 * f0 + fm) / (h * h);
    }

    double cross(std::size_t a, std::size_t b) const {
        const double ha = step(a), hb = step(b);
        std::vector<double> p = x_;
        const double ca = center_for(a, ha);
        const double cb = center_for(b, hb);
        p[a] = ca + ha; p[b] = cb + hb;
        const double fpp = eval(p);
        p[a] = ca + ha; p[b] = cb - hb;
        const double fpm = eval(p);
        p[a] = ca - ha; p[b] = cb + hb;
        const double fmp = eval(p);
        p[a] = ca - ha; p[b] = cb - hb;
        const double fmm = eval(p);
        return (fpp - fpm - fmp + fmm) / (4.0 * ha * hb);
    }

private:
    const std::function<double(std::span<const double>)>& f_;
    const BoxSpec& box_;
    std::vector<double> x_;
};

} // namespace

MleResult mle(const ModelFamily& model, const Observation& y, const BoxSpec& box) {
    box.validate();
    const std::size_t dim = model.param_space.size();
    if (box.size() != dim) throw std::invalid_argument("mle: box dimension mismatch");

    // Out-of-bounds corners of the box simply evaluate to -inf.
    const std::function<double(std::span<const double>)> objective = [&](std::span<const double> x) {
        ParamPoint t;
        t.values.assign(x.begin(), x.end());
        if (!model.param_space.in_bounds(t)) return -std::numeric_limits<double>::infinity();
        return log_density(model, y, t);
    };

    const OptimResult opt = maximize_box(objective, box);

    MleResult res;
    res.theta.values = opt.x;
    res.log_likelihood = opt.value;
    res.on_boundary = opt.on_boundary;

    res.observed_info.n = dim;
    res.observed_info.data.assign(dim * dim, 0.0);
    HessianProbe probe(objective, box, opt.x);
    for (std::size_t i = 0; i < dim; ++i) {
        res.observed_info(i, i) = -probe.diag(i);
        for (std::size_t j = i + 1; j < dim; ++j) {
            const double v = -probe.cross(i, j);
            res.observed_info(i, j) = v;
            res.observed_info(j, i) = v;
        }
    }
    return res;
}

PointEstimator mean_estimator(std::string name) {
    PointEstimator e;
    e.name = std::move(name);
    e.estimate = [](const Observation& y) { return ParamPoint{{observation_mean(y)}}; };
    return e;
}

PointEstimator scaled_mean_estimator(double factor) {
    if (!std::isfinite(factor)) throw std::invalid_argument("scaled_mean_estimator: non-finite factor");
    char buf[48];
    std::snprintf(buf, sizeof buf, "scaled_mean_%g", factor);
    PointEstimator e;
    e.name = buf;
    e.estimate = [factor](const Observation& y) {
        return ParamPoint{{factor * observation_mean(y)}};
    };
    return e;
}

PointEstimator mle_estimator(const ModelFamily& model, BoxSpec box, std::string name) {
    box.validate();
    auto shared_model = std::make_shared<ModelFamily>(model);
    auto shared_box = std::make_shared<BoxSpec>(std::move(box));
    PointEstimator e;
    e.name = std::move(name);
    e.estimate = [shared_model, shared_box](const Observation& y) {
        return mle(*shared_model, y, *shared_box).theta;
    };
    return e;
}

SetEstimator normal_mean_interval(const ModelFamily& model, double level) {
    if (!(level > 0.0 && level < 1.0))
        throw std::invalid_argument("normal_mean_interval: level must be in (0, 1)");
    if (!model.gaussian_row)
        throw std::invalid_argument("normal_mean_interval: model lacks a Gaussian row law");
    if (model.param_space.size() != 1)
        throw std::invalid_argument("normal_mean_interval: single-component families only");
    const double sigma = model.gaussian_row->sd(representative_point(model.param_space));
    const double half = normal_quantile(0.5 * (1.0 + level)) * sigma /
                        std::sqrt(static_cast<double>(model.n_obs));
    SetEstimator s;
    s.name = "normal_mean_interval";
    s.contains = [half](const Observation& y, const ParamPoint& truth) {
        return std::abs(observation_mean(y) - truth[0]) <= half;
    };
    s.intervals = [half](const Observation& y) {
        const double c = observation_mean(y);
        return std::vector<std::array<double, 2>>{{c - half, c + half}};
    };
    return s;
}

} // namespace calib
