#include "calib/hypothesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "calib/parallel.hpp"
#include "calib/stats.hpp"

namespace calib {

bool reject_null(double p_value, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("reject_null: alpha must be in (0, 1)");
    if (!(p_value >= 0.0 && p_value <= 1.0)) throw std::domain_error("reject_null: p out of [0, 1]");
    return p_value < 1.0 - alpha;
}

double test_statistic(const Observation& y) {
    return observation_mean(y);
}

namespace {

// Mean and sd of the mean-of-entries statistic under a Gaussian row law.
struct StatLaw {
    double mean;
    double sd;
};

StatLaw statistic_law(const ModelFamily& model, const ParamPoint& theta) {
    if (!model.gaussian_row)
        throw std::invalid_argument("p_value_analytic: model lacks a Gaussian row law");
    if (model.obs_dim != 1)
        throw std::invalid_argument("p_value_analytic: scalar rows required");
    model.param_space.require_in_bounds(theta);
    const double m = model.gaussian_row->mean(theta);
    const double s = model.gaussian_row->sd(theta);
    return StatLaw{m, s / std::sqrt(static_cast<double>(model.n_obs))};
}

} // namespace

double p_value_analytic(const ModelFamily& model, const ParamPoint& theta_null, double t,
                        bool two_sided) {
    const StatLaw law = statistic_law(model, theta_null);
    const double z = (t - law.mean) / law.sd;
    if (two_sided) return std::min(1.0, 2.0 * normal_tail(std::abs(z)));
    return normal_tail(z);
}

PValueMc p_value_mc(const ModelFamily& model, const ParamPoint& theta_null, double t,
                    std::size_t n_mc, RngKey key, bool two_sided) {
    if (n_mc < 100) throw std::invalid_argument("p_value_mc: n_mc must be at least 100");
    model.param_space.require_in_bounds(theta_null);
    double center = 0.0;
    if (two_sided) {
        if (!model.gaussian_row)
            throw std::invalid_argument("p_value_mc: two-sided needs a Gaussian row law center");
        center = model.gaussian_row->mean(theta_null);
    }
    const double observed = two_sided ? std::abs(t - center) : t;
    std::size_t exceed = 0;
    RngStream rng = key.stream(0);
    for (std::size_t i = 0; i < n_mc; ++i) {
        const Observation y = sample_observation(model, theta_null, rng);
        const double s = test_statistic(y);
        const double v = two_sided ? std::abs(s - center) : s;
        if (v >= observed) ++exceed;
    }
    PValueMc out;
    out.n_mc = n_mc;
    out.value = static_cast<double>(exceed + 1) / static_cast<double>(n_mc + 1);
    out.std_error = binomial_se(out.value, n_mc);
    return out;
}

TestResult run_test(const ModelFamily& model, const ParamPoint& theta_null, const Observation& y,
                    double alpha, bool two_sided) {
    TestResult r;
    r.statistic = test_statistic(y);
    r.p_value = p_value_analytic(model, theta_null, r.statistic, two_sided);
    r.alpha = alpha;
    r.rejected = reject_null(r.p_value, alpha);
    return r;
}

PowerPoint power(const ModelFamily& model, const ParamPoint& theta_null,
                 const ParamPoint& theta_alt, double alpha, std::size_t n_rep, RngKey key,
                 bool two_sided, unsigned workers) {
    if (n_rep < 2) throw std::invalid_argument("power: n_rep must be at least 2");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("power: alpha must be in (0, 1)");
    model.param_space.require_in_bounds(theta_alt);

    std::vector<double> pvals(n_rep);
    parallel_for(n_rep, workers, [&](std::size_t r) {
        RngStream rng = key.stream(r);
        const Observation y = sample_observation(model, theta_alt, rng);
        pvals[r] = p_value_analytic(model, theta_null, test_statistic(y), two_sided);
    });

    std::size_t rejections = 0;
    for (double p : pvals)
        if (reject_null(p, alpha)) ++rejections;

    PowerPoint out;
    out.theta = theta_alt;
    out.n_rep = n_rep;
    out.power = static_cast<double>(rejections) / static_cast<double>(n_rep);
    out.std_error = binomial_se(out.power, n_rep);
    out.mean_p = neumaier_sum(pvals) / static_cast<double>(n_rep);
    out.power_avg_p = 1.0 - out.mean_p;
    return out;
}

PowerCurve power_curve(const ModelFamily& model, const ParamPoint& theta_null,
                       std::span<const ParamPoint> alternatives, double alpha, std::size_t n_rep,
                       RngKey key, double target, bool two_sided, unsigned workers) {
    if (alternatives.empty()) throw std::invalid_argument("power_curve: no alternatives");
    PowerCurve curve;
    curve.target = target;
    curve.points.reserve(alternatives.size());
    for (std::size_t i = 0; i < alternatives.size(); ++i) {
        // Shared key: common random numbers across the grid.
        PowerPoint pt = power(model, theta_null, alternatives[i], alpha, n_rep, key, two_sided, workers);
        if (i == 0 || pt.power < curve.min_power) {
            curve.min_power = pt.power;
            curve.argmin = i;
        }
        if (pt.power >= target) curve.meeting_target.push_back(i);
        curve.points.push_back(std::move(pt));
    }
    return curve;
}

ParamPoint with_phenom(const ParamSpace& space, const ParamPoint& base,
                       std::span<const double> phenom) {
    space.require_shape(base);
    const auto ph = space.phenom_indices();
    if (phenom.size() != ph.size())
        throw std::invalid_argument("with_phenom: phenom value count mismatch");
    ParamPoint out = base;
    for (std::size_t k = 0; k < ph.size(); ++k) out[ph[k]] = phenom[k];
    return out;
}

ConditionalPower conditional_power(const ModelFamily& model, std::span<const double> phenom_alt,
                                   std::span<const ParamPoint> nuisance_grid, double alpha,
                                   std::size_t n_rep, RngKey key, bool two_sided,
                                   unsigned workers) {
    if (nuisance_grid.empty()) throw std::invalid_argument("conditional_power: empty nuisance grid");
    const ParamSpace& sp = model.param_space;
    const std::vector<double> zeros(sp.phenom_indices().size(), 0.0);

    ConditionalPower out;
    out.per_nuisance.reserve(nuisance_grid.size());
    for (std::size_t g = 0; g < nuisance_grid.size(); ++g) {
        // Each nuisance configuration carries its own null.
        const ParamPoint null_g = with_phenom(sp, nuisance_grid[g], zeros);
        const ParamPoint alt_g = with_phenom(sp, nuisance_grid[g], phenom_alt);
        PowerPoint pt = power(model, null_g, alt_g, alpha, n_rep, key, two_sided, workers);
        if (g == 0 || pt.power < out.worst.power) {
            out.worst = pt;
            out.argmin = g;
        }
        out.per_nuisance.push_back(std::move(pt));
    }
    return out;
}

ProfileResult profile_likelihood(const ModelFamily& model, std::span<const double> phenom,
                                 const Observation& y, const BoxSpec& nuisance_box) {
    const ParamSpace& sp = model.param_space;
    const auto ph = sp.phenom_indices();
    const auto nu = sp.nuisance_indices();
    if (phenom.size() != ph.size())
        throw std::invalid_argument("profile_likelihood: phenom value count mismatch");
    if (nuisance_box.lo.size() != nu.size())
        throw std::invalid_argument("profile_likelihood: nuisance box dimension mismatch");

    ParamPoint full;
    full.values.resize(sp.size());
    for (std::size_t k = 0; k < ph.size(); ++k) full[ph[k]] = phenom[k];

    ProfileResult res;
    if (nu.empty()) {
        sp.require_in_bounds(full);
        res.log_profile = log_density(model, y, full);
        res.theta = std::move(full);
        res.on_boundary = false;
        return res;
    }

    const std::function<double(std::span<const double>)> objective =
        [&](std::span<const double> x) {
            ParamPoint t = full;
            for (std::size_t k = 0; k < nu.size(); ++k) t[nu[k]] = x[k];
            if (!sp.in_bounds(t)) return -std::numeric_limits<double>::infinity();
            return log_density(model, y, t);
        };
    const OptimResult opt = maximize_box(objective, nuisance_box);
    for (std::size_t k = 0; k < nu.size(); ++k) full[nu[k]] = opt.x[k];
    res.log_profile = opt.value;
    res.theta = std::move(full);
    res.on_boundary = opt.on_boundary;
    return res;
}

LrtResult likelihood_ratio_statistic(const ModelFamily& model, std::span<const double> phenom_null,
                                     const Observation& y, const BoxSpec& box) {
    box.validate();
    const ParamSpace& sp = model.param_space;
    if (box.size() != sp.size())
        throw std::invalid_argument("likelihood_ratio_statistic: box dimension mismatch");
    const auto nu = sp.nuisance_indices();

    BoxSpec nuisance_box;
    for (std::size_t i : nu) {
        nuisance_box.lo.push_back(box.lo[i]);
        nuisance_box.hi.push_back(box.hi[i]);
    }

    const ProfileResult prof = profile_likelihood(model, phenom_null, y, nuisance_box);

    const std::function<double(std::span<const double>)> objective =
        [&](std::span<const double> x) {
            ParamPoint t;
            t.values.assign(x.begin(), x.end());
            if (!sp.in_bounds(t)) return -std::numeric_limits<double>::infinity();
            return log_density(model, y, t);
        };
    const OptimResult opt = maximize_box(objective, box);

    double minus2log = -2.0 * (prof.log_profile - opt.value);
    if (minus2log < 0.0) {
        if (minus2log < -1e-6)
            throw std::runtime_error("likelihood_ratio_statistic: profile exceeds global maximum");
        minus2log = 0.0; // optimizer noise
    }

    LrtResult res;
    res.minus2log = minus2log;
    res.lambda = std::exp(-0.5 * minus2log);
    res.theta_hat.values = opt.x;
    res.theta_hat_null = prof.theta;
    return res;
}

double wilks_p_value(double minus2log, unsigned k) {
    if (minus2log < 0.0) throw std::domain_error("wilks_p_value: negative statistic");
    return chi_squared_tail(minus2log, k);
}

double composite_p_value(const ModelFamily& model, std::span<const ParamPoint> null_grid, double t,
                         bool two_sided) {
    if (null_grid.empty()) throw std::invalid_argument("composite_p_value: empty null grid");
    double p = 1.0;
    for (const ParamPoint& theta : null_grid)
        p = std::min(p, p_value_analytic(model, theta, t, two_sided));
    return p;
}

} // namespace calib
