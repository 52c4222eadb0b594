#include "calib/model_family.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "calib/stats.hpp"

namespace calib {

Observation make_observation(std::size_t n_rows, std::size_t row_dim, std::vector<double> data) {
    if (row_dim == 0) throw std::invalid_argument("Observation: row_dim must be positive");
    if (data.size() != n_rows * row_dim)
        throw std::invalid_argument("Observation: data size does not match n_rows * row_dim");
    Observation y;
    y.n_rows = n_rows;
    y.row_dim = row_dim;
    y.data = std::move(data);
    return y;
}

double observation_mean(const Observation& y) {
    if (y.data.empty()) throw std::invalid_argument("observation_mean: empty observation");
    return neumaier_sum(y.data) / static_cast<double>(y.data.size());
}

void validate_observation(const ModelFamily& model, const Observation& y) {
    if (y.row_dim != model.obs_dim || y.n_rows != model.n_obs)
        throw std::invalid_argument("Observation: shape does not match model family");
    if (y.data.size() != y.n_rows * y.row_dim)
        throw std::invalid_argument("Observation: inconsistent data size");
    for (double v : y.data)
        if (!std::isfinite(v)) throw std::invalid_argument("Observation: non-finite entry");
}

double log_density(const ModelFamily& model, const Observation& y, const ParamPoint& theta) {
    model.param_space.require_in_bounds(theta);
    validate_observation(model, y);
    double total = 0.0;
    for (std::size_t i = 0; i < y.n_rows; ++i)
        total += model.row_log_density(y.row(i), theta);
    return total;
}

Observation sample_observation(const ModelFamily& model, const ParamPoint& theta, RngStream& rng) {
    model.param_space.require_in_bounds(theta);
    Observation y;
    y.n_rows = model.n_obs;
    y.row_dim = model.obs_dim;
    y.data.resize(model.n_obs * model.obs_dim);
    for (std::size_t i = 0; i < model.n_obs; ++i)
        model.row_sampler(theta, rng, {y.data.data() + i * model.obs_dim, model.obs_dim});
    return y;
}

std::pair<ParamPoint, Observation> sample_joint(const ModelFamily& model, const Prior& prior,
                                                RngStream& rng) {
    if (prior.param_space.size() != model.param_space.size())
        throw std::invalid_argument("sample_joint: prior and model parameter spaces differ");
    ParamPoint theta = prior.sampler(rng);
    Observation y = sample_observation(model, theta, rng);
    return {std::move(theta), std::move(y)};
}

std::pair<ParamPoint, Observation> sample_conditional_joint(const ModelFamily& model,
                                                            const Prior& prior,
                                                            std::span<const double> phenom,
                                                            RngStream& rng) {
    if (!prior.conditional_sampler)
        throw std::invalid_argument("sample_conditional_joint: prior has no conditional sampler");
    ParamPoint theta = prior.conditional_sampler(phenom, rng);
    Observation y = sample_observation(model, theta, rng);
    return {std::move(theta), std::move(y)};
}

ModelFamily gaussian_signal_background(std::size_t n_obs, bool positive_signal) {
    if (n_obs == 0) throw std::invalid_argument("gaussian_signal_background: n_obs must be positive");
    constexpr double inf = std::numeric_limits<double>::infinity();
    ModelFamily m;
    m.param_space.names = {"mu_s", "mu_b", "sigma"};
    m.param_space.lower = {positive_signal ? 0.0 : -inf, -inf, 0.0};
    m.param_space.upper = {inf, inf, inf};
    m.param_space.phenom_mask = {true, false, false};
    m.param_space.open_lower = {false, false, true};
    m.param_space.open_upper = {false, false, false};
    m.param_space.validate();
    m.obs_dim = 1;
    m.n_obs = n_obs;
    m.row_log_density = [](std::span<const double> row, const ParamPoint& t) {
        return normal_log_pdf(row[0], t[0] + t[1], t[2]);
    };
    m.row_sampler = [](const ParamPoint& t, RngStream& rng, std::span<double> row) {
        row[0] = rng.normal(t[0] + t[1], t[2]);
    };
    m.gaussian_row = GaussianRowLaw{
        [](const ParamPoint& t) { return t[0] + t[1]; },
        [](const ParamPoint& t) { return t[2]; },
    };
    m.name = positive_signal ? "gaussian_signal_background_positive" : "gaussian_signal_background";
    return m;
}

ModelFamily normal_mean_family(double sigma, std::size_t n_obs, double mu_lo, double mu_hi) {
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw std::invalid_argument("normal_mean_family: sigma must be positive and finite");
    if (n_obs == 0) throw std::invalid_argument("normal_mean_family: n_obs must be positive");
    ModelFamily m;
    m.param_space = make_param_space({"mu"}, {mu_lo}, {mu_hi}, {true});
    m.obs_dim = 1;
    m.n_obs = n_obs;
    m.row_log_density = [sigma](std::span<const double> row, const ParamPoint& t) {
        return normal_log_pdf(row[0], t[0], sigma);
    };
    m.row_sampler = [sigma](const ParamPoint& t, RngStream& rng, std::span<double> row) {
        row[0] = rng.normal(t[0], sigma);
    };
    m.gaussian_row = GaussianRowLaw{
        [](const ParamPoint& t) { return t[0]; },
        [sigma](const ParamPoint&) { return sigma; },
    };
    m.name = "normal_mean";
    return m;
}

namespace {

bool scalar_in_bounds(const ParamSpace& sp, std::size_t i, double v) {
    const bool lo_open = !sp.open_lower.empty() && sp.open_lower[i];
    const bool hi_open = !sp.open_upper.empty() && sp.open_upper[i];
    if (lo_open ? !(v > sp.lower[i]) : !(v >= sp.lower[i])) return false;
    if (hi_open ? !(v < sp.upper[i]) : !(v <= sp.upper[i])) return false;
    return true;
}

// Maps a point over the reduced space back to the full space.
struct ComponentFixer {
    std::vector<std::size_t> fixed_indices;
    std::vector<double> fixed_values;
    std::vector<std::size_t> free_indices;
    std::size_t full_size = 0;

    ParamPoint expand(const ParamPoint& reduced) const {
        ParamPoint full;
        full.values.resize(full_size);
        for (std::size_t k = 0; k < fixed_indices.size(); ++k)
            full[fixed_indices[k]] = fixed_values[k];
        for (std::size_t k = 0; k < free_indices.size(); ++k)
            full[free_indices[k]] = reduced[k];
        return full;
    }
};

} // namespace

ModelFamily fix_components(const ModelFamily& model, std::span<const std::size_t> indices,
                           std::span<const double> values) {
    const std::size_t n = model.param_space.size();
    if (indices.size() != values.size())
        throw std::invalid_argument("fix_components: indices/values size mismatch");
    if (indices.empty()) return model;
    if (indices.size() >= n)
        throw std::invalid_argument("fix_components: at least one component must remain free");

    std::vector<bool> fixed(n, false);
    for (std::size_t k = 0; k < indices.size(); ++k) {
        const std::size_t idx = indices[k];
        if (idx >= n) throw std::invalid_argument("fix_components: index out of range");
        if (fixed[idx]) throw std::invalid_argument("fix_components: duplicate index");
        if (!scalar_in_bounds(model.param_space, idx, values[k]))
            throw std::domain_error("fix_components: pinned value out of bounds");
        fixed[idx] = true;
    }

    auto fixer = std::make_shared<ComponentFixer>();
    fixer->fixed_indices.assign(indices.begin(), indices.end());
    fixer->fixed_values.assign(values.begin(), values.end());
    fixer->full_size = n;

    ModelFamily out;
    const ParamSpace& sp = model.param_space;
    for (std::size_t i = 0; i < n; ++i) {
        if (fixed[i]) continue;
        fixer->free_indices.push_back(i);
        out.param_space.names.push_back(sp.names[i]);
        out.param_space.lower.push_back(sp.lower[i]);
        out.param_space.upper.push_back(sp.upper[i]);
        out.param_space.phenom_mask.push_back(sp.phenom_mask[i]);
        out.param_space.open_lower.push_back(!sp.open_lower.empty() && sp.open_lower[i]);
        out.param_space.open_upper.push_back(!sp.open_upper.empty() && sp.open_upper[i]);
    }
    out.param_space.validate();

    out.obs_dim = model.obs_dim;
    out.n_obs = model.n_obs;
    out.row_log_density = [fixer, f = model.row_log_density](std::span<const double> row,
                                                             const ParamPoint& t) {
        return f(row, fixer->expand(t));
    };
    out.row_sampler = [fixer, f = model.row_sampler](const ParamPoint& t, RngStream& rng,
                                                     std::span<double> row) {
        f(fixer->expand(t), rng, row);
    };
    if (model.gaussian_row) {
        out.gaussian_row = GaussianRowLaw{
            [fixer, f = model.gaussian_row->mean](const ParamPoint& t) { return f(fixer->expand(t)); },
            [fixer, f = model.gaussian_row->sd](const ParamPoint& t) { return f(fixer->expand(t)); },
        };
    }
    out.name = model.name + "_fixed";
    return out;
}

PriorComponent normal_component(double mean, double sd) {
    if (!(sd > 0.0) || !std::isfinite(sd) || !std::isfinite(mean))
        throw std::invalid_argument("normal_component: invalid mean/sd");
    return PriorComponent{PriorComponent::Kind::Normal, mean, sd};
}

PriorComponent uniform_component(double lo, double hi) {
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
        throw std::invalid_argument("uniform_component: invalid interval");
    return PriorComponent{PriorComponent::Kind::Uniform, lo, hi};
}

PriorComponent point_component(double value) {
    if (!std::isfinite(value)) throw std::invalid_argument("point_component: non-finite value");
    return PriorComponent{PriorComponent::Kind::Point, value, 0.0};
}

namespace {

double sample_component(const ParamSpace& sp, std::size_t i, const PriorComponent& c,
                        RngStream& rng) {
    switch (c.kind) {
    case PriorComponent::Kind::Point:
        return c.a;
    case PriorComponent::Kind::Uniform:
        return rng.uniform(c.a, c.b);
    case PriorComponent::Kind::Normal: {
        for (int attempt = 0; attempt < 100000; ++attempt) {
            const double v = rng.normal(c.a, c.b);
            if (scalar_in_bounds(sp, i, v)) return v;
        }
        throw std::runtime_error("independent_prior: truncated normal rejection failed");
    }
    }
    throw std::logic_error("independent_prior: unknown component kind");
}

} // namespace

Prior independent_prior(const ParamSpace& space, std::vector<PriorComponent> components) {
    space.validate();
    const std::size_t n = space.size();
    if (components.size() != n)
        throw std::invalid_argument("independent_prior: component count mismatch");

    // Per-component log normalization (truncation mass for normals) and sd.
    auto log_norm = std::make_shared<std::vector<double>>(n, 0.0);
    std::vector<double> sds(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const PriorComponent& c = components[i];
        switch (c.kind) {
        case PriorComponent::Kind::Point:
            if (!scalar_in_bounds(space, i, c.a))
                throw std::domain_error("independent_prior: point mass out of bounds");
            sds[i] = 0.0;
            break;
        case PriorComponent::Kind::Uniform:
            if (!scalar_in_bounds(space, i, c.a) || !scalar_in_bounds(space, i, c.b))
                throw std::domain_error("independent_prior: uniform support out of bounds");
            sds[i] = (c.b - c.a) / std::sqrt(12.0);
            break;
        case PriorComponent::Kind::Normal: {
            const double zl = (space.lower[i] - c.a) / c.b;
            const double zu = (space.upper[i] - c.a) / c.b;
            const double mass = (std::isinf(zu) ? 1.0 : normal_cdf(zu)) -
                                (std::isinf(zl) ? 0.0 : normal_cdf(zl));
            if (!(mass > 0.0))
                throw std::domain_error("independent_prior: normal mass vanishes inside bounds");
            (*log_norm)[i] = std::log(mass);
            // Truncation changes the sd; leave it to Monte Carlo in that case.
            sds[i] = mass > 1.0 - 1e-12 ? c.b : std::numeric_limits<double>::quiet_NaN();
            break;
        }
        }
    }

    auto comps = std::make_shared<std::vector<PriorComponent>>(std::move(components));
    auto sp = std::make_shared<ParamSpace>(space);

    Prior p;
    p.param_space = space;
    p.component_sd = std::move(sds);
    p.name = "independent";
    p.log_density = [comps, sp, log_norm](const ParamPoint& t) {
        sp->require_in_bounds(t);
        double total = 0.0;
        for (std::size_t i = 0; i < comps->size(); ++i) {
            const PriorComponent& c = (*comps)[i];
            switch (c.kind) {
            case PriorComponent::Kind::Point:
                if (t[i] != c.a) return -std::numeric_limits<double>::infinity();
                break;
            case PriorComponent::Kind::Uniform:
                if (t[i] < c.a || t[i] > c.b) return -std::numeric_limits<double>::infinity();
                total += -std::log(c.b - c.a);
                break;
            case PriorComponent::Kind::Normal:
                total += normal_log_pdf(t[i], c.a, c.b) - (*log_norm)[i];
                break;
            }
        }
        return total;
    };
    p.sampler = [comps, sp](RngStream& rng) {
        ParamPoint t;
        t.values.resize(comps->size());
        for (std::size_t i = 0; i < comps->size(); ++i)
            t[i] = sample_component(*sp, i, (*comps)[i], rng);
        return t;
    };
    p.conditional_sampler = [comps, sp](std::span<const double> phenom, RngStream& rng) {
        const auto ph = sp->phenom_indices();
        if (phenom.size() != ph.size())
            throw std::invalid_argument("conditional_sampler: phenom value count mismatch");
        ParamPoint t;
        t.values.resize(comps->size());
        for (std::size_t k = 0; k < ph.size(); ++k) {
            if (!scalar_in_bounds(*sp, ph[k], phenom[k]))
                throw std::domain_error("conditional_sampler: phenom value out of bounds");
            t[ph[k]] = phenom[k];
        }
        for (std::size_t i : sp->nuisance_indices())
            t[i] = sample_component(*sp, i, (*comps)[i], rng);
        return t;
    };
    return p;
}

Prior point_prior(const ParamSpace& space, ParamPoint value) {
    space.require_in_bounds(value);
    std::vector<PriorComponent> comps;
    comps.reserve(value.size());
    for (double v : value.values) comps.push_back(point_component(v));
    Prior p = independent_prior(space, std::move(comps));
    p.name = "point";
    return p;
}

} // namespace calib
