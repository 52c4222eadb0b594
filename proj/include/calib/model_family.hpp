#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "calib/param_space.hpp"
#include "calib/rng.hpp"

namespace calib {

// A data set: n_rows independent rows of dimension row_dim, row-major.
struct Observation {
    std::size_t n_rows = 0;
    std::size_t row_dim = 1;
    std::vector<double> data;

    std::span<const double> row(std::size_t i) const {
        return {data.data() + i * row_dim, row_dim};
    }
    double scalar(std::size_t i) const { return data[i * row_dim]; }
    std::size_t size() const { return data.size(); }
};

Observation make_observation(std::size_t n_rows, std::size_t row_dim, std::vector<double> data);

// Mean of all entries; the default scalar summary statistic.
double observation_mean(const Observation& y);

// Optional structure: each row is N(mean(theta), sd(theta)).  Set by the
// built-in families; enables closed-form tail probabilities and intervals.
struct GaussianRowLaw {
    std::function<double(const ParamPoint&)> mean;
    std::function<double(const ParamPoint&)> sd;
};

// Observational model: a family of densities over fixed-shape observations,
// indexed by a parameter point.  Rows are conditionally independent, so the
// joint log density is the sum of per-row terms.
struct ModelFamily {
    ParamSpace param_space;
    std::size_t obs_dim = 1;
    std::size_t n_obs = 1;
    std::function<double(std::span<const double> row, const ParamPoint&)> row_log_density;
    std::function<void(const ParamPoint&, RngStream&, std::span<double> row)> row_sampler;
    std::optional<GaussianRowLaw> gaussian_row;
    std::string name;
};

// Joint log density of y under theta.  Throws std::domain_error when theta
// is out of bounds and std::invalid_argument on shape mismatch or non-finite
// observation entries.
double log_density(const ModelFamily& model, const Observation& y, const ParamPoint& theta);

void validate_observation(const ModelFamily& model, const Observation& y);

Observation sample_observation(const ModelFamily& model, const ParamPoint& theta, RngStream& rng);

// Prior over the model's parameter space.  conditional_sampler draws the
// nuisance components given fixed values for all phenomenological components.
struct Prior {
    ParamSpace param_space;
    std::function<double(const ParamPoint&)> log_density;
    std::function<ParamPoint(RngStream&)> sampler;
    std::function<ParamPoint(std::span<const double> phenom, RngStream&)> conditional_sampler;
    // Marginal prior sd per component where known in closed form; NaN entries
    // fall back to Monte Carlo estimation where a sd is needed.
    std::vector<double> component_sd;
    std::string name;
};

std::pair<ParamPoint, Observation> sample_joint(const ModelFamily& model, const Prior& prior,
                                                RngStream& rng);
std::pair<ParamPoint, Observation> sample_conditional_joint(const ModelFamily& model,
                                                            const Prior& prior,
                                                            std::span<const double> phenom,
                                                            RngStream& rng);

// Built-in: scalar rows y ~ N(mu_s + mu_b, sigma^2) with components
// (mu_s, mu_b, sigma); mu_s is the phenomenological component.  When
// positive_signal is set, mu_s is restricted to [0, inf).
ModelFamily gaussian_signal_background(std::size_t n_obs, bool positive_signal = false);

// Built-in: scalar rows y ~ N(mu, sigma^2) with known sigma; single
// phenomenological component mu with optional bounds.
ModelFamily normal_mean_family(double sigma, std::size_t n_obs,
                               double mu_lo = -std::numeric_limits<double>::infinity(),
                               double mu_hi = std::numeric_limits<double>::infinity());

// Restriction of a family to a sub-space: the listed components are pinned at
// the given values and removed from the parameter space.
ModelFamily fix_components(const ModelFamily& model, std::span<const std::size_t> indices,
                           std::span<const double> values);

// Independent per-component priors.
struct PriorComponent {
    enum class Kind { Normal, Uniform, Point };
    Kind kind = Kind::Normal;
    double a = 0.0; // mean / lo / value
    double b = 1.0; // sd / hi / unused
};

PriorComponent normal_component(double mean, double sd);
PriorComponent uniform_component(double lo, double hi);
PriorComponent point_component(double value);

Prior independent_prior(const ParamSpace& space, std::vector<PriorComponent> components);
Prior point_prior(const ParamSpace& space, ParamPoint value);

} // namespace calib
