#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "calib/model_family.hpp"
#include "calib/stats.hpp"

namespace calib {

struct GridAxis {
    double lo = 0.0;
    double hi = 1.0;
    std::size_t nodes = 2; // >= 2
};

struct GridSpec {
    std::vector<GridAxis> axes;           // one per parameter component, in order
    std::size_t max_nodes = 10'000'000;   // total-node budget

    std::size_t total_nodes() const;
    void validate() const;
};

// Posterior represented by normalized masses on rectangular grid nodes
// (trapezoidal quadrature).  Marginals reuse the same structure: `components`
// records which original parameter component each remaining axis refers to.
struct GridPosterior {
    std::vector<std::size_t> components;
    std::vector<std::vector<double>> axis_nodes;
    std::vector<double> weights;    // normalized, row-major, last axis fastest
    std::vector<double> log_joint;  // unnormalized log posterior at nodes; empty for marginals
    double log_evidence = 0.0;

    std::size_t n_axes() const { return axis_nodes.size(); }
    std::size_t n_nodes() const { return weights.size(); }
    // Axis index holding the given original component; throws std::out_of_range.
    std::size_t axis_of_component(std::size_t component) const;
};

// Throws std::domain_error when the grid box exits the parameter bounds.
void require_grid_in_bounds(const ParamSpace& space, const GridSpec& grid);

GridPosterior build_grid_posterior(const ModelFamily& model, const Prior& prior,
                                   const Observation& y, const GridSpec& grid);

// Expectation of f over the grid posterior; f receives a point over the
// posterior's axes, in axis order.
double posterior_expectation(const GridPosterior& gp,
                             const std::function<double(const ParamPoint&)>& f);

MeanSd posterior_mean_sd(const GridPosterior& gp, std::size_t component);

// Smallest node value whose cumulative marginal mass reaches q.
double posterior_quantile(const GridPosterior& gp, std::size_t component, double q);

double interval_probability(const GridPosterior& gp, std::size_t component, double lo, double hi);

// Marginal mass per node of the component's axis.
std::vector<double> marginal_masses(const GridPosterior& gp, std::size_t component);

GridPosterior marginal_posterior(const GridPosterior& gp, std::span<const std::size_t> components);

} // namespace calib
