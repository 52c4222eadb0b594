#include "calib/grid_posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace calib {

std::size_t GridSpec::total_nodes() const {
    std::size_t total = 1;
    for (const GridAxis& a : axes) {
        if (a.nodes == 0 || total > max_nodes / a.nodes + 1) return max_nodes + 1;
        total *= a.nodes;
    }
    return total;
}

void GridSpec::validate() const {
    if (axes.empty()) throw std::invalid_argument("GridSpec: no axes");
    if (axes.size() > 3)
        throw std::invalid_argument("GridSpec: quadrature supports at most 3 dimensions");
    for (const GridAxis& a : axes) {
        if (!std::isfinite(a.lo) || !std::isfinite(a.hi) || !(a.lo < a.hi))
            throw std::invalid_argument("GridSpec: axis interval must be finite with lo < hi");
        if (a.nodes < 2) throw std::invalid_argument("GridSpec: axis needs at least 2 nodes");
    }
    if (total_nodes() > max_nodes)
        throw std::invalid_argument("GridSpec: total node count exceeds budget");
}

std::size_t GridPosterior::axis_of_component(std::size_t component) const {
    for (std::size_t a = 0; a < components.size(); ++a)
        if (components[a] == component) return a;
    throw std::out_of_range("GridPosterior: component not represented on this grid");
}

namespace {

std::vector<double> axis_points(const GridAxis& a) {
    std::vector<double> pts(a.nodes);
    const double h = (a.hi - a.lo) / static_cast<double>(a.nodes - 1);
    for (std::size_t i = 0; i < a.nodes; ++i)
        pts[i] = a.lo + h * static_cast<double>(i);
    pts.back() = a.hi;
    return pts;
}

// log of the trapezoidal weight for node i of the axis.
double log_trapz_weight(const GridAxis& a, std::size_t i) {
    const double h = (a.hi - a.lo) / static_cast<double>(a.nodes - 1);
    return std::log((i == 0 || i + 1 == a.nodes) ? 0.5 * h : h);
}

} // namespace

void require_grid_in_bounds(const ParamSpace& space, const GridSpec& grid) {
    grid.validate();
    if (grid.axes.size() != space.size())
        throw std::invalid_argument("grid dimension must match parameter space");
    for (std::size_t d = 0; d < grid.axes.size(); ++d) {
        const bool lo_open = !space.open_lower.empty() && space.open_lower[d];
        const bool hi_open = !space.open_upper.empty() && space.open_upper[d];
        const bool lo_ok = lo_open ? grid.axes[d].lo > space.lower[d] : grid.axes[d].lo >= space.lower[d];
        const bool hi_ok = hi_open ? grid.axes[d].hi < space.upper[d] : grid.axes[d].hi <= space.upper[d];
        if (!lo_ok || !hi_ok)
            throw std::domain_error("grid box outside parameter bounds");
    }
}

GridPosterior build_grid_posterior(const ModelFamily& model, const Prior& prior,
                                   const Observation& y, const GridSpec& grid) {
    const ParamSpace& sp = model.param_space;
    require_grid_in_bounds(sp, grid);
    if (prior.param_space.size() != sp.size())
        throw std::invalid_argument("build_grid_posterior: prior dimension must match parameter space");
    validate_observation(model, y);

    GridPosterior gp;
    gp.axis_nodes.reserve(grid.axes.size());
    for (std::size_t d = 0; d < grid.axes.size(); ++d) {
        gp.components.push_back(d);
        gp.axis_nodes.push_back(axis_points(grid.axes[d]));
    }

    const std::size_t total = grid.total_nodes();
    gp.log_joint.resize(total);
    std::vector<double> log_mass(total);

    std::vector<std::vector<double>> log_w(grid.axes.size());
    for (std::size_t d = 0; d < grid.axes.size(); ++d) {
        log_w[d].resize(grid.axes[d].nodes);
        for (std::size_t i = 0; i < grid.axes[d].nodes; ++i)
            log_w[d][i] = log_trapz_weight(grid.axes[d], i);
    }

    const std::size_t dim = grid.axes.size();
    std::vector<std::size_t> idx(dim, 0);
    ParamPoint theta;
    theta.values.resize(dim);
    for (std::size_t flat = 0; flat < total; ++flat) {
        double lw = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
            theta[d] = gp.axis_nodes[d][idx[d]];
            lw += log_w[d][idx[d]];
        }
        const double lj = prior.log_density(theta) + log_density(model, y, theta);
        gp.log_joint[flat] = lj;
        log_mass[flat] = lj + lw;
        for (std::size_t d = dim; d-- > 0;) { // row-major increment, last axis fastest
            if (++idx[d] < gp.axis_nodes[d].size()) break;
            idx[d] = 0;
        }
    }

    const double m = *std::max_element(log_mass.begin(), log_mass.end());
    if (!std::isfinite(m))
        throw std::runtime_error("build_grid_posterior: posterior mass vanishes on the grid");
    std::vector<double> mass(total);
    for (std::size_t i = 0; i < total; ++i)
        mass[i] = std::exp(log_mass[i] - m);
    const double s = neumaier_sum(mass);
    gp.log_evidence = m + std::log(s);
    gp.weights.resize(total);
    for (std::size_t i = 0; i < total; ++i)
        gp.weights[i] = mass[i] / s;
    return gp;
}

double posterior_expectation(const GridPosterior& gp,
                             const std::function<double(const ParamPoint&)>& f) {
    const std::size_t dim = gp.n_axes();
    std::vector<std::size_t> idx(dim, 0);
    ParamPoint theta;
    theta.values.resize(dim);
    std::vector<double> terms(gp.n_nodes());
    for (std::size_t flat = 0; flat < gp.n_nodes(); ++flat) {
        for (std::size_t d = 0; d < dim; ++d)
            theta[d] = gp.axis_nodes[d][idx[d]];
        terms[flat] = gp.weights[flat] * f(theta);
        for (std::size_t d = dim; d-- > 0;) {
            if (++idx[d] < gp.axis_nodes[d].size()) break;
            idx[d] = 0;
        }
    }
    return neumaier_sum(terms);
}

std::vector<double> marginal_masses(const GridPosterior& gp, std::size_t component) {
    const std::size_t axis = gp.axis_of_component(component);
    const std::size_t n = gp.axis_nodes[axis].size();

    // stride of `axis` in the row-major weight array
    std::size_t stride = 1;
    for (std::size_t d = gp.n_axes(); d-- > axis + 1;)
        stride *= gp.axis_nodes[d].size();

    std::vector<double> masses(n, 0.0);
    std::vector<double> comp(n, 0.0);
    for (std::size_t flat = 0; flat < gp.n_nodes(); ++flat) {
        const std::size_t j = (flat / stride) % n;
        const double v = gp.weights[flat];
        const double t = masses[j] + v;
        if (std::abs(masses[j]) >= std::abs(v))
            comp[j] += (masses[j] - t) + v;
        else
            comp[j] += (v - t) + masses[j];
        masses[j] = t;
    }
    for (std::size_t j = 0; j < n; ++j) masses[j] += comp[j];
    return masses;
}

MeanSd posterior_mean_sd(const GridPosterior& gp, std::size_t component) {
    const std::size_t axis = gp.axis_of_component(component);
    const std::vector<double>& x = gp.axis_nodes[axis];
    const std::vector<double> m = marginal_masses(gp, component);
    std::vector<double> terms(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) terms[j] = m[j] * x[j];
    const double mean = neumaier_sum(terms);
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double d = x[j] - mean;
        terms[j] = m[j] * d * d;
    }
    const double var = std::max(0.0, neumaier_sum(terms));
    return MeanSd{mean, std::sqrt(var)};
}

double posterior_quantile(const GridPosterior& gp, std::size_t component, double q) {
    if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("posterior_quantile: q must be in [0, 1]");
    const std::size_t axis = gp.axis_of_component(component);
    const std::vector<double>& x = gp.axis_nodes[axis];
    const std::vector<double> m = marginal_masses(gp, component);
    double cum = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        cum += m[j];
        if (cum >= q) return x[j];
    }
    return x.back(); // cumulative sum fell short of q by rounding only
}

double interval_probability(const GridPosterior& gp, std::size_t component, double lo, double hi) {
    if (!(lo <= hi)) throw std::invalid_argument("interval_probability: lo must not exceed hi");
    const std::size_t axis = gp.axis_of_component(component);
    const std::vector<double>& x = gp.axis_nodes[axis];
    const std::vector<double> m = marginal_masses(gp, component);
    std::vector<double> terms;
    terms.reserve(x.size());
    for (std::size_t j = 0; j < x.size(); ++j)
        if (x[j] >= lo && x[j] <= hi) terms.push_back(m[j]);
    if (terms.empty()) return 0.0;
    return std::clamp(neumaier_sum(terms), 0.0, 1.0);
}

GridPosterior marginal_posterior(const GridPosterior& gp, std::span<const std::size_t> components) {
    if (components.empty())
        throw std::invalid_argument("marginal_posterior: at least one component required");
    std::vector<bool> keep(gp.n_axes(), false);
    for (std::size_t c : components) {
        const std::size_t axis = gp.axis_of_component(c);
        if (keep[axis]) throw std::invalid_argument("marginal_posterior: duplicate component");
        keep[axis] = true;
    }

    GridPosterior out;
    out.log_evidence = gp.log_evidence;
    std::vector<std::size_t> kept_axes;
    for (std::size_t a = 0; a < gp.n_axes(); ++a) {
        if (!keep[a]) continue;
        kept_axes.push_back(a);
        out.components.push_back(gp.components[a]);
        out.axis_nodes.push_back(gp.axis_nodes[a]);
    }

    std::vector<std::size_t> stride(gp.n_axes());
    {
        std::size_t s = 1;
        for (std::size_t d = gp.n_axes(); d-- > 0;) {
            stride[d] = s;
            s *= gp.axis_nodes[d].size();
        }
    }
    std::size_t out_total = 1;
    for (std::size_t a : kept_axes) out_total *= gp.axis_nodes[a].size();

    std::vector<double> acc(out_total, 0.0);
    std::vector<double> comp(out_total, 0.0);
    for (std::size_t flat = 0; flat < gp.n_nodes(); ++flat) {
        std::size_t pos = 0;
        for (std::size_t a : kept_axes)
            pos = pos * gp.axis_nodes[a].size() + (flat / stride[a]) % gp.axis_nodes[a].size();
        const double v = gp.weights[flat];
        const double t = acc[pos] + v;
        if (std::abs(acc[pos]) >= std::abs(v))
            comp[pos] += (acc[pos] - t) + v;
        else
            comp[pos] += (v - t) + acc[pos];
        acc[pos] = t;
    }
    for (std::size_t j = 0; j < out_total; ++j) acc[j] += comp[j];
    out.weights = std::move(acc);
    return out;
}

} // namespace calib
