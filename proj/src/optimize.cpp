#include "calib/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace calib {

void BoxSpec::validate() const {
    if (lo.empty() || lo.size() != hi.size())
        throw std::invalid_argument("BoxSpec: inconsistent bounds");
    for (std::size_t i = 0; i < lo.size(); ++i)
        if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]) || !(lo[i] < hi[i]))
            throw std::invalid_argument("BoxSpec: bounds must be finite with lo < hi");
}

namespace {

std::size_t default_scan_nodes(std::size_t dim) {
    switch (dim) {
    case 1: return 65;
    case 2: return 33;
    default: return 17;
    }
}

void clamp_to_box(std::vector<double>& x, const BoxSpec& box) {
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = std::clamp(x[i], box.lo[i], box.hi[i]);
}

} // namespace

OptimResult maximize_box(const std::function<double(std::span<const double>)>& f,
                         const BoxSpec& box, std::size_t scan_nodes) {
    box.validate();
    const std::size_t dim = box.size();
    if (scan_nodes == 0) scan_nodes = default_scan_nodes(dim);
    if (scan_nodes < 2) scan_nodes = 2;

    // Coarse scan for a starting point.
    std::size_t total = 1;
    for (std::size_t d = 0; d < dim; ++d) total *= scan_nodes;
    std::vector<double> best_x(dim);
    double best = -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> idx(dim, 0);
    std::vector<double> x(dim);
    for (std::size_t flat = 0; flat < total; ++flat) {
        for (std::size_t d = 0; d < dim; ++d) {
            const double h = (box.hi[d] - box.lo[d]) / static_cast<double>(scan_nodes - 1);
            x[d] = box.lo[d] + h * static_cast<double>(idx[d]);
        }
        const double v = f(x);
        if (std::isfinite(v) && v > best) {
            best = v;
            best_x = x;
        }
        for (std::size_t d = dim; d-- > 0;) {
            if (++idx[d] < scan_nodes) break;
            idx[d] = 0;
        }
    }
    if (!std::isfinite(best))
        throw std::runtime_error("maximize_box: objective non-finite on the whole scan grid");

    // Nelder-Mead refinement; minimizes -f with points clamped to the box.
    const auto neg = [&](const std::vector<double>& p) {
        const double v = f(p);
        return std::isfinite(v) ? -v : std::numeric_limits<double>::infinity();
    };

    std::vector<std::vector<double>> simplex(dim + 1, best_x);
    for (std::size_t d = 0; d < dim; ++d) {
        const double h = (box.hi[d] - box.lo[d]) / static_cast<double>(scan_nodes - 1);
        simplex[d + 1][d] += (best_x[d] + h <= box.hi[d]) ? h : -h;
        clamp_to_box(simplex[d + 1], box);
    }
    std::vector<double> fv(dim + 1);
    for (std::size_t i = 0; i <= dim; ++i) fv[i] = neg(simplex[i]);

    const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;
    for (int iter = 0; iter < 500; ++iter) {
        std::vector<std::size_t> order(dim + 1);
        for (std::size_t i = 0; i <= dim; ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        {
            std::vector<std::vector<double>> s2(dim + 1);
            std::vector<double> f2(dim + 1);
            for (std::size_t i = 0; i <= dim; ++i) {
                s2[i] = simplex[order[i]];
                f2[i] = fv[order[i]];
            }
            simplex.swap(s2);
            fv.swap(f2);
        }

        double diam = 0.0;
        for (std::size_t i = 1; i <= dim; ++i)
            for (std::size_t d = 0; d < dim; ++d)
                diam = std::max(diam, std::abs(simplex[i][d] - simplex[0][d]));
        const double fspread = std::abs(fv[dim] - fv[0]);
        if (fspread <= 1e-13 * (1.0 + std::abs(fv[0])) && diam <= 1e-10 * (1.0 + diam)) break;

        std::vector<double> centroid(dim, 0.0);
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t d = 0; d < dim; ++d) centroid[d] += simplex[i][d] / double(dim);

        auto blend = [&](double t) {
            std::vector<double> p(dim);
            for (std::size_t d = 0; d < dim; ++d)
                p[d] = centroid[d] + t * (centroid[d] - simplex[dim][d]);
            clamp_to_box(p, box);
            return p;
        };

        std::vector<double> xr = blend(alpha);
        const double fr = neg(xr);
        if (fr < fv[0]) {
            std::vector<double> xe = blend(gamma);
            const double fe = neg(xe);
            if (fe < fr) {
                simplex[dim] = std::move(xe);
                fv[dim] = fe;
            } else {
                simplex[dim] = std::move(xr);
                fv[dim] = fr;
            }
            continue;
        }
        if (fr < fv[dim - 1]) {
            simplex[dim] = std::move(xr);
            fv[dim] = fr;
            continue;
        }
        std::vector<double> xc = blend(fr < fv[dim] ? rho : -rho);
        const double fc = neg(xc);
        if (fc < std::min(fr, fv[dim])) {
            simplex[dim] = std::move(xc);
            fv[dim] = fc;
            continue;
        }
        for (std::size_t i = 1; i <= dim; ++i) {
            for (std::size_t d = 0; d < dim; ++d)
                simplex[i][d] = simplex[0][d] + sigma * (simplex[i][d] - simplex[0][d]);
            fv[i] = neg(simplex[i]);
        }
    }

    std::size_t best_i = 0;
    for (std::size_t i = 1; i <= dim; ++i)
        if (fv[i] < fv[best_i]) best_i = i;

    OptimResult res;
    res.x = simplex[best_i];
    res.value = -fv[best_i];
    res.on_boundary = false;
    for (std::size_t d = 0; d < dim; ++d) {
        const double tol = 1e-8 * (box.hi[d] - box.lo[d]);
        if (res.x[d] - box.lo[d] <= tol || box.hi[d] - res.x[d] <= tol) res.on_boundary = true;
    }
    return res;
}

} // namespace calib
