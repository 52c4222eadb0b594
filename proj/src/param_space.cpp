#include "calib/param_space.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace calib {

void ParamSpace::validate() const {
    const std::size_t n = names.size();
    if (n == 0) throw std::invalid_argument("ParamSpace: at least one component required");
    if (lower.size() != n || upper.size() != n || phenom_mask.size() != n)
        throw std::invalid_argument("ParamSpace: names/bounds/mask size mismatch");
    if (!open_lower.empty() && open_lower.size() != n)
        throw std::invalid_argument("ParamSpace: open_lower size mismatch");
    if (!open_upper.empty() && open_upper.size() != n)
        throw std::invalid_argument("ParamSpace: open_upper size mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        if (std::isnan(lower[i]) || std::isnan(upper[i]))
            throw std::invalid_argument("ParamSpace: NaN bound");
        if (!(lower[i] < upper[i]))
            throw std::invalid_argument("ParamSpace: lower must be strictly below upper");
    }
}

bool ParamSpace::in_bounds(const ParamPoint& p) const {
    if (p.size() != size()) return false;
    for (std::size_t i = 0; i < size(); ++i) {
        const double v = p[i];
        if (std::isnan(v)) return false;
        const bool lo_open = !open_lower.empty() && open_lower[i];
        const bool hi_open = !open_upper.empty() && open_upper[i];
        if (lo_open ? !(v > lower[i]) : !(v >= lower[i])) return false;
        if (hi_open ? !(v < upper[i]) : !(v <= upper[i])) return false;
    }
    return true;
}

void ParamSpace::require_shape(const ParamPoint& p) const {
    if (p.size() != size())
        throw std::invalid_argument("ParamPoint: dimension mismatch with parameter space");
}

void ParamSpace::require_in_bounds(const ParamPoint& p) const {
    require_shape(p);
    if (!in_bounds(p)) throw std::domain_error("ParamPoint: component out of bounds");
}

std::vector<std::size_t> ParamSpace::phenom_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < phenom_mask.size(); ++i)
        if (phenom_mask[i]) out.push_back(i);
    return out;
}

std::vector<std::size_t> ParamSpace::nuisance_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < phenom_mask.size(); ++i)
        if (!phenom_mask[i]) out.push_back(i);
    return out;
}

ParamSpace make_param_space(std::vector<std::string> names,
                            std::vector<double> lower,
                            std::vector<double> upper,
                            std::vector<bool> phenom_mask) {
    ParamSpace s;
    s.names = std::move(names);
    s.lower = std::move(lower);
    s.upper = std::move(upper);
    s.phenom_mask = std::move(phenom_mask);
    s.validate();
    return s;
}

ParamPoint representative_point(const ParamSpace& space) {
    space.validate();
    ParamPoint p;
    p.values.resize(space.size());
    for (std::size_t i = 0; i < space.size(); ++i) {
        double v = std::clamp(0.0, space.lower[i], space.upper[i]);
        const bool lo_open = !space.open_lower.empty() && space.open_lower[i];
        const bool hi_open = !space.open_upper.empty() && space.open_upper[i];
        if (lo_open && v <= space.lower[i])
            v = std::isfinite(space.upper[i]) ? 0.5 * (space.lower[i] + space.upper[i])
                                              : space.lower[i] + 1.0;
        if (hi_open && v >= space.upper[i])
            v = std::isfinite(space.lower[i]) ? 0.5 * (space.lower[i] + space.upper[i])
                                              : space.upper[i] - 1.0;
        p[i] = v;
    }
    return p;
}

} // namespace calib
