#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace calib {

struct ParamPoint {
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }
};

// Parameter space: named components with per-component bounds and a mask
// separating phenomenological components (the scientific quantities of
// interest) from nuisance components.  Finite bounds are closed unless the
// corresponding open flag is set (e.g. a scale component on (0, inf)).
struct ParamSpace {
    std::vector<std::string> names;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<bool> phenom_mask;
    std::vector<bool> open_lower; // defaults to closed when empty
    std::vector<bool> open_upper;

    std::size_t size() const { return names.size(); }

    // Throws std::invalid_argument on inconsistent sizes, empty space, or
    // lower >= upper.
    void validate() const;

    bool in_bounds(const ParamPoint& p) const;
    void require_in_bounds(const ParamPoint& p) const; // std::domain_error
    void require_shape(const ParamPoint& p) const;     // std::invalid_argument

    std::vector<std::size_t> phenom_indices() const;
    std::vector<std::size_t> nuisance_indices() const;
};

ParamSpace make_param_space(std::vector<std::string> names,
                            std::vector<double> lower,
                            std::vector<double> upper,
                            std::vector<bool> phenom_mask);

// An arbitrary in-bounds point (0 clamped into the bounds, nudged off open
// edges); used to probe parameter-independent model structure.
ParamPoint representative_point(const ParamSpace& space);

} // namespace calib
