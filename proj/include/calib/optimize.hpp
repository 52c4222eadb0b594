#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace calib {

// Finite rectangular search region.
struct BoxSpec {
    std::vector<double> lo;
    std::vector<double> hi;

    std::size_t size() const { return lo.size(); }
    void validate() const;
};

struct OptimResult {
    std::vector<double> x;
    double value = 0.0;
    bool on_boundary = false;
};

// Maximizes f over the box: coarse grid scan followed by Nelder-Mead
// refinement with iterates clamped to the box.  scan_nodes = 0 picks a
// default based on the dimension.  Throws std::runtime_error when f is
// non-finite everywhere on the scan grid.
OptimResult maximize_box(const std::function<double(std::span<const double>)>& f,
                         const BoxSpec& box, std::size_t scan_nodes = 0);

} // namespace calib
