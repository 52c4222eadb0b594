#pragma once

#include <cstdint>

namespace calib {

// Counter-based generator with a SplitMix64 output function.  A stream is
// keyed by (seed, stream index); draws depend only on that key and the draw
// counter, never on global state, so replications can run on any number of
// worker threads and still produce identical values.
class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t seed, std::uint64_t stream);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    result_type operator()();

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform();
    // Uniform on (0, 1); never returns an endpoint, safe under log().
    double uniform_pos();
    double uniform(double lo, double hi);

    // Standard normal via Box-Muller; the second deviate is cached.
    double normal();
    double normal(double mean, double sd);

private:
    std::uint64_t state_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

// Key for deriving independent streams.  stream(i) yields the generator for
// replication i; derive(salt) yields a statistically independent sub-key for
// a named purpose (e.g. separate truth rows of a study).
struct RngKey {
    std::uint64_t seed = 0;

    RngStream stream(std::uint64_t index) const { return RngStream(seed, index); }
    RngKey derive(std::uint64_t salt) const;
};

} // namespace calib
