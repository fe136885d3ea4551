#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace decoupler {

/// Deterministic random stream addressed by (seed, stream_index).
/// Distinct stream indices give independent substreams, so Monte-Carlo
/// sample k can always draw from stream k regardless of evaluation order.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_index);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_index() const { return stream_index_; }

    std::uint64_t next_u64();
    /// Uniform double in [0, 1) with 53 random bits.
    double uniform();
    /// Standard normal via Box-Muller (pair cached).
    double normal();
    /// Standard complex Gaussian: independent N(0,1) real and imaginary parts.
    std::complex<double> complex_normal();
    /// Uniform integer in [0, n).
    std::uint64_t uniform_below(std::uint64_t n);

private:
    std::uint64_t seed_;
    std::uint64_t stream_index_;
    std::mt19937_64 engine_;
    bool has_cached_ = false;
    double cached_ = 0.0;
};

} // namespace decoupler
