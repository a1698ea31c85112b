#pragma once
#include <array>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace cutout {

// Counter-based stream derivation: every Monte Carlo trial owns a stream
// keyed by (seed, path...) so results are independent of scheduling and
// identical across thread counts.  Generator is xoshiro256++ seeded through
// a splitmix64 chain; distributions are implemented here rather than taken
// from <random> so output is identical across standard libraries.
class RngStream {
public:
    RngStream() : s_{1, 2, 3, 4} {}

    static RngStream from(std::uint64_t seed,
                          std::initializer_list<std::uint64_t> path);

    std::uint64_t nextU64();

    // Uniform double in [0, 1) with 53-bit resolution.
    double nextDouble() { return static_cast<double>(nextU64() >> 11) * 0x1.0p-53; }

    // Uniform double in (0, 1] (safe as a log() argument).
    double nextDoubleOpenLeft() { return 1.0 - nextDouble(); }

private:
    std::array<std::uint64_t, 4> s_;
};

std::uint64_t splitmix64(std::uint64_t& state);

// Exact Poisson sampler; splits large means into chunks of at most 30 and
// uses Knuth's product-of-uniforms method on each chunk.
std::uint64_t samplePoisson(RngStream& rng, double mean);

// Index i with probability weights[i] / sum(weights); weights need not be
// normalised.  cumulative must hold the inclusive prefix sums of weights.
std::size_t sampleFromCumulative(RngStream& rng, const std::vector<double>& cumulative);

}  // namespace cutout
