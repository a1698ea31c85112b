#include "cutout/rng.hpp"

#include <cmath>

namespace cutout {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {
inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}
}  // namespace

RngStream RngStream::from(std::uint64_t seed,
                          std::initializer_list<std::uint64_t> path) {
    std::uint64_t state = seed ^ 0xd1b54a32d192ed03ULL;
    for (std::uint64_t p : path) {
        state ^= splitmix64(state) + 0x8cb92ba72f3d8dd7ULL * (p + 1);
    }
    RngStream r;
    for (auto& word : r.s_) word = splitmix64(state);
    return r;
}

std::uint64_t RngStream::nextU64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

std::uint64_t samplePoisson(RngStream& rng, double mean) {
    std::uint64_t total = 0;
    // Knuth's method is exact but costs O(mean) uniforms; chunking keeps the
    // running product away from the subnormal range for any mean.
    while (mean > 0) {
        const double chunk = mean > 30.0 ? 30.0 : mean;
        mean -= chunk;
        const double limit = std::exp(-chunk);
        double prod = rng.nextDoubleOpenLeft();
        while (prod > limit) {
            ++total;
            prod *= rng.nextDoubleOpenLeft();
        }
    }
    return total;
}

std::size_t sampleFromCumulative(RngStream& rng, const std::vector<double>& cumulative) {
    const double u = rng.nextDouble() * cumulative.back();
    std::size_t lo = 0, hi = cumulative.size() - 1;
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (cumulative[mid] <= u)
            lo = mid + 1;
        else
            hi = mid;
    }
    return lo;
}

}  // namespace cutout
