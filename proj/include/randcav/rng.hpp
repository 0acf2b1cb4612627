#ifndef RANDCAV_RNG_HPP
#define RANDCAV_RNG_HPP

#include <cstdint>

namespace randcav
{
// Counter-based generator: output i of stream s is a bijective avalanche of
// (s + i*gamma). Streams derived from distinct (seed, index) pairs are
// statistically independent and can be drawn in any order, which is what
// makes worker-count-independent ensembles possible.
class SplitMix64
{
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64()
    {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform double in [0, 1), 53-bit resolution, identical on every platform.
    double next_unit()
    {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform double in [lo, hi).
    double next_in(double lo, double hi)
    {
        return lo + (hi - lo) * next_unit();
    }

private:
    std::uint64_t state_ = 0;
};

// Stream seed for realization `index` of a run keyed by `master_seed`.
// Two rounds of the SplitMix64 finalizer decorrelate nearby indices.
inline std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t index)
{
    auto mix = [](std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    };
    return mix(mix(master_seed + 0x9E3779B97F4A7C15ull * (index + 1)) ^ index);
}
} // namespace randcav

#endif // RANDCAV_RNG_HPP
