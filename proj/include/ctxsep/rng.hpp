#pragma once

#include <cmath>
#include <cstdint>

namespace ctxsep {

// SplitMix64 (Steele/Lea/Flood; Vigna's fixed-increment variant). The state
// is a counter advanced by the golden-ratio increment and the output is a
// bijective hash of it, so sequences for different seeds never alias within
// a stream. All simulation code in this project draws from this generator;
// std::random distributions are avoided so that sequences are reproducible
// bit-for-bit across standard libraries.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform on [0, 1), 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on [lo, hi).
    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Standard normal via Box-Muller. Consumes exactly two raw draws; the
    // sine mate is discarded to keep the stream position independent of
    // call history.
    double next_gaussian() {
        const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0,1]
        const double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;        // [0,1)
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    // Derived seed for stream `j` of a master seed: the SplitMix64 output
    // function applied to seed + (j+1)*phi. Trial j of any multi-trial run
    // uses SplitMix64(derive_stream(seed, j)), which makes trials
    // independent of scheduling order.
    static std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t z = seed + (stream + 1) * 0x9E3779B97F4A7C15ull;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

}  // namespace ctxsep
