#pragma once

#include <cstdint>

namespace kron {

/// Counter-based pseudo-random stream (splitmix64).
///
/// Any (seed, sampleIndex, streamTag) triple addresses an independent stream,
/// so a single Monte Carlo sample is reproducible in isolation and workers can
/// draw without coordination.  Output is implementation-independent: no
/// std::uniform_real_distribution, whose bit pattern varies across standard
/// libraries.
class Rng {
  public:
    Rng() = default;

    static Rng stream(std::uint64_t seed, std::uint64_t sampleIndex, std::uint64_t streamTag) {
        Rng r;
        r.state_ = mix(mix(mix(seed + kGolden) ^ sampleIndex) ^ streamTag);
        return r;
    }

    std::uint64_t nextU64() {
        state_ += kGolden;
        return mix(state_);
    }

    /// Uniform double in [0,1) with 53 random bits.
    double nextUnit() { return static_cast<double>(nextU64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * nextUnit(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return nextU64() % n; }

  private:
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t state_ = 0;
};

} // namespace kron
