#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace flpf {

/// Tags naming every place the library consumes randomness. A stream is
/// keyed by (seed, tag, indices...), so adding a draw site never perturbs
/// the draws of another.
enum class StreamTag : std::uint64_t {
    TruthRegime = 1,
    TruthState = 2,
    Sensor = 3,
    Schedule = 4,
    ParticleInit = 5,
    Propagate = 6,
    FilterResample = 7,
    PriorDraw = 8,
    RandomWalk = 9,
    SamplerResample = 10,
    FilterSeed = 11,
};

/// SplitMix64 finalizer; used for key mixing and for seeding.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// xoshiro256++ engine. Satisfies UniformRandomBitGenerator so it plugs into
/// the <random> distributions. Seeding costs four SplitMix64 steps, which is
/// what makes one fresh stream per (particle, day) affordable.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t key = 0) noexcept {
        std::uint64_t z = key;
        for (auto& word : state_) {
            z += 0x9e3779b97f4a7c15ULL;
            word = mix64(z);
        }
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()() noexcept {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept {
        return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
};

/// Derives an independent stream from a root seed, a draw-site tag and any
/// number of integer indices (day, particle, iteration, ...).
inline Rng make_stream(std::uint64_t seed, StreamTag tag,
                       std::initializer_list<std::uint64_t> indices = {}) noexcept {
    std::uint64_t key = mix64(seed ^ 0x6a09e667f3bcc908ULL);
    key = mix64(key ^ static_cast<std::uint64_t>(tag));
    for (const auto index : indices) {
        key = mix64(key ^ (index + 0x3c6ef372fe94f82bULL));
    }
    return Rng(key);
}

}  // namespace flpf
