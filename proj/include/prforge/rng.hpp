#pragma once

// Portable, splittable random streams.
//
// Every stream is a xoshiro256** generator seeded through SplitMix64. Child
// streams are derived from (parent seed, index) so that work items can own an
// independent stream no matter which worker executes them. Normal deviates use
// the Box-Muller transform on 53-bit uniforms; no <random> distributions are
// involved, so a seed produces the same values with any standard library.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace prforge {

using Seed = std::uint64_t;

inline constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed of child stream `index` under `parent`.
inline constexpr Seed derive_seed(Seed parent, std::uint64_t index) noexcept {
    std::uint64_t s = parent ^ 0x6a09e667f3bcc909ULL;
    const std::uint64_t a = splitmix64(s);
    std::uint64_t t = a + index * 0xd1b54a32d192ed03ULL;
    return splitmix64(t);
}

/// Stream tags keep the per-branch, per-chain and per-transform families disjoint.
enum class StreamDomain : std::uint64_t {
    init_branch = 1,
    chain = 2,
    tta_branch = 3,
    simulate = 4,
};

inline constexpr Seed derive_seed(Seed parent, StreamDomain domain, std::uint64_t index) noexcept {
    return derive_seed(derive_seed(parent, static_cast<std::uint64_t>(domain)), index);
}

class Rng {
public:
    explicit constexpr Rng(Seed seed) noexcept : seed_(seed) {
        std::uint64_t s = seed;
        for (auto& w : state_) w = splitmix64(s);
    }

    [[nodiscard]] constexpr Seed seed() const noexcept { return seed_; }

    [[nodiscard]] Rng split(std::uint64_t index) const noexcept { return Rng(derive_seed(seed_, index)); }

    constexpr std::uint64_t next_u64() noexcept {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform on [0, 1).
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal deviate; consumes exactly two 64-bit draws.
    double normal() noexcept {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

    Seed seed_;
    std::array<std::uint64_t, 4> state_{};
};

/// Stands in for an Rng wherever noise must be suppressed in tests.
struct ZeroNormal {
    double normal() noexcept { return 0.0; }
    double uniform() noexcept { return 0.0; }
};

}  // namespace prforge
