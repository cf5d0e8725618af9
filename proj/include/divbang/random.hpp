#pragma once

#include <array>
#include <cstdint>

namespace divbang {

/// SplitMix64 step; used for seeding and for deriving per-path streams.
constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/**
 * xoshiro256** generator with SplitMix64 seeding.
 *
 * `for_path(master, i)` gives the stream for path i of a run. The stream
 * depends only on (master, i), so any partition of path indices over
 * workers reproduces the same draws.
 */
class RandomSource {
public:
    explicit RandomSource(std::uint64_t seed) noexcept {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    static RandomSource for_path(std::uint64_t master_seed, std::uint64_t path_index) noexcept {
        std::uint64_t a = master_seed;
        std::uint64_t mixed = splitmix64(a);
        std::uint64_t b = path_index ^ 0x6a09e667f3bcc909ULL;
        mixed ^= splitmix64(b);
        return RandomSource(mixed);
    }

    std::uint64_t next_u64() noexcept {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform on (0, 1]; never returns 0 so -log(u) stays finite.
    double uniform_open0() noexcept {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Exp(rate) by inversion.
    double exponential(double rate) noexcept;

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> s_{};
};

} // namespace divbang
