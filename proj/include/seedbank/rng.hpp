#pragma once

#include <cmath>
#include <cstdint>

namespace seedbank {

// SplitMix64, used to expand seeds and to mix stream identifiers.
struct SplitMix64 {
    std::uint64_t s;
    std::uint64_t next() {
        std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

// xoshiro256++ with a cached Box-Muller spare. Self-contained so results are
// bit-stable across platforms and library versions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        SplitMix64 sm{seed};
        for (auto& w : s_) w = sm.next();
    }

    std::uint64_t u64() {
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

    // Uniform on (0,1), never returns 0 or 1.
    double uniform() { return (static_cast<double>(u64() >> 11) + 0.5) * 0x1.0p-53; }

    double normal() {
        if (haveSpare_) {
            haveSpare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        haveSpare_ = true;
        return r * std::cos(a);
    }

    double exponential(double rate) { return -std::log(uniform()) / rate; }

    // Unbiased integer in [0, n) by rejection.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = u64();
            if (r >= threshold) return r % n;
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
    bool haveSpare_ = false;
    double spare_ = 0;
};

// Counter-based stream derivation: masterSeed x replicaIndex x streamTag are
// mixed through independent SplitMix64 rounds, so replica streams never
// overlap and adding estimators (new tags) never perturbs existing ones.
inline Rng make_stream(std::uint64_t master, std::uint64_t replica, std::uint64_t tag) {
    SplitMix64 a{master};
    SplitMix64 b{replica ^ 0x8e1f9d4a7c53b261ULL};
    SplitMix64 c{tag ^ 0x3c69d2a8f1e5b794ULL};
    return Rng(a.next() ^ b.next() ^ c.next());
}

// Stream tags, one per independent randomness consumer.
namespace stream_tag {
inline constexpr std::uint64_t forward_noise = 1;
inline constexpr std::uint64_t forward_init = 2;
inline constexpr std::uint64_t dual_events = 3;
inline constexpr std::uint64_t renewal = 4;
inline constexpr std::uint64_t discrete_colony = 5;
inline constexpr std::uint64_t moran = 6;
inline constexpr std::uint64_t probe = 7;
inline constexpr std::uint64_t coupled_init_b = 8;
} // namespace stream_tag

} // namespace seedbank
