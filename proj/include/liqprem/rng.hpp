#pragma once

#include <cstdint>
#include <random>

namespace liqprem {

// splitmix64: seed scrambler used to derive independent sub-stream seeds from
// (seed, path index, stream tag). The full 64-bit avalanche keeps nearby
// counters uncorrelated.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic engine for stream (seed, counter, tag). Every path owns two
// streams: tag 0 drives regime transitions, tag 1 drives price innovations,
// so antithetic negation can flip the Gaussians while the chain stays fixed.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t counter, std::uint64_t tag) {
    std::uint64_t s = splitmix64(seed ^ splitmix64(counter ^ splitmix64(tag)));
    return std::mt19937_64(s);
}

// Uniform in (0, 1]: never 0, so it is safe under log.
inline double uniform_pos(std::mt19937_64& rng) {
    return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

// Uniform in [0, 1).
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Box-Muller standard normals from explicit uniform bits. Implementation is
// pinned here (not std::normal_distribution) so seeded output is identical
// across standard libraries.
class NormalSampler {
public:
    explicit NormalSampler(std::mt19937_64 rng) : rng_(rng) {}

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform_pos(rng_);
        double u2 = uniform01(rng_);
        double radius = std::sqrt(-2.0 * std::log(u1));
        double angle = 6.283185307179586477 * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace liqprem
