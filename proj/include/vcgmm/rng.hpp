#pragma once

#include <cstdint>
#include <random>

namespace vcgmm {

// SplitMix64 step; also used to derive independent sub-seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t s = master ^ (0xD1B54A32D192ED03ULL * (stream + 1));
    return splitmix64(s);
}

// Seeded generator with bit-deterministic helpers. std::uniform_* distributions
// are implementation-defined, so all draws go through unit()/below().
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next() { return gen_(); }

    // Uniform double in [0, 1) with 53 random bits.
    double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Unbiased uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = gen_();
            if (r >= threshold) return r % n;
        }
    }

private:
    std::mt19937_64 gen_;
};

// Cheap counter-based stream for per-point draws inside parallel loops.
// Draw sequence depends only on (seed, index), not on worker layout.
class PointStream {
public:
    PointStream(std::uint64_t seed, std::uint64_t index)
        : state_(seed ^ (0x9E3779B97F4A7C15ULL * (index + 1))) {}

    std::uint64_t next() { return splitmix64(state_); }

    std::uint64_t below(std::uint64_t n) { return next() % n; }

private:
    std::uint64_t state_;
};

}  // namespace vcgmm
