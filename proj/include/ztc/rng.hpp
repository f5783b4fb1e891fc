#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ztc {

// Deterministic random source. std::mt19937_64 output is pinned by the
// standard and the value mappings below are pinned here, so sequences are
// identical across platforms for the same seed. std:: distributions are
// implementation-defined and must not be used where reproducibility matters.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform integer in [0, n), n > 0. Plain modulo: the bias is negligible
    // for the small ranges used here and the mapping is trivially stable.
    std::uint32_t uniform(std::uint32_t n) {
        return static_cast<std::uint32_t>(next_u64() % n);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform01() < p; }

    // Exponential variate with the given rate (events per time unit).
    double exponential(double rate) { return -std::log1p(-uniform01()) / rate; }

    // Independent substream, a stable function of (seed, key).
    static Rng derive(std::uint64_t seed, std::uint64_t key) {
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (key + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return Rng(z ^ (z >> 31));
    }

private:
    std::mt19937_64 gen_;
};

} // namespace ztc
