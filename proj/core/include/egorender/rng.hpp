#pragma once

#include <cmath>
#include <cstdint>

namespace ego {

// splitmix64; used both as a stream hasher and as the PRNG core so that
// every consumer of randomness is reproducible from (seed, stream ids)
// independent of platform library details.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline uint64_t hash_combine(uint64_t seed, uint64_t v) {
    return splitmix64(seed ^ (v + 0x9e3779b97f4a7c15ull + (seed << 6) + (seed >> 2)));
}

// Small deterministic PRNG (xoshiro-style state walk over splitmix64).
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(splitmix64(seed ^ 0xc2b2ae3d27d4eb4full)) {}
    Rng(uint64_t seed, uint64_t stream) : Rng(hash_combine(seed, stream)) {}

    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return splitmix64(state_);
    }

    // uniform in [0,1)
    double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // uniform integer in [0, n)
    uint64_t below(uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

    // standard normal via Box-Muller (no state cached, deterministic)
    double normal() {
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 1e-300) u1 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    float normalf() { return static_cast<float>(normal()); }

private:
    uint64_t state_;
};

}  // namespace ego
