#pragma once
#include <cstdint>
#include <cmath>

namespace sja {

// Counter-style splitmix64: tiny state, platform-independent streams, and
// seed+k gives decorrelated per-realization generators.
struct SplitMix64 {
    uint64_t state = 0;

    explicit SplitMix64(uint64_t seed = 0) : state(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0,1), 53-bit mantissa
    double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }
};

// Marsaglia polar method; avoids trig so results are bit-stable across libm builds.
struct GaussianSampler {
    SplitMix64 rng;
    bool has_spare = false;
    double spare = 0;

    explicit GaussianSampler(uint64_t seed) : rng(seed) {}

    double next() {
        if (has_spare) {
            has_spare = false;
            return spare;
        }
        double u, v, s;
        do {
            u = 2.0 * rng.next_double() - 1.0;
            v = 2.0 * rng.next_double() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double f = std::sqrt(-2.0 * std::log(s) / s);
        spare = v * f;
        has_spare = true;
        return u * f;
    }
};

} // namespace sja
