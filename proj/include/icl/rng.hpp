#pragma once

#include <cstdint>
#include <cmath>
#include <random>
#include <vector>

namespace icl {

// Deterministic RNG used everywhere seeds appear in the public interface.
// std::mt19937_64 output is pinned by the standard; the distributions are
// hand-rolled because the std:: ones are implementation-defined and results
// must reproduce bit-for-bit across toolchains.
struct Rng {
    std::mt19937_64 gen;

    explicit Rng(uint64_t seed) : gen(seed) {}

    uint64_t next() { return gen(); }

    // unbiased draw in [0, n) via rejection
    uint64_t bounded(uint64_t n) {
        if (n == 0) return 0;
        uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t v;
        do {
            v = gen();
        } while (v >= limit);
        return v % n;
    }

    // 53-bit uniform in [0, 1)
    double uniform01() { return (gen() >> 11) * 0x1.0p-53; }

    // Box-Muller, one value per call (the twin is discarded so the stream
    // position never depends on call history)
    double normal(double mean, double stddev) {
        double u1, u2;
        do {
            u1 = uniform01();
        } while (u1 <= 0.0);
        u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        return mean + stddev * r * std::cos(2.0 * M_PI * u2);
    }
};

// Seeded Fisher-Yates permutation of 0..n-1.
inline std::vector<int> shuffled_indices(int n, uint64_t seed) {
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    Rng rng(seed);
    for (int i = 0; i < n - 1; ++i) {
        int j = i + (int)rng.bounded((uint64_t)(n - i));
        std::swap(idx[i], idx[j]);
    }
    return idx;
}

}  // namespace icl
