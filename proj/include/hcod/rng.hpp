#pragma once

#include <cstdint>

namespace hcod {

// Counter-based generator: every draw is a pure function of
// (seed, stream, counter), so results do not depend on call order,
// threading, or the platform's <random> implementation.
class CounterRng {
public:
    explicit CounterRng(uint64_t seed, uint64_t stream = 0) : key_(mix(seed ^ mix(stream + 0x632be59bd9b4e019ull))) {}

    uint64_t bits(uint64_t counter) const { return mix(key_ + counter * 0x9e3779b97f4a7c15ull); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform(uint64_t counter) const { return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53; }

    double uniform(uint64_t counter, double lo, double hi) const { return lo + (hi - lo) * uniform(counter); }

    // Uniform integer in [0, n).
    uint64_t below(uint64_t counter, uint64_t n) const { return bits(counter) % n; }

    CounterRng substream(uint64_t stream) const { return CounterRng(key_, stream); }

private:
    // SplitMix64 finalizer.
    static uint64_t mix(uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    uint64_t key_;
};

}  // namespace hcod
