#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace opm {

// Deterministic RNG used everywhere instead of std distributions, whose
// output is implementation-defined. All draws below are fully pinned by the
// seed, so trajectories are reproducible bit for bit.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // uniform in [0,1) with 53 random bits
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // uniform in [0, n); modulo bias is ~n/2^64, irrelevant at our scales
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(eng_() % n); }

    bool bernoulli(double p) { return uniform01() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = below(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    // split off an independent stream (keyed so sub-streams do not collide)
    Rng fork(std::uint64_t key) {
        std::uint64_t s = next_u64();
        return Rng(s ^ (key * 0x9E3779B97F4A7C15ull));
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace opm
