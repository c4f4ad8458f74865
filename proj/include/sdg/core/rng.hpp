#pragma once

#include <cstdint>
#include <vector>

#include "sdg/core/errors.hpp"

namespace sdg {

// Deterministic across platforms: xoshiro256** seeded through splitmix64.
// All game, sampling, and tournament randomness flows through instances of
// this stream; identical seeds yield identical draw sequences.
class DeterministicRandomStream {
public:
    explicit DeterministicRandomStream(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& word : state_) word = splitmix64(x);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // [0, 1)
    double uniform_real() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Unbiased draw from [0, n), rejection over the tail block.
    std::uint64_t uniform_int(std::uint64_t n) {
        if (n == 0) throw Error("uniform_int: empty range");
        const std::uint64_t threshold = (0 - n) % n;
        std::uint64_t x = next_u64();
        while (x < threshold) x = next_u64();
        return x % n;
    }

    // Inclusive bounds.
    int uniform_range(int lo, int hi) {
        if (lo > hi) throw Error("uniform_range: lo > hi");
        return lo + static_cast<int>(uniform_int(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    bool bernoulli(double p) { return uniform_real() < p; }

    template <typename T>
    const T& pick(const std::vector<T>& items) {
        if (items.empty()) throw Error("pick: empty set");
        return items[uniform_int(items.size())];
    }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = uniform_int(i);
            std::swap(items[i - 1], items[j]);
        }
    }

    // Independent substream; (seed, tag) -> substream is a pure function.
    DeterministicRandomStream split(std::uint64_t tag) {
        std::uint64_t x = next_u64() ^ (0x9E3779B97F4A7C15ull * (tag + 1));
        return DeterministicRandomStream(splitmix64(x));
    }

    static std::uint64_t mix(std::uint64_t seed, std::uint64_t tag) {
        std::uint64_t x = seed ^ (0xBF58476D1CE4E5B9ull * (tag + 1));
        splitmix64(x);
        return splitmix64(x);
    }

private:
    static std::uint64_t rotl(std::uint64_t v, int k) {
        return (v << k) | (v >> (64 - k));
    }

    static std::uint64_t splitmix64(std::uint64_t& x) {
        std::uint64_t z = (x += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t state_[4];
};

inline DeterministicRandomStream new_rng(std::uint64_t seed) {
    return DeterministicRandomStream(seed);
}

}  // namespace sdg
