#pragma once

#include <cstdint>
#include <vector>

namespace bevtraj {

// Portable deterministic PRNG ("splitmix64/v1", see docs/dataset-format.md).
// Identical seed gives an identical sequence on every platform; no global
// state, no time or locale dependence.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        ++draws_;
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix(state_);
    }

    // [0, 1) with 53 bits of precision.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Integer in [lo, hi], inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(next_u64() % span);
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Pick an index according to non-negative weights.
    std::size_t weighted_index(const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double u = uniform() * total;
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            if (u < weights[i]) return i;
            u -= weights[i];
        }
        return weights.empty() ? 0 : weights.size() - 1;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        // Fisher-Yates, fixed draw order.
        for (std::size_t i = v.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
            std::swap(v[i - 1], v[j]);
        }
    }

    std::uint64_t draws() const { return draws_; }

    // Deterministic sub-stream derivation: stream k of a base seed.
    static std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t stream) {
        return mix(seed + 0x9E3779B97F4A7C15ULL * (stream + 1));
    }

    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ULL;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBULL;
        z ^= z >> 31;
        return z;
    }

private:
    std::uint64_t state_;
    std::uint64_t draws_ = 0;
};

} // namespace bevtraj
