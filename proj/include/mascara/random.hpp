#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace mascara {

// Seeded randomness shared by every generator and sampler. The engine is
// std::mt19937_64, whose output sequence is fixed by the standard; the
// bounded/real draws below are implemented here rather than through
// std::uniform_*_distribution so results do not depend on the standard
// library vendor.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform integer in [0, bound). bound must be positive.
    std::uint64_t uniform_index(std::uint64_t bound);

    // Uniform real in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

// SplitMix64 finalizer over (seed, stream). Used to give every phrase index,
// worker, or model its own independent stream from one user seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Draws indices proportionally to non-negative integer weights using a
// cumulative table and binary search.
class WeightedSampler {
public:
    WeightedSampler() = default;
    explicit WeightedSampler(std::span<const std::uint64_t> weights);

    bool empty() const { return cumulative_.empty() || cumulative_.back() == 0; }
    std::uint64_t total() const { return cumulative_.empty() ? 0 : cumulative_.back(); }
    std::size_t size() const { return cumulative_.size(); }

    std::size_t sample(Rng& rng) const;

private:
    std::vector<std::uint64_t> cumulative_;
};

}  // namespace mascara
