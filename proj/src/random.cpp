#include "mascara/random.hpp"

#include <algorithm>
#include <cassert>
#include <limits>

namespace mascara {

std::uint64_t Rng::uniform_index(std::uint64_t bound) {
    assert(bound > 0);
    // Rejection on the top of the range keeps every residue equally likely.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = next();
    } while (x >= limit);
    return x % bound;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

WeightedSampler::WeightedSampler(std::span<const std::uint64_t> weights) {
    cumulative_.reserve(weights.size());
    std::uint64_t running = 0;
    for (auto w : weights) {
        running += w;
        cumulative_.push_back(running);
    }
}

std::size_t WeightedSampler::sample(Rng& rng) const {
    assert(!empty());
    const std::uint64_t target = rng.uniform_index(cumulative_.back());
    // First slot whose cumulative weight exceeds the target.
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    return static_cast<std::size_t>(it - cumulative_.begin());
}

}  // namespace mascara
