#pragma once

// Independent reference implementations used only by the tests.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mascara/generate.hpp"
#include "mascara/markov.hpp"
#include "mascara/random.hpp"
#include "mascara/segment.hpp"

namespace mascara::testing {

// ceil(1 / (n * a)) in exact rational arithmetic (a is a dyadic rational).
std::uint64_t exact_ceil_reciprocal(std::uint64_t n, double a);

// Fixed-length bigram chain over `vocab` symbols with random positive
// weights: P(x) = init[x0] * prod trans[x(i-1)][x(i)].
class ToyChain {
public:
    ToyChain(std::size_t vocab, std::size_t length, std::uint64_t seed, double skew = 2.0);

    std::size_t outcomes() const;
    double probability(std::span<const std::size_t> x) const;
    std::vector<std::size_t> sample(Rng& rng) const;
    // Probabilities of every outcome, in lexicographic order of outcomes.
    std::vector<double> enumerate() const;

private:
    std::size_t vocab_, length_;
    std::vector<double> init_;
    std::vector<std::vector<double>> trans_;
};

// 1 + number of outcomes strictly more probable than p.
double true_rank(std::span<const double> all_probs, double p);

// Best total log10 probability over every split of `run` into table words;
// empty when no split exists.
std::optional<double> exhaustive_best_split(const UnigramTable& table, const std::string& run);
double split_score(const UnigramTable& table, const std::vector<std::string>& words);

// Every way a MASCARA phrase can break the generator's contract, as
// readable messages; empty means the phrase is valid.
std::vector<std::string> mascara_violations(const MarkovModel& model, const GenerationConfig& cfg, double theta2,
                                            const std::vector<std::string>& words);

// The filter-at-end variant: plain Markov phrases drawn until one meets all
// of the constraints. Returns the phrase and the number of rejected drafts.
struct FilterAtEndResult {
    Passphrase phrase;
    std::size_t rejected = 0;
};
FilterAtEndResult mascara_end(const MarkovGenerator& markov, const MarkovModel& model, const GenerationConfig& cfg,
                              double theta2, Rng& rng, std::size_t max_drafts = 100'000'000);

// A small hand-countable corpus: "Red Fox runs fast. red fox sleeps!"
MarkovModel toy_model();

}  // namespace mascara::testing
