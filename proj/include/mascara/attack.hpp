#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "mascara/markov.hpp"
#include "mascara/random.hpp"

namespace mascara {

using PhraseWords = std::vector<std::string>;

enum class NgramUnit { Word, Char };

// Additively smoothed n-gram model trained on a corpus of passphrases.
//
// A phrase is scored as the product of P(token | previous order-1 tokens),
// with the context padded by a start symbol and an end token appended. Word
// models predict words; char models predict the 26 lowercase letters and the
// space of the phrase rendered with single-space joins. With k the smoothing
// constant, C the context count and c the n-gram count,
//
//     P(token | context) = (c + k) / (C + k * E)
//
// where E is the size of the prediction space: vocabulary (or alphabet) plus
// the end token. Each conditional therefore sums to one and the model can be
// sampled exactly.
class NgramModel {
public:
    static NgramModel train(NgramUnit unit, int order, std::span<const PhraseWords> phrases, double k = 1.0);

    NgramUnit unit() const { return unit_; }
    int order() const { return order_; }
    double smoothing() const { return k_; }
    // Vocabulary size (word models) or alphabet size (char models).
    std::size_t symbol_count() const { return symbol_count_; }
    std::string id() const;

    double log10_probability(std::span<const std::string> phrase) const;
    // Draws a phrase from the model and returns its log10 probability.
    double sample_log10(Rng& rng, PhraseWords* out = nullptr) const;

private:
    struct Context {
        std::uint64_t total = 0;
        std::vector<std::uint32_t> tokens;      // sorted
        std::vector<std::uint64_t> cumulative;  // running counts, parallel to tokens
    };

    std::vector<std::uint32_t> encode(std::span<const std::string> phrase) const;
    std::uint64_t context_key(std::span<const std::uint32_t> history) const;
    double log10_conditional(const Context* ctx, std::uint32_t token) const;
    const Context* find_context(std::uint64_t key) const;

    NgramUnit unit_ = NgramUnit::Word;
    int order_ = 2;
    double k_ = 1.0;
    std::size_t symbol_count_ = 0;
    std::size_t max_tokens_ = 0;
    std::unordered_map<std::string, std::uint32_t> vocab_;
    std::vector<std::string> symbols_;
    std::unordered_map<std::uint64_t, Context> contexts_;
};

// Probabilistic bigram attacker trained on the generation corpus itself.
// Seen bigrams get their maximum-likelihood probability; an unseen bigram
// gets k / (C + k * E) with E = vocabulary size + 1. Sampling walks the
// maximum-likelihood chain from the start sentinel to the end sentinel.
class CorpusBigramModel {
public:
    CorpusBigramModel(std::shared_ptr<const MarkovModel> model, double k = 1.0, bool include_end = true);

    std::string id() const { return "corpus2"; }
    bool includes_end() const { return include_end_; }
    double log10_probability(std::span<const std::string> phrase) const;
    double sample_log10(Rng& rng, PhraseWords* out = nullptr) const;

private:
    double log10_step(std::optional<WordId> from, std::optional<WordId> to) const;

    std::shared_ptr<const MarkovModel> model_;
    double k_;
    bool include_end_;
    std::vector<WeightedSampler> samplers_;
};

using AttackModel = std::variant<NgramModel, CorpusBigramModel>;

std::string attack_id(const AttackModel& m);
double model_log10_probability(const AttackModel& m, std::span<const std::string> phrase);
// 10^log10_probability; may underflow to zero for very long phrases.
double model_probability(const AttackModel& m, std::span<const std::string> phrase);
double sample_log10(const AttackModel& m, Rng& rng, PhraseWords* out = nullptr);

inline constexpr std::string_view kRankTableHeader = "MASCARA-RANKTABLE v1";

// Monte-Carlo guess-rank table: sampled probabilities A sorted descending and
// cumulative ranks C with C[0] = ceil(1/(n A[0])) and
// C[i] = C[i-1] + ceil(1/(n A[i])).
class RankTable {
public:
    // Probabilities must lie in (0, 1]; they are sorted here.
    static RankTable from_probabilities(std::vector<double> probs);
    // log10 probabilities <= 0, converted to probabilities clamped at the
    // smallest normal double. The probabilities are the canonical content,
    // so a saved and reloaded table compares equal.
    static RankTable from_log10(std::vector<double> log10_probs);

    std::size_t size() const { return probs_.size(); }
    std::span<const double> probs() const { return probs_; }
    std::span<const double> log10_probs() const { return log10_probs_; }
    std::span<const double> ranks() const { return ranks_; }

    // Largest j with A[j] > p; returns the mean of C[j] and C[j+1], 1 when no
    // entry exceeds p, and C[n-1] when every entry does.
    double lookup(double p) const;
    double lookup_log10(double log10_p) const;

    // Header, sample count, then one hex float literal per line.
    void save(std::ostream& out) const;
    static RankTable load(std::istream& in);

    friend bool operator==(const RankTable&, const RankTable&) = default;

private:
    void build_ranks();
    double rank_at(std::size_t above) const;

    std::vector<double> probs_;
    std::vector<double> log10_probs_;
    std::vector<double> ranks_;
};

// ceil(1 / (n * a)) computed exactly for double a.
double ceil_reciprocal(std::uint64_t n, double a);

// Draws a fresh sample and returns its log10 probability.
using Log10Sampler = std::function<double(Rng&)>;

// Draws n samples split into `workers` contiguous chunks; chunk w uses the
// stream derive_seed(seed, w). The result depends only on (seed, workers).
RankTable build_rank_table(const Log10Sampler& sampler, std::size_t n, std::uint64_t seed, unsigned workers = 1);
RankTable build_rank_table(const AttackModel& model, std::size_t n, std::uint64_t seed, unsigned workers = 1);

double lookup_rank(const RankTable& table, double p);

// Template enumeration attacker: templates are drawn uniformly without
// replacement until the source template comes up; every phrase of the
// earlier templates is counted, then position + 1 inside the source.
double template_attack_rank(std::span<const double> capacities, std::size_t source, double position, Rng& rng);
double template_attack_rank(std::span<const double> capacities, std::size_t source, double position,
                            std::uint64_t seed);

struct GuessRankEstimate {
    std::map<std::string, double> per_model;
    double min_auto = 0.0;
    double log10_min = 0.0;
};

GuessRankEstimate min_auto(const std::map<std::string, double>& estimates);

// A set of attackers with their rank tables.
class AttackEnsemble {
public:
    void add(AttackModel model, RankTable table);
    void add(AttackModel model, std::size_t samples, std::uint64_t seed, unsigned workers = 1);

    std::size_t size() const { return entries_.size(); }
    std::map<std::string, double> ranks(std::span<const std::string> phrase) const;
    const RankTable& table(std::size_t i) const { return entries_[i].table; }
    const AttackModel& model(std::size_t i) const { return entries_[i].model; }

private:
    struct Entry {
        AttackModel model;
        RankTable table;
    };
    std::vector<Entry> entries_;
};

struct EnsembleOptions {
    std::size_t rank_samples = 10'000;
    std::uint64_t seed = 1;
    double smoothing = 1.0;
    unsigned workers = 1;
    bool include_end_transition = true;
};

// Word 2/3-gram and char 4/5/6-gram attackers trained on `training`, plus a
// corpus bigram attacker when a corpus model is supplied.
AttackEnsemble standard_ensemble(std::span<const PhraseWords> training, std::shared_ptr<const MarkovModel> corpus,
                                 const EnsembleOptions& opts);

}  // namespace mascara
