#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "mascara/error.hpp"
#include "mascara/markov.hpp"
#include "mascara/memorability.hpp"
#include "mascara/random.hpp"

namespace mascara {

struct Passphrase {
    std::vector<std::string> words;
    std::string source;
    // Probability of this output under its generator; empty where the
    // generator does not define one.
    std::optional<double> gen_probability;

    std::string text() const { return join_words(words); }
};

using StopwordSet = std::unordered_set<std::string>;

std::vector<std::string> load_word_file(const std::filesystem::path& path);
StopwordSet load_stopwords(const std::filesystem::path& path);

// --- Diceware -------------------------------------------------------------

Passphrase diceware(std::span<const std::string> wordlist, std::size_t length, Rng& rng);

// --- TemplateDice ---------------------------------------------------------

struct Template {
    std::vector<std::string> slots;
    double capacity = 0.0;

    std::size_t length() const { return slots.size(); }
};

// Part-of-speech templates with one wordlist per tag.
class TemplateSet {
public:
    TemplateSet(std::vector<std::vector<std::string>> templates, std::map<std::string, std::vector<std::string>> wordlists);

    // One template per line (tags separated by spaces, '#' comments allowed);
    // the wordlist of tag T is read from T.txt next to the template file.
    static TemplateSet load(const std::filesystem::path& template_file);

    const std::vector<Template>& templates() const { return templates_; }
    const std::vector<std::string>& wordlist(const std::string& tag) const { return wordlists_.at(tag); }
    std::vector<double> capacities() const;
    double total_capacity() const;
    std::vector<std::size_t> lengths() const;
    std::vector<std::size_t> templates_of_length(std::size_t length) const;

private:
    std::vector<Template> templates_;
    std::map<std::string, std::vector<std::string>> wordlists_;
};

struct TemplateDraw {
    Passphrase phrase;
    std::size_t template_index = 0;
    // Mixed-radix index of the phrase inside its template, in [0, capacity).
    double position = 0.0;
};

// Uniform template among those of the requested length, then a uniform word
// per slot.
TemplateDraw template_dice(const TemplateSet& set, std::size_t length, Rng& rng);
// Uniform template among all of them; induces the set's length distribution.
TemplateDraw template_dice_any(const TemplateSet& set, Rng& rng);

// --- Markov-based generators ----------------------------------------------

// Unconstrained baseline: each word drawn from the successors of the previous
// one weighted by bigram count. A word with no successor other than the end
// sentinel is a dead end and restarts the phrase.
class MarkovGenerator {
public:
    explicit MarkovGenerator(const MarkovModel& model, std::size_t max_restarts = 1000);

    Passphrase generate(std::size_t length, Rng& rng) const;

private:
    const MarkovModel& model_;
    std::size_t max_restarts_;
    std::vector<WeightedSampler> samplers_;
    std::vector<std::vector<WordId>> targets_;
};

Passphrase markov_generate(const MarkovModel& model, std::size_t length, Rng& rng, std::size_t max_restarts = 1000);

struct GenerationConfig {
    std::size_t length = 4;
    double theta1 = 0.5;
    // Bigram log-probability ceiling; defaults to 80% of the model's minimum
    // word-to-word L2.
    std::optional<double> theta2;
    StopwordSet stopwords;
    std::size_t max_restarts = 1000;
    std::uint64_t seed = 1;
    CerCoefficients cer_coeffs = kPublishedCerCoefficients;
};

double default_theta2(const MarkovModel& model);

// Incremental CER score of a prefix: alpha1 L1(last) + alpha2 L2(previous,
// last) + alpha3 sigma_chr(prefix). The L2 term is zero for a single word;
// unseen unigrams and bigrams take the OOV floor.
double score_S(const CerCoefficients& coeffs, const MarkovModel& model, std::span<const std::string> prefix,
               double oov_floor);
double score_S(const CerCoefficients& coeffs, const MarkovModel& model, std::span<const std::string> prefix);

// First word: a sentence start outside the stopword set, drawn with weight
// proportional to its corpus-wide unigram count.
std::string get_first_word(const MarkovModel& model, const StopwordSet& stopwords, Rng& rng);

struct ThetaBound {
    bool satisfied = false;
    // alpha2 * theta2, the least value S can take given the L2 ceiling.
    double induced = 0.0;
};

// Checks 0 >= theta2 >= theta1 / alpha2 (equivalently theta1 >= alpha2 *
// theta2). Requires alpha2 < 0.
ThetaBound theta_bound_check(const CerCoefficients& coeffs, double theta1, double theta2);

struct MascaraStats {
    std::size_t restarts = 0;
};

// Constrained generation. After a first word, each step keeps the successors
// of the previous word with S <= theta1 and L2 <= theta2; the final step also
// drops stopwords and keeps only words that can end a sentence. The next
// word is drawn uniformly from what is left; an empty support restarts from a
// fresh first word.
class MascaraGenerator {
public:
    MascaraGenerator(const MarkovModel& model, GenerationConfig cfg);

    const GenerationConfig& config() const { return cfg_; }
    double theta2() const { return theta2_; }

    Passphrase generate(Rng& rng, MascaraStats* stats = nullptr) const;
    Passphrase generate(std::size_t length, Rng& rng, MascaraStats* stats = nullptr) const;

private:
    struct Candidate {
        std::uint64_t count;
        WordId word;
    };

    std::optional<WordId> draw_next(std::span<const WordId> prefix, bool last, Rng& rng) const;

    const MarkovModel& model_;
    GenerationConfig cfg_;
    double theta2_;
    double oov_floor_;
    std::vector<bool> is_stopword_;
    std::vector<double> l1_;
    // Word successors (end sentinel excluded) sorted by ascending count.
    std::vector<std::vector<Candidate>> by_count_;
    std::vector<WordId> first_words_;
    WeightedSampler first_sampler_;
    std::vector<WordId> single_words_;
    WeightedSampler single_sampler_;
};

Passphrase mascara_generate(const MarkovModel& model, const GenerationConfig& cfg);

// Phrase i is drawn from its own stream derive_seed(seed, i), so a batch is
// reproducible and independent of how it is split across workers.
template <class F>
std::vector<Passphrase> generate_batch(std::size_t count, std::uint64_t seed, F&& one) {
    std::vector<Passphrase> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng(derive_seed(seed, i));
        out.push_back(one(rng));
    }
    return out;
}

}  // namespace mascara
