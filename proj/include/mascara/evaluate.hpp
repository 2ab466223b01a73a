#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mascara/attack.hpp"
#include "mascara/generate.hpp"
#include "mascara/markov.hpp"
#include "mascara/memorability.hpp"

namespace mascara {

// Everything needed to generate from the compared systems. A system takes
// part when its resource is present: diceware with a wordlist, templatedice
// with templates, markov and mascara with a model, user with phrases.
struct SystemSet {
    std::shared_ptr<const MarkovModel> model;
    std::vector<std::string> diceware_words;
    std::shared_ptr<const TemplateSet> templates;
    GenerationConfig mascara;
    std::vector<PhraseWords> user_phrases;

    std::vector<std::string> names() const;
};

struct SystemSample {
    std::vector<Passphrase> phrases;
    // TemplateDice only: source template and position of each phrase.
    std::vector<std::size_t> template_index;
    std::vector<double> template_position;
};

using TestSamples = std::map<std::string, SystemSample>;

// Phrase lengths are drawn first: from `lengths` cycled when given,
// otherwise from the length distribution TemplateDice induces by picking a
// template uniformly. Every generated system then produces one phrase per
// drawn length; user phrases keep their own lengths (up to `count` of them,
// chosen at random when there are more).
TestSamples build_test_samples(const SystemSet& systems, std::size_t count, std::uint64_t seed,
                               const std::vector<std::size_t>& lengths = {});

// Training phrases for a system's attackers, drawn from the same length
// distribution as the test phrases on an independent stream.
std::vector<PhraseWords> training_phrases(const SystemSet& systems, const std::string& system, std::size_t count,
                                          std::uint64_t seed, const std::vector<std::size_t>& lengths = {});

struct EvaluateOptions {
    std::size_t training_count = 100'000;
    std::size_t rank_samples = 10'000;
    std::uint64_t seed = 1;
    unsigned workers = 4;
    double smoothing = 1.0;
    CerCoefficients cer_coeffs = kPublishedCerCoefficients;
    // Length override used for training phrases; empty means the
    // TemplateDice distribution.
    std::vector<std::size_t> lengths;
};

struct SystemScores {
    std::vector<std::size_t> lengths;
    std::vector<double> cer;
    std::vector<double> log10_rank;
};

inline constexpr std::size_t kQuantileCount = 11;  // deciles, 0 through 1

struct SystemSummary {
    std::size_t phrases = 0;
    double mean_length = 0.0;
    std::vector<double> cer_quantiles;
    std::vector<double> log10_rank_quantiles;
    double cer_median = 0.0;
    double log10_rank_median = 0.0;
    std::optional<double> timing_seconds_per_1000;
};

struct OrderingCheck {
    std::string metric;
    std::string figure;
    std::string expected;
    std::string observed;
    bool pass = false;
};

struct EvaluationReport {
    std::map<std::string, std::string> metadata;
    std::map<std::size_t, std::size_t> length_histogram;
    std::map<std::string, SystemSummary> systems;
    std::vector<OrderingCheck> orderings;
    std::map<std::string, SystemScores> scores;

    bool all_pass() const;
    std::string to_json() const;
    // system,length,cer,log10_rank per phrase.
    void write_csv(std::ostream& out) const;
};

// Linear interpolation between order statistics at levels 0, 0.1, ..., 1.
std::vector<double> deciles(std::vector<double> values);
double median(std::vector<double> values);

// CER and min-auto guess rank of each phrase. `templates` adds the template
// enumeration attacker for phrases with a known source template.
SystemScores score_sample(const SystemSample& sample, const AttackEnsemble& ensemble, const MarkovModel& cer_model,
                          const CerCoefficients& coeffs, const TemplateSet* templates, std::uint64_t seed);

// Quantiles, medians and the qualitative orderings between systems.
EvaluationReport summarize(const std::map<std::string, SystemScores>& scores);

// Trains one attack ensemble per system on that system's own output, scores
// the samples and summarizes them.
EvaluationReport evaluate(const SystemSet& systems, const TestSamples& samples, const EvaluateOptions& opts);

// Mean log10 template-attack rank of TemplateDice phrases per length.
std::map<std::size_t, double> plateau_probe(const TemplateSet& templates, const std::vector<std::size_t>& lengths,
                                            std::size_t probes, std::uint64_t seed);

// Mean log10 rank of Diceware phrases against an attacker enumerating all
// wordlist_size^length phrases in random order.
std::map<std::size_t, double> diceware_probe(std::size_t wordlist_size, const std::vector<std::size_t>& lengths,
                                             std::size_t probes, std::uint64_t seed);

// Seconds to set up each generator and produce `count` phrases; median of
// `repeats` runs.
std::map<std::string, double> time_generation(const SystemSet& systems, std::size_t count, std::uint64_t seed,
                                              std::size_t length = 4, std::size_t repeats = 5);

}  // namespace mascara
