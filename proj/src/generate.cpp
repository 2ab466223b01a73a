#include "mascara/generate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "mascara/error.hpp"

namespace mascara {

namespace {

std::string trim(const std::string& s) {
    const auto* ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

// Same arithmetic as sigma_chr, over precomputed lengths.
double sigma_of_lengths(std::span<const std::size_t> lengths) {
    double sum = 0.0;
    for (auto n : lengths) sum += static_cast<double>(n);
    const double mean = sum / static_cast<double>(lengths.size());
    double var = 0.0;
    for (auto n : lengths) {
        const double d = static_cast<double>(n) - mean;
        var += d * d;
    }
    return std::sqrt(var / static_cast<double>(lengths.size()));
}

double combine_S(const CerCoefficients& c, double l1, double l2, double sigma) {
    return c.alpha1 * l1 + c.alpha2 * l2 + c.alpha3 * sigma;
}

std::string lengths_list(const std::vector<std::size_t>& lengths) {
    std::string out;
    for (auto n : lengths) {
        if (!out.empty()) out += ", ";
        out += std::to_string(n);
    }
    return out.empty() ? "none" : out;
}

}  // namespace

std::vector<std::string> load_word_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open word file '" + path.string() + "'");
    std::vector<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        auto w = trim(line);
        if (w.empty() || w[0] == '#') continue;
        words.push_back(std::move(w));
    }
    return words;
}

StopwordSet load_stopwords(const std::filesystem::path& path) {
    auto words = load_word_file(path);
    return {words.begin(), words.end()};
}

Passphrase diceware(std::span<const std::string> wordlist, std::size_t length, Rng& rng) {
    if (wordlist.empty()) throw ConfigError("diceware wordlist is empty");
    if (length == 0) throw ConfigError("passphrase length must be at least 1");
    Passphrase p;
    p.source = "diceware";
    for (std::size_t i = 0; i < length; ++i) p.words.push_back(wordlist[rng.uniform_index(wordlist.size())]);
    p.gen_probability = std::pow(1.0 / static_cast<double>(wordlist.size()), static_cast<double>(length));
    return p;
}

TemplateSet::TemplateSet(std::vector<std::vector<std::string>> templates,
                         std::map<std::string, std::vector<std::string>> wordlists)
    : wordlists_(std::move(wordlists)) {
    if (templates.empty()) throw ConfigError("template set is empty");
    for (auto& slots : templates) {
        if (slots.empty()) throw ConfigError("template with no slots");
        double capacity = 1.0;
        for (const auto& tag : slots) {
            auto it = wordlists_.find(tag);
            if (it == wordlists_.end() || it->second.empty()) {
                throw ConfigError("tag '" + tag + "' has no wordlist or an empty one");
            }
            capacity *= static_cast<double>(it->second.size());
        }
        templates_.push_back({std::move(slots), capacity});
    }
}

TemplateSet TemplateSet::load(const std::filesystem::path& template_file) {
    std::ifstream in(template_file);
    if (!in) throw IoError("cannot open template file '" + template_file.string() + "'");
    std::vector<std::vector<std::string>> templates;
    std::map<std::string, std::vector<std::string>> lists;
    std::string line;
    while (std::getline(in, line)) {
        auto t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::vector<std::string> slots;
        std::size_t pos = 0;
        while (pos < t.size()) {
            auto b = t.find_first_not_of(" \t", pos);
            if (b == std::string::npos) break;
            auto e = t.find_first_of(" \t", b);
            if (e == std::string::npos) e = t.size();
            slots.push_back(t.substr(b, e - b));
            pos = e;
        }
        for (const auto& tag : slots) {
            if (lists.contains(tag)) continue;
            auto path = template_file.parent_path() / (tag + ".txt");
            if (!std::filesystem::exists(path)) throw ConfigError("missing wordlist file '" + path.string() + "'");
            lists[tag] = load_word_file(path);
        }
        templates.push_back(std::move(slots));
    }
    return TemplateSet(std::move(templates), std::move(lists));
}

std::vector<double> TemplateSet::capacities() const {
    std::vector<double> out;
    out.reserve(templates_.size());
    for (const auto& t : templates_) out.push_back(t.capacity);
    return out;
}

double TemplateSet::total_capacity() const {
    double sum = 0.0;
    for (const auto& t : templates_) sum += t.capacity;
    return sum;
}

std::vector<std::size_t> TemplateSet::lengths() const {
    std::set<std::size_t> s;
    for (const auto& t : templates_) s.insert(t.length());
    return {s.begin(), s.end()};
}

std::vector<std::size_t> TemplateSet::templates_of_length(std::size_t length) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < templates_.size(); ++i) {
        if (templates_[i].length() == length) out.push_back(i);
    }
    return out;
}

namespace {

TemplateDraw fill_template(const TemplateSet& set, std::size_t index, double choice_probability, Rng& rng) {
    TemplateDraw d;
    d.template_index = index;
    d.phrase.source = "templatedice";
    double prob = choice_probability;
    for (const auto& tag : set.templates()[index].slots) {
        const auto& list = set.wordlist(tag);
        const auto k = rng.uniform_index(list.size());
        d.phrase.words.push_back(list[k]);
        d.position = d.position * static_cast<double>(list.size()) + static_cast<double>(k);
        prob /= static_cast<double>(list.size());
    }
    d.phrase.gen_probability = prob;
    return d;
}

}  // namespace

TemplateDraw template_dice(const TemplateSet& set, std::size_t length, Rng& rng) {
    const auto candidates = set.templates_of_length(length);
    if (candidates.empty()) {
        throw ConfigError("no template of length " + std::to_string(length) +
                          "; available lengths: " + lengths_list(set.lengths()));
    }
    const auto pick = candidates[rng.uniform_index(candidates.size())];
    return fill_template(set, pick, 1.0 / static_cast<double>(candidates.size()), rng);
}

TemplateDraw template_dice_any(const TemplateSet& set, Rng& rng) {
    const auto n = set.templates().size();
    return fill_template(set, rng.uniform_index(n), 1.0 / static_cast<double>(n), rng);
}

MarkovGenerator::MarkovGenerator(const MarkovModel& model, std::size_t max_restarts)
    : model_(model), max_restarts_(max_restarts) {
    samplers_.resize(model.id_count());
    targets_.resize(model.id_count());
    for (WordId w = 0; w < model.id_count(); ++w) {
        if (w == kEndId) continue;
        std::vector<std::uint64_t> weights;
        for (const auto& s : model.successors(w)) {
            if (s.word == kEndId) continue;
            targets_[w].push_back(s.word);
            weights.push_back(s.count);
        }
        samplers_[w] = WeightedSampler(weights);
    }
    if (samplers_[kStartId].empty()) throw GenerationError("model has no sentence-start words", 0);
}

Passphrase MarkovGenerator::generate(std::size_t length, Rng& rng) const {
    if (length == 0) throw ConfigError("passphrase length must be at least 1");
    std::size_t restarts = 0;
    for (;;) {
        Passphrase p;
        p.source = "markov";
        double prob = 1.0;
        WordId prev = kStartId;
        bool dead_end = false;
        for (std::size_t i = 0; i < length; ++i) {
            const auto& sampler = samplers_[prev];
            if (sampler.empty()) {
                dead_end = true;
                break;
            }
            const auto next = targets_[prev][sampler.sample(rng)];
            prob *= static_cast<double>(model_.bigram_count(prev, next)) /
                    static_cast<double>(model_.successor_total(prev));
            p.words.push_back(model_.word(next));
            prev = next;
        }
        if (!dead_end) {
            p.gen_probability = prob;
            return p;
        }
        if (restarts == max_restarts_) {
            throw GenerationError("markov generation hit dead ends on every attempt", restarts);
        }
        ++restarts;
    }
}

Passphrase markov_generate(const MarkovModel& model, std::size_t length, Rng& rng, std::size_t max_restarts) {
    return MarkovGenerator(model, max_restarts).generate(length, rng);
}

double default_theta2(const MarkovModel& model) { return 0.8 * model.min_word_l2(); }

double score_S(const CerCoefficients& coeffs, const MarkovModel& model, std::span<const std::string> prefix,
               double oov_floor) {
    if (prefix.empty()) throw DomainError("score of an empty prefix");
    auto lookup = [&](const std::string& w) -> std::optional<WordId> {
        auto id = model.find(w);
        if (id && model.is_sentinel(*id)) return std::nullopt;
        return id;
    };
    const auto last = lookup(prefix.back());
    const double l1 = last ? model.l1(*last) : oov_floor;
    double l2 = 0.0;
    if (prefix.size() >= 2) {
        const auto prev = lookup(prefix[prefix.size() - 2]);
        l2 = (prev && last && model.bigram_count(*prev, *last) > 0) ? model.l2(*prev, *last) : oov_floor;
    }
    std::vector<std::size_t> lengths;
    for (const auto& w : prefix) lengths.push_back(w.size());
    return combine_S(coeffs, l1, l2, sigma_of_lengths(lengths));
}

double score_S(const CerCoefficients& coeffs, const MarkovModel& model, std::span<const std::string> prefix) {
    return score_S(coeffs, model, prefix, default_oov_floor(model));
}

std::string get_first_word(const MarkovModel& model, const StopwordSet& stopwords, Rng& rng) {
    std::vector<WordId> ids;
    std::vector<std::uint64_t> weights;
    for (const auto& s : model.successors(kStartId)) {
        if (model.is_sentinel(s.word) || stopwords.contains(model.word(s.word))) continue;
        ids.push_back(s.word);
        weights.push_back(model.unigram_count(s.word));
    }
    if (ids.empty()) throw GenerationError("every sentence-start word is a stopword", 0);
    return model.word(ids[WeightedSampler(weights).sample(rng)]);
}

ThetaBound theta_bound_check(const CerCoefficients& coeffs, double theta1, double theta2) {
    if (!(coeffs.alpha2 < 0.0)) throw DomainError("theta bound needs alpha2 < 0");
    const double induced = coeffs.alpha2 * theta2;
    return {theta2 <= 0.0 && induced <= theta1, induced};
}

MascaraGenerator::MascaraGenerator(const MarkovModel& model, GenerationConfig cfg)
    : model_(model), cfg_(std::move(cfg)) {
    if (cfg_.length == 0) throw ConfigError("passphrase length must be at least 1");
    theta2_ = cfg_.theta2.value_or(default_theta2(model));
    if (std::isnan(cfg_.theta1) || std::isnan(theta2_)) throw ConfigError("theta1 and theta2 must be numbers");
    if (theta2_ > 0.0) throw ConfigError("theta2 must be <= 0, got " + std::to_string(theta2_));
    if (cfg_.cer_coeffs.alpha2 < 0.0 && !theta_bound_check(cfg_.cer_coeffs, cfg_.theta1, theta2_).satisfied) {
        throw ConfigError("theta bound violated: need theta2 >= theta1 / alpha2 (alpha2 * theta2 = " +
                          std::to_string(cfg_.cer_coeffs.alpha2 * theta2_) + " exceeds theta1 = " +
                          std::to_string(cfg_.theta1) + ")");
    }
    oov_floor_ = default_oov_floor(model);

    const auto n = model.id_count();
    is_stopword_.assign(n, false);
    l1_.assign(n, 0.0);
    by_count_.resize(n);
    for (WordId w = 2; w < n; ++w) {
        is_stopword_[w] = cfg_.stopwords.contains(model.word(w));
        l1_[w] = model.l1(w);
        auto& list = by_count_[w];
        for (const auto& s : model.successors(w)) {
            if (s.word != kEndId) list.push_back({s.count, s.word});
        }
        std::ranges::sort(list, [](const Candidate& a, const Candidate& b) {
            return a.count != b.count ? a.count < b.count : a.word < b.word;
        });
    }

    std::vector<std::uint64_t> first_weights;
    std::vector<std::uint64_t> single_weights;
    for (const auto& s : model.successors(kStartId)) {
        if (model.is_sentinel(s.word) || is_stopword_[s.word]) continue;
        first_words_.push_back(s.word);
        first_weights.push_back(model.unigram_count(s.word));
        if (model.has_end_successor(s.word)) {
            single_words_.push_back(s.word);
            single_weights.push_back(model.unigram_count(s.word));
        }
    }
    if (first_words_.empty()) throw GenerationError("every sentence-start word is a stopword", 0);
    first_sampler_ = WeightedSampler(first_weights);
    single_sampler_ = WeightedSampler(single_weights);
}

std::optional<WordId> MascaraGenerator::draw_next(std::span<const WordId> prefix, bool last, Rng& rng) const {
    const WordId prev = prefix.back();
    const auto& list = by_count_[prev];
    const auto total = static_cast<double>(model_.successor_total(prev));
    const double theta2 = theta2_;
    // L2 grows with the bigram count, so the L2 ceiling keeps a prefix.
    const auto m = static_cast<std::size_t>(
        std::ranges::partition_point(list, [&](const Candidate& c) {
            return std::log10(static_cast<double>(c.count) / total) <= theta2;
        }) - list.begin());
    if (m == 0) return std::nullopt;

    std::vector<std::size_t> lengths;
    lengths.reserve(prefix.size() + 1);
    for (auto id : prefix) lengths.push_back(model_.word(id).size());
    lengths.push_back(0);

    auto ok = [&](const Candidate& c) {
        if (last && (is_stopword_[c.word] || !model_.has_end_successor(c.word))) return false;
        lengths.back() = model_.word(c.word).size();
        const double l2 = std::log10(static_cast<double>(c.count) / total);
        return combine_S(cfg_.cer_coeffs, l1_[c.word], l2, sigma_of_lengths(lengths)) <= cfg_.theta1;
    };

    // Rejection sampling over the L2-admissible prefix is exactly uniform on
    // the filtered support; after a run of rejections the support is
    // enumerated instead, which keeps the draw uniform overall.
    constexpr int kTries = 64;
    for (int t = 0; t < kTries; ++t) {
        const auto& c = list[rng.uniform_index(m)];
        if (ok(c)) return c.word;
    }
    std::vector<WordId> support;
    for (std::size_t i = 0; i < m; ++i) {
        if (ok(list[i])) support.push_back(list[i].word);
    }
    if (support.empty()) return std::nullopt;
    return support[rng.uniform_index(support.size())];
}

Passphrase MascaraGenerator::generate(Rng& rng, MascaraStats* stats) const { return generate(cfg_.length, rng, stats); }

Passphrase MascaraGenerator::generate(std::size_t length, Rng& rng, MascaraStats* stats) const {
    if (length == 0) throw ConfigError("passphrase length must be at least 1");
    if (length == 1 && single_sampler_.empty()) {
        throw GenerationError("no sentence-start word can also end a phrase", 0);
    }
    std::size_t restarts = 0;
    std::vector<WordId> ids;
    for (;;) {
        ids.clear();
        if (length == 1) {
            ids.push_back(single_words_[single_sampler_.sample(rng)]);
        } else {
            ids.push_back(first_words_[first_sampler_.sample(rng)]);
        }
        bool ok = true;
        for (std::size_t i = 1; i < length; ++i) {
            auto next = draw_next(ids, i + 1 == length, rng);
            if (!next) {
                ok = false;
                break;
            }
            ids.push_back(*next);
        }
        if (ok) break;
        if (restarts == cfg_.max_restarts) {
            throw GenerationError("no passphrase satisfies theta1 = " + std::to_string(cfg_.theta1) +
                                      ", theta2 = " + std::to_string(theta2_),
                                  restarts);
        }
        ++restarts;
    }
    if (stats) stats->restarts = restarts;
    Passphrase p;
    p.source = "mascara";
    for (auto id : ids) p.words.push_back(model_.word(id));
    return p;
}

Passphrase mascara_generate(const MarkovModel& model, const GenerationConfig& cfg) {
    MascaraGenerator gen(model, cfg);
    Rng rng(cfg.seed);
    return gen.generate(rng);
}

}  // namespace mascara
