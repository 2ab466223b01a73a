#include "desk_corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mascara/error.hpp"
#include "mascara/random.hpp"

namespace mascara::desk {

Lexicon Lexicon::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read lexicon " + path.string());
    Lexicon lex;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream fields(line);
        std::string word, tag, freq;
        if (!std::getline(fields, word, '\t') || !std::getline(fields, tag, '\t') || !std::getline(fields, freq))
            throw LoadError("expected word, class and frequency", lineno);
        try {
            lex.classes[tag].push_back({word, std::stod(freq)});
        } catch (const std::exception&) {
            throw LoadError("bad frequency '" + freq + "'", lineno);
        }
    }
    for (const char* tag : {"N", "NS", "V", "VD", "VZ", "A", "R", "DET", "PREP", "CONJ", "AUX", "PRON", "NAME"})
        if (lex.classes[tag].empty()) throw ConfigError(std::string("lexicon has no words of class ") + tag);
    return lex;
}

namespace {

std::uint64_t tag_key(const std::string& tag) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : tag) h = (h ^ c) * 1099511628211ull;
    return h;
}

class WordClass {
public:
    WordClass(const std::vector<Lexicon::Entry>& entries, std::uint64_t salt, std::size_t collocates)
        : entries_(entries), salt_(salt), collocates_(collocates) {
        std::vector<std::uint64_t> w;
        w.reserve(entries.size());
        for (const auto& e : entries) w.push_back(std::max<std::uint64_t>(1, std::llround(e.frequency * 1e9)));
        sampler_ = WeightedSampler(w);
    }

    std::size_t size() const { return entries_.size(); }
    const std::string& word(std::size_t i) const { return entries_[i].word; }
    std::size_t draw(Rng& rng) const { return sampler_.sample(rng); }

    // The k-th preferred collocate of head word `head` of another class: a
    // frequency-weighted draw from a stream fixed by (salt, head, k).
    std::size_t collocate(std::uint64_t head, Rng& rng) const {
        Rng fixed(derive_seed(salt_ ^ head * 0x9E3779B97F4A7C15ull, rng.uniform_index(collocates_)));
        return sampler_.sample(fixed);
    }

private:
    const std::vector<Lexicon::Entry>& entries_;
    std::uint64_t salt_;
    std::size_t collocates_;
    WeightedSampler sampler_;
};

class Grammar {
public:
    Grammar(const Lexicon& lex, const DeskConfig& cfg) : cfg_(cfg) {
        std::uint64_t salt = cfg.seed;
        for (const auto& [tag, entries] : lex.classes) classes_.emplace(tag, WordClass(entries, ++salt, cfg.collocates));
    }

    void sentence(Rng& rng, std::vector<std::string>& out) const {
        clause(rng, out);
        if (rng.uniform01() < 0.25) {
            pick("CONJ", rng, out);
            clause(rng, out);
        }
    }

private:
    const WordClass& cls(const std::string& tag) const { return classes_.at(tag); }

    std::size_t pick(const std::string& tag, Rng& rng, std::vector<std::string>& out) const {
        std::size_t i = cls(tag).draw(rng);
        out.push_back(cls(tag).word(i));
        return i;
    }

    // Draws from `tag`, preferring collocates of (head_tag, head).
    std::size_t pick_near(const std::string& tag, const std::string& head_tag, std::size_t head, Rng& rng,
                          std::vector<std::string>& out) const {
        const WordClass& c = cls(tag);
        std::size_t i;
        if (rng.uniform01() < cfg_.affinity) {
            std::uint64_t key = derive_seed(tag_key(head_tag), head);
            i = c.collocate(key, rng);
        } else {
            i = c.draw(rng);
        }
        out.push_back(c.word(i));
        return i;
    }

    // Returns the class and index of the head noun.
    std::pair<std::string, std::size_t> noun_phrase(Rng& rng, std::vector<std::string>& out,
                                                    const std::string& gov_tag = "", std::size_t gov = 0) const {
        const bool plural = rng.uniform01() < 0.25;
        const std::string tag = plural ? "NS" : "N";
        if (!plural) pick("DET", rng, out);
        const bool adjective = rng.uniform01() < (plural ? 0.3 : 0.4);
        // The noun is chosen first so its adjective can depend on it.
        std::vector<std::string> noun;
        std::size_t n = gov_tag.empty() ? pick(tag, rng, noun) : pick_near(tag, gov_tag, gov, rng, noun);
        if (adjective) pick_near("A", tag, n, rng, out);
        out.push_back(noun.front());
        return {tag, n};
    }

    void clause(Rng& rng, std::vector<std::string>& out) const {
        std::string subj_tag;
        std::size_t subj = 0;
        const double s = rng.uniform01();
        if (s < 0.6) {
            std::tie(subj_tag, subj) = noun_phrase(rng, out);
        } else if (s < 0.85) {
            subj_tag = "NAME";
            subj = pick("NAME", rng, out);
        } else {
            subj_tag = "PRON";
            subj = pick("PRON", rng, out);
        }

        const double p = rng.uniform01();
        std::string verb_tag;
        std::size_t verb = 0;
        if (p < 0.55) {
            verb_tag = "VD";
        } else if (p < 0.75) {
            pick("AUX", rng, out);
            verb_tag = "V";
        } else {
            verb_tag = subj_tag == "NS" || subj_tag == "PRON" ? "VD" : "VZ";
        }
        verb = pick_near(verb_tag, subj_tag, subj, rng, out);

        if (rng.uniform01() < 0.8)
            noun_phrase(rng, out, verb_tag, verb);
        else
            pick_near("R", verb_tag, verb, rng, out);

        if (rng.uniform01() < 0.35) {
            std::size_t prep = pick("PREP", rng, out);
            noun_phrase(rng, out, "PREP", prep);
        }
    }

    DeskConfig cfg_;
    std::map<std::string, WordClass> classes_;
};

}  // namespace

std::string generate_text(const Lexicon& lexicon, const DeskConfig& cfg) {
    Grammar grammar(lexicon, cfg);
    std::string text;
    std::size_t words = 0;
    std::vector<std::string> sentence;
    for (std::uint64_t i = 0; words < cfg.target_words; ++i) {
        Rng rng(derive_seed(cfg.seed, i));
        sentence.clear();
        grammar.sentence(rng, sentence);
        for (std::size_t j = 0; j < sentence.size(); ++j) {
            if (j) text += ' ';
            text += sentence[j];
        }
        text += ".\n";
        words += sentence.size();
    }
    return text;
}

}  // namespace mascara::desk
