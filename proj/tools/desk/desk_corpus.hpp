#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace mascara::desk {

// Word classes of the synthetic grammar, keyed by the tag used in
// lexicon.tsv: N NS V VD VG VZ A R DET PREP CONJ AUX PRON NAME.
struct Lexicon {
    struct Entry {
        std::string word;
        double frequency = 0.0;
    };
    std::map<std::string, std::vector<Entry>> classes;

    // word<TAB>class<TAB>frequency per line, '#' lines skipped.
    static Lexicon load(const std::filesystem::path& path);
};

struct DeskConfig {
    std::size_t target_words = 1'000'000;
    std::uint64_t seed = 1;
    // Chance that a slot takes one of the head word's preferred collocates
    // instead of a fresh draw from the whole class.
    double affinity = 0.55;
    std::size_t collocates = 5;
};

// English-like text from a small phrase-structure grammar:
//   S  -> Clause | Clause CONJ Clause
//   Clause -> Subject Predicate [PREP NP]
// with words drawn by corpus frequency and a per-word set of preferred
// collocates, which gives the bigram statistics a skewed, Zipf-like shape.
// One sentence per line, each closed by a period.
std::string generate_text(const Lexicon& lexicon, const DeskConfig& cfg);

}  // namespace mascara::desk
