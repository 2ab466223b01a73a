#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mascara/corpus.hpp"

namespace mascara {

using WordId = std::uint32_t;

inline constexpr WordId kStartId = 0;
inline constexpr WordId kEndId = 1;
inline constexpr std::string_view kStartToken = "<s>";
inline constexpr std::string_view kEndToken = "<e>";
inline constexpr std::string_view kModelHeader = "MASCARA-MODEL v1";

struct Successor {
    WordId word;
    std::uint64_t count;

    friend bool operator==(const Successor&, const Successor&) = default;
};

// Word bigram model with start/end sentinels. Word ids are assigned in
// lexicographic order of the words (after the two sentinels), so two models
// with the same counts are equal member-for-member. Immutable once built.
class MarkovModel {
public:
    static MarkovModel train(const TokenizedCorpus& corpus);

    // Line-oriented text format:
    //   MASCARA-MODEL v1
    //   U<TAB>word<TAB>count        (sorted by word)
    //   B<TAB>w1<TAB>w2<TAB>count   (sorted by w1, then w2)
    static MarkovModel load(std::istream& in);
    static MarkovModel load_file(const std::string& path);
    void save(std::ostream& out) const;
    void save_file(const std::string& path) const;

    std::size_t vocab_size() const { return words_.size() - 2; }
    std::uint64_t total_words() const { return total_words_; }
    std::size_t id_count() const { return words_.size(); }

    std::optional<WordId> find(std::string_view word) const;
    WordId id(std::string_view word) const;  // throws OovError
    const std::string& word(WordId id) const { return words_[id]; }
    bool is_sentinel(WordId id) const { return id == kStartId || id == kEndId; }

    std::uint64_t unigram_count(WordId id) const { return unigram_[id]; }
    std::uint64_t successor_total(WordId id) const { return successor_total_[id]; }
    // Successors of a word (or of the start sentinel), sorted by id.
    std::span<const Successor> successors(WordId id) const { return successors_[id]; }
    std::uint64_t bigram_count(WordId from, WordId to) const;
    bool has_end_successor(WordId id) const { return bigram_count(id, kEndId) > 0; }

    // log10 of the word's share of all non-sentinel tokens.
    double l1(WordId id) const;
    double l1(std::string_view word) const;
    // log10 of the conditional bigram probability P(to | from).
    double l2(WordId from, WordId to) const;
    double l2(std::string_view from, std::string_view to) const;
    std::vector<std::string> next(std::string_view word) const;

    // Smallest L2 over word-to-word bigrams; sentinel transitions excluded.
    double min_word_l2() const;

    friend bool operator==(const MarkovModel&, const MarkovModel&) = default;

private:
    MarkovModel() = default;
    void index_words();

    std::vector<std::string> words_;
    std::unordered_map<std::string, WordId> index_;
    std::vector<std::uint64_t> unigram_;
    std::vector<std::uint64_t> successor_total_;
    std::vector<std::vector<Successor>> successors_;
    std::uint64_t total_words_ = 0;
};

}  // namespace mascara
