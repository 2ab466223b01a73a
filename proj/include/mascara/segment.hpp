#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "mascara/markov.hpp"

namespace mascara {

enum class RejectReason { TooShort, HashLike, EmailLike, TooFewLetters, NonPhrasal };

std::string_view reason_name(RejectReason r);

struct FilterConfig {
    std::size_t min_password_chars = 20;
    std::size_t min_letters = 9;
    std::vector<std::string> hash_prefixes = {"$1$",  "$2a$", "$2b$", "$2y$",  "$5$",     "$6$",
                                              "$P$",  "$H$",  "$argon2", "{SHA}", "{SSHA}", "{MD5}",
                                              "sha1$", "md5$", "pbkdf2_"};
    std::size_t min_word_len = 3;
    std::size_t min_valid_words = 3;
    // Edits allowed across the whole password when matching segments
    // approximately; each single segment is bounded by the same number.
    int edit_tolerance = 1;
};

void validate(const FilterConfig& cfg);

// Union of named word sets (english, geo, firstnames, ...).
class Dictionaries {
public:
    void add(const std::string& name, const std::vector<std::string>& words);
    // Loads every *.txt file in the directory, named after the file stem.
    static Dictionaries load_dir(const std::filesystem::path& dir);

    bool contains(std::string_view word) const { return words_.contains(std::string(word)); }
    const std::unordered_set<std::string>& words() const { return words_; }
    std::vector<std::string> names() const;
    std::size_t max_word_len() const { return max_len_; }

private:
    std::map<std::string, std::size_t> sizes_;
    std::unordered_set<std::string> words_;
    std::size_t max_len_ = 0;
};

std::optional<RejectReason> filter_password(std::string_view pw, const FilterConfig& cfg);

// Letter runs of the password, lowercased; any other character separates.
std::vector<std::string> letter_runs(std::string_view pw);

// Longest dictionary match first at every position, no backtracking. Fails
// unless every letter run is covered exactly.
std::optional<std::vector<std::string>> greedy_segment(std::string_view pw, const Dictionaries& dicts);

// Word probabilities for the probabilistic pass.
class UnigramTable {
public:
    UnigramTable() = default;
    explicit UnigramTable(std::unordered_map<std::string, std::uint64_t> counts);
    static UnigramTable from_model(const MarkovModel& model);
    // word<TAB>count per line; '#' lines skipped.
    static UnigramTable load(std::istream& in);
    static UnigramTable load_file(const std::filesystem::path& path);

    // Adds words missing from the table with the table's smallest count.
    void cover(const Dictionaries& dicts);

    bool contains(std::string_view w) const { return counts_.contains(std::string(w)); }
    double log10_probability(std::string_view w) const;
    std::size_t size() const { return counts_.size(); }
    const std::unordered_map<std::string, std::uint64_t>& counts() const { return counts_; }

private:
    std::unordered_map<std::string, std::uint64_t> counts_;
    std::uint64_t total_ = 0;
};

// Splits each letter run into vocabulary words maximizing the summed log10
// unigram probability. A segment may also match a word within a few edits
// (optimal string alignment distance), looked up through a symmetric-delete
// index; segmentations with fewer total edits win, then higher probability.
class ProbabilisticSegmenter {
public:
    ProbabilisticSegmenter(UnigramTable table, int edit_tolerance, std::size_t min_word_len = 3);

    std::optional<std::vector<std::string>> segment(std::string_view pw) const;
    std::optional<std::vector<std::string>> segment_run(std::string_view run) const;
    const UnigramTable& table() const { return table_; }

private:
    struct Match {
        std::string word;
        int edits;
        double log10_p;
    };
    std::optional<Match> lookup(std::string_view segment) const;

    UnigramTable table_;
    int tolerance_;
    std::size_t min_word_len_;
    std::size_t max_len_ = 0;
    std::unordered_map<std::string, std::vector<std::string>> deletes_;
};

int osa_distance(std::string_view a, std::string_view b);

bool accept_passphrase(const std::vector<std::string>& words, const Dictionaries& dicts, const FilterConfig& cfg);

struct SegmentationResult {
    std::string input;
    std::optional<RejectReason> rejected;
    std::vector<std::string> words;

    bool accepted() const { return !rejected.has_value(); }
};

class PassphraseMiner {
public:
    PassphraseMiner(FilterConfig cfg, Dictionaries dicts, UnigramTable table);

    SegmentationResult process(std::string_view password) const;
    const Dictionaries& dictionaries() const { return dicts_; }
    const FilterConfig& config() const { return cfg_; }

private:
    FilterConfig cfg_;
    Dictionaries dicts_;
    ProbabilisticSegmenter prob_;
};

// Password field of a dump record: text after the first ':' if any.
std::string_view record_password(std::string_view line);

struct MiningSummary {
    std::size_t records = 0;
    std::size_t accepted = 0;
    // Accepted phrases in first-seen order with occurrence counts.
    std::vector<std::pair<std::string, std::size_t>> unique;
    std::map<std::string, std::size_t> rejected;

    std::size_t accepted_unique() const { return unique.size(); }
    std::string to_json() const;
};

MiningSummary mine_dump(std::istream& in, const PassphraseMiner& miner,
                        std::vector<SegmentationResult>* results = nullptr);

}  // namespace mascara
