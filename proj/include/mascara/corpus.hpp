#pragma once

#include <cstddef>
#include <iosfwd>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace mascara {

struct CleaningConfig {
    std::size_t min_word_len = 3;
    bool drop_alphanumeric = true;
    std::string sentence_delimiters = ".!?";
};

using Sentence = std::vector<std::string>;

struct TokenizedCorpus {
    std::vector<Sentence> sentences;
    std::set<std::string> vocab;
    std::size_t total_words = 0;

    bool empty() const { return total_words == 0; }
    void append(TokenizedCorpus&& other);

    friend bool operator==(const TokenizedCorpus&, const TokenizedCorpus&) = default;
};

// Throws DecodeError naming the byte offset of the first malformed UTF-8
// sequence.
void validate_utf8(std::string_view bytes);

// Case-folds and tokenizes raw text. Angle-bracket tags, URL tokens, tokens
// carrying digits, and words shorter than cfg.min_word_len are removed; any
// remaining non-letter byte (including non-ASCII) separates words, and the
// configured delimiters close sentences.
TokenizedCorpus clean_corpus(std::string_view raw_text, const CleaningConfig& cfg = {});

// Streams a file through clean_corpus.
TokenizedCorpus clean_corpus_file(const std::string& path, const CleaningConfig& cfg = {});

// Persisted form: one sentence per line, words separated by single spaces and
// the sentence closed by '.'. Feeding this text back through clean_corpus with
// a config that has '.' as a delimiter reproduces the corpus.
std::string render_corpus(const TokenizedCorpus& corpus);
void write_corpus(std::ostream& out, const TokenizedCorpus& corpus);

// Splits free text (a passphrase as typed, a dataset phrase) into lowercase
// ASCII words. Unlike clean_corpus nothing is dropped.
std::vector<std::string> normalize_phrase(std::string_view text);

std::string join_words(const std::vector<std::string>& words, char sep = ' ');

}  // namespace mascara
