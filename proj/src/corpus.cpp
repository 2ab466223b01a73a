#include "mascara/corpus.hpp"

#include <cstdint>
#include <fstream>
#include <ostream>
#include <sstream>

#include "mascara/error.hpp"

namespace mascara {

namespace {

bool is_ascii_letter(unsigned char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_ascii_digit(unsigned char c) { return c >= '0' && c <= '9'; }
bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
char to_lower(unsigned char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c); }

// Replaces every '<' ... '>' span with a single space. A '<' that is never
// closed is left in place and later acts as an ordinary separator.
std::string strip_tags(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] == '<') {
            auto close = text.find('>', i + 1);
            if (close != std::string_view::npos) {
                out.push_back(' ');
                i = close + 1;
                continue;
            }
        }
        out.push_back(text[i]);
        ++i;
    }
    return out;
}

bool is_url(std::string_view token) {
    if (token.find("://") != std::string_view::npos) return true;
    if (token.size() >= 4) {
        std::string head;
        for (std::size_t i = 0; i < 4; ++i) head.push_back(to_lower(static_cast<unsigned char>(token[i])));
        if (head == "www.") return true;
    }
    return false;
}

class Cleaner {
public:
    explicit Cleaner(const CleaningConfig& cfg) : cfg_(cfg) {}

    void feed(std::string_view text) {
        std::size_t i = 0;
        while (i < text.size()) {
            const auto c = static_cast<unsigned char>(text[i]);
            if (is_space(c)) {
                if (is_delimiter(c)) close_sentence();
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j < text.size() && !is_space(static_cast<unsigned char>(text[j]))) ++j;
            raw_token(text.substr(i, j - i));
            i = j;
        }
    }

    TokenizedCorpus finish() {
        close_sentence();
        return std::move(corpus_);
    }

private:
    bool is_delimiter(unsigned char c) const {
        return cfg_.sentence_delimiters.find(static_cast<char>(c)) != std::string::npos;
    }

    void raw_token(std::string_view token) {
        if (is_url(token)) {
            if (is_delimiter(static_cast<unsigned char>(token.back()))) close_sentence();
            return;
        }
        std::string piece;
        for (unsigned char c : token) {
            if (is_ascii_letter(c) || is_ascii_digit(c)) {
                piece.push_back(static_cast<char>(c));
                continue;
            }
            flush(piece);
            if (is_delimiter(c)) close_sentence();
        }
        flush(piece);
    }

    void flush(std::string& piece) {
        if (piece.empty()) return;
        bool has_digit = false;
        for (unsigned char c : piece) has_digit = has_digit || is_ascii_digit(c);
        if (!has_digit) {
            emit(piece);
        } else if (!cfg_.drop_alphanumeric) {
            std::string letters;
            for (unsigned char c : piece) {
                if (is_ascii_digit(c)) {
                    emit(letters);
                    letters.clear();
                } else {
                    letters.push_back(static_cast<char>(c));
                }
            }
            emit(letters);
        }
        piece.clear();
    }

    void emit(const std::string& letters) {
        if (letters.size() < cfg_.min_word_len || letters.empty()) return;
        std::string word;
        word.reserve(letters.size());
        for (unsigned char c : letters) word.push_back(to_lower(c));
        corpus_.vocab.insert(word);
        current_.push_back(std::move(word));
        ++corpus_.total_words;
    }

    void close_sentence() {
        if (!current_.empty()) corpus_.sentences.push_back(std::move(current_));
        current_.clear();
    }

    const CleaningConfig& cfg_;
    TokenizedCorpus corpus_;
    Sentence current_;
};

}  // namespace

void TokenizedCorpus::append(TokenizedCorpus&& other) {
    for (auto& s : other.sentences) sentences.push_back(std::move(s));
    vocab.merge(other.vocab);
    total_words += other.total_words;
}

void validate_utf8(std::string_view bytes) {
    std::size_t i = 0;
    const std::size_t n = bytes.size();
    while (i < n) {
        const auto c = static_cast<unsigned char>(bytes[i]);
        if (c < 0x80) {
            ++i;
            continue;
        }
        std::size_t len;
        std::uint32_t cp;
        if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        } else {
            throw DecodeError("invalid UTF-8 lead byte", i);
        }
        if (i + len > n) throw DecodeError("truncated UTF-8 sequence", i);
        for (std::size_t k = 1; k < len; ++k) {
            const auto cc = static_cast<unsigned char>(bytes[i + k]);
            if ((cc & 0xC0) != 0x80) throw DecodeError("invalid UTF-8 continuation byte", i + k);
            cp = (cp << 6) | (cc & 0x3F);
        }
        static constexpr std::uint32_t kMinForLen[] = {0, 0, 0x80, 0x800, 0x10000};
        if (cp < kMinForLen[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
            throw DecodeError("invalid UTF-8 code point", i);
        }
        i += len;
    }
}

TokenizedCorpus clean_corpus(std::string_view raw_text, const CleaningConfig& cfg) {
    if (cfg.min_word_len < 1) throw ConfigError("min_word_len must be at least 1");
    validate_utf8(raw_text);
    Cleaner cleaner(cfg);
    cleaner.feed(strip_tags(raw_text));
    return cleaner.finish();
}

TokenizedCorpus clean_corpus_file(const std::string& path, const CleaningConfig& cfg) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open corpus file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("failed reading corpus file '" + path + "'");
    try {
        return clean_corpus(buf.str(), cfg);
    } catch (const DecodeError& e) {
        throw DecodeError(path + ": " + std::string("malformed UTF-8"), e.byte_offset());
    }
}

std::string render_corpus(const TokenizedCorpus& corpus) {
    std::ostringstream out;
    write_corpus(out, corpus);
    return out.str();
}

void write_corpus(std::ostream& out, const TokenizedCorpus& corpus) {
    for (const auto& sentence : corpus.sentences) {
        out << join_words(sentence) << ".\n";
    }
}

std::vector<std::string> normalize_phrase(std::string_view text) {
    std::vector<std::string> words;
    std::string cur;
    for (unsigned char c : text) {
        if (is_ascii_letter(c)) {
            cur.push_back(to_lower(c));
        } else if (!cur.empty()) {
            words.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) words.push_back(std::move(cur));
    return words;
}

std::string join_words(const std::vector<std::string>& words, char sep) {
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i) out.push_back(sep);
        out += words[i];
    }
    return out;
}

}  // namespace mascara
