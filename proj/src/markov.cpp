#include "mascara/markov.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>

#include "mascara/error.hpp"

namespace mascara {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        auto tab = line.find('\t', start);
        if (tab == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

std::uint64_t parse_count(std::string_view field, std::size_t line_no) {
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
        throw LoadError("non-numeric count field '" + std::string(field) + "'", line_no);
    }
    if (value == 0) throw LoadError("count must be positive", line_no);
    return value;
}

bool is_word_text(std::string_view w) {
    if (w.empty()) return false;
    return std::all_of(w.begin(), w.end(), [](char c) { return c != '\t' && c != '\n' && c != '\r' && c != ' '; });
}

std::uint64_t pair_key(WordId a, WordId b) { return (static_cast<std::uint64_t>(a) << 32) | b; }

}  // namespace

void MarkovModel::index_words() {
    index_.clear();
    index_.reserve(words_.size());
    for (WordId i = 0; i < words_.size(); ++i) index_.emplace(words_[i], i);
}

MarkovModel MarkovModel::train(const TokenizedCorpus& corpus) {
    if (corpus.sentences.empty() || corpus.total_words == 0) {
        throw TrainingError("cannot train a Markov model on an empty corpus");
    }
    MarkovModel m;
    std::vector<std::string> vocab;
    {
        std::unordered_map<std::string_view, bool> seen;
        for (const auto& s : corpus.sentences)
            for (const auto& w : s)
                if (seen.emplace(w, true).second) vocab.emplace_back(w);
    }
    std::sort(vocab.begin(), vocab.end());
    m.words_.reserve(vocab.size() + 2);
    m.words_.emplace_back(kStartToken);
    m.words_.emplace_back(kEndToken);
    for (auto& w : vocab) {
        if (w == kStartToken || w == kEndToken) throw TrainingError("corpus word collides with a sentinel");
        m.words_.push_back(std::move(w));
    }
    m.index_words();

    const std::size_t n = m.words_.size();
    m.unigram_.assign(n, 0);
    std::unordered_map<std::uint64_t, std::uint64_t> pairs;
    pairs.reserve(corpus.total_words);
    for (const auto& s : corpus.sentences) {
        if (s.empty()) continue;
        WordId prev = kStartId;
        for (const auto& w : s) {
            WordId cur = m.index_.at(w);
            ++m.unigram_[cur];
            ++m.total_words_;
            ++pairs[pair_key(prev, cur)];
            prev = cur;
        }
        ++pairs[pair_key(prev, kEndId)];
    }

    m.successors_.assign(n, {});
    m.successor_total_.assign(n, 0);
    for (auto [key, count] : pairs) {
        auto from = static_cast<WordId>(key >> 32);
        auto to = static_cast<WordId>(key & 0xffffffffu);
        m.successors_[from].push_back({to, count});
        m.successor_total_[from] += count;
    }
    for (auto& row : m.successors_) {
        std::sort(row.begin(), row.end(), [](const Successor& a, const Successor& b) { return a.word < b.word; });
    }
    return m;
}

std::optional<WordId> MarkovModel::find(std::string_view word) const {
    auto it = index_.find(std::string(word));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

WordId MarkovModel::id(std::string_view word) const {
    auto found = find(word);
    if (!found) throw OovError("word '" + std::string(word) + "' is not in the model vocabulary");
    return *found;
}

std::uint64_t MarkovModel::bigram_count(WordId from, WordId to) const {
    const auto& row = successors_[from];
    auto it = std::lower_bound(row.begin(), row.end(), to,
                               [](const Successor& s, WordId w) { return s.word < w; });
    return (it != row.end() && it->word == to) ? it->count : 0;
}

double MarkovModel::l1(WordId id) const {
    if (is_sentinel(id) || unigram_[id] == 0) {
        throw OovError("no unigram probability for '" + words_[id] + "'");
    }
    return std::log10(static_cast<double>(unigram_[id]) / static_cast<double>(total_words_));
}

double MarkovModel::l1(std::string_view word) const {
    auto found = find(word);
    if (!found || is_sentinel(*found)) throw OovError("word '" + std::string(word) + "' is not in the model vocabulary");
    return l1(*found);
}

double MarkovModel::l2(WordId from, WordId to) const {
    const auto c = bigram_count(from, to);
    if (c == 0) throw OovError("unseen bigram (" + words_[from] + ", " + words_[to] + ")");
    return std::log10(static_cast<double>(c) / static_cast<double>(successor_total_[from]));
}

double MarkovModel::l2(std::string_view from, std::string_view to) const {
    auto a = find(from);
    auto b = find(to);
    if (!a || !b) {
        throw OovError("unseen bigram (" + std::string(from) + ", " + std::string(to) + ")");
    }
    return l2(*a, *b);
}

std::vector<std::string> MarkovModel::next(std::string_view word) const {
    auto found = find(word);
    if (!found || *found == kEndId) throw OovError("word '" + std::string(word) + "' is not in the model vocabulary");
    std::vector<std::string> out;
    for (const auto& s : successors_[*found]) out.push_back(words_[s.word]);
    std::sort(out.begin(), out.end());
    return out;
}

double MarkovModel::min_word_l2() const {
    double best = 0.0;
    for (WordId w = 2; w < words_.size(); ++w) {
        for (const auto& s : successors_[w]) {
            if (s.word == kEndId) continue;
            best = std::min(best, std::log10(static_cast<double>(s.count) / static_cast<double>(successor_total_[w])));
        }
    }
    return best;
}

void MarkovModel::save(std::ostream& out) const {
    out << kModelHeader << '\n';
    // Ids past the sentinels are already in lexicographic order, and "<e>"
    // and "<s>" sort before any lowercase word, so id order is file order.
    for (WordId w = 2; w < words_.size(); ++w) {
        out << "U\t" << words_[w] << '\t' << unigram_[w] << '\n';
    }
    for (WordId w = 0; w < words_.size(); ++w) {
        for (const auto& s : successors_[w]) {
            out << "B\t" << words_[w] << '\t' << words_[s.word] << '\t' << s.count << '\n';
        }
    }
}

void MarkovModel::save_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write model file '" + path + "'");
    save(out);
    if (!out) throw IoError("failed writing model file '" + path + "'");
}

MarkovModel MarkovModel::load(std::istream& in) {
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) throw LoadError("missing header", line_no);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kModelHeader) throw LoadError("unknown model header '" + line + "'", line_no);

    std::map<std::string, std::uint64_t> unigrams;
    struct RawBigram {
        std::string from, to;
        std::uint64_t count;
        std::size_t line;
    };
    std::vector<RawBigram> bigrams;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto f = split_tabs(line);
        if (f[0] == "U") {
            if (f.size() != 3 || !is_word_text(f[1])) throw LoadError("malformed unigram line", line_no);
            if (f[1] == kStartToken || f[1] == kEndToken) throw LoadError("sentinel in unigram table", line_no);
            if (!unigrams.emplace(std::string(f[1]), parse_count(f[2], line_no)).second) {
                throw LoadError("duplicate unigram '" + std::string(f[1]) + "'", line_no);
            }
        } else if (f[0] == "B") {
            if (f.size() != 4 || !is_word_text(f[1]) || !is_word_text(f[2])) {
                throw LoadError("malformed bigram line", line_no);
            }
            bigrams.push_back({std::string(f[1]), std::string(f[2]), parse_count(f[3], line_no), line_no});
        } else {
            throw LoadError("unknown record type '" + std::string(f[0]) + "'", line_no);
        }
    }
    if (in.bad()) throw LoadError("read failure", line_no);
    if (unigrams.empty()) throw LoadError("model has no unigrams", line_no);

    MarkovModel m;
    m.words_.emplace_back(kStartToken);
    m.words_.emplace_back(kEndToken);
    m.unigram_.assign(2, 0);
    for (auto& [w, c] : unigrams) {
        m.words_.push_back(w);
        m.unigram_.push_back(c);
        m.total_words_ += c;
    }
    m.index_words();
    m.successors_.assign(m.words_.size(), {});
    m.successor_total_.assign(m.words_.size(), 0);
    for (const auto& b : bigrams) {
        auto from = m.find(b.from);
        auto to = m.find(b.to);
        if (!from || *from == kEndId) throw LoadError("bigram source '" + b.from + "' has no unigram entry", b.line);
        if (!to || *to == kStartId) throw LoadError("bigram target '" + b.to + "' has no unigram entry", b.line);
        m.successors_[*from].push_back({*to, b.count});
        m.successor_total_[*from] += b.count;
    }
    for (WordId w = 0; w < m.words_.size(); ++w) {
        auto& row = m.successors_[w];
        std::sort(row.begin(), row.end(), [](const Successor& a, const Successor& b) { return a.word < b.word; });
        for (std::size_t i = 1; i < row.size(); ++i) {
            if (row[i].word == row[i - 1].word) {
                throw LoadError("duplicate bigram (" + m.words_[w] + ", " + m.words_[row[i].word] + ")", line_no);
            }
        }
        if (w >= 2 && m.successor_total_[w] != m.unigram_[w]) {
            throw LoadError("successor counts of '" + m.words_[w] + "' do not sum to its unigram count", line_no);
        }
    }
    return m;
}

MarkovModel MarkovModel::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model file '" + path + "'");
    return load(in);
}

}  // namespace mascara
