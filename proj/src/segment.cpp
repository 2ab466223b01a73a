#include "mascara/segment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <json.hpp>

#include "mascara/error.hpp"

namespace mascara {

namespace {

bool is_letter(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

bool is_hex(char c) { return is_digit(c) || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F'); }

void add_deletes(const std::string& word, int depth, std::unordered_set<std::string>& out) {
    if (depth == 0 || word.size() <= 1) return;
    for (std::size_t i = 0; i < word.size(); ++i) {
        std::string shorter = word.substr(0, i) + word.substr(i + 1);
        if (out.insert(shorter).second) add_deletes(shorter, depth - 1, out);
    }
}

UnigramTable covered(UnigramTable table, const Dictionaries& dicts) {
    table.cover(dicts);
    return table;
}

constexpr RejectReason kAllReasons[] = {RejectReason::TooShort, RejectReason::HashLike, RejectReason::EmailLike,
                                        RejectReason::TooFewLetters, RejectReason::NonPhrasal};

}  // namespace

std::string_view reason_name(RejectReason r) {
    switch (r) {
        case RejectReason::TooShort: return "too_short";
        case RejectReason::HashLike: return "hash_like";
        case RejectReason::EmailLike: return "email_like";
        case RejectReason::TooFewLetters: return "too_few_letters";
        case RejectReason::NonPhrasal: return "non_phrasal";
    }
    return "unknown";
}

void validate(const FilterConfig& cfg) {
    if (cfg.min_valid_words < 1) throw ConfigError("min_valid_words must be at least 1");
    if (cfg.min_word_len < 1) throw ConfigError("min_word_len must be at least 1");
    if (cfg.edit_tolerance < 0) throw ConfigError("edit_tolerance must be non-negative");
}

void Dictionaries::add(const std::string& name, const std::vector<std::string>& words) {
    sizes_[name] += words.size();
    for (const auto& w : words) {
        std::string lw;
        for (char c : w) lw.push_back(lower(c));
        max_len_ = std::max(max_len_, lw.size());
        words_.insert(std::move(lw));
    }
}

Dictionaries Dictionaries::load_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw IoError("dictionary directory '" + dir.string() + "' not found");
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
    }
    std::ranges::sort(files);
    if (files.empty()) throw IoError("no *.txt dictionaries in '" + dir.string() + "'");
    Dictionaries d;
    for (const auto& f : files) {
        std::ifstream in(f);
        if (!in) throw IoError("cannot open dictionary '" + f.string() + "'");
        std::vector<std::string> words;
        std::string line;
        while (std::getline(in, line)) {
            while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
            if (line.empty() || line[0] == '#') continue;
            words.push_back(line);
        }
        d.add(f.stem().string(), words);
    }
    return d;
}

std::vector<std::string> Dictionaries::names() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : sizes_) out.push_back(name);
    return out;
}

std::optional<RejectReason> filter_password(std::string_view pw, const FilterConfig& cfg) {
    if (pw.size() < cfg.min_password_chars) return RejectReason::TooShort;
    if (std::ranges::all_of(pw, is_hex)) return RejectReason::HashLike;
    for (const auto& prefix : cfg.hash_prefixes) {
        if (!prefix.empty() && pw.starts_with(prefix)) return RejectReason::HashLike;
    }
    for (std::size_t at = pw.find('@', 1); at != std::string_view::npos; at = pw.find('@', at + 1)) {
        if (pw.find('.', at + 1) != std::string_view::npos) return RejectReason::EmailLike;
    }
    if (static_cast<std::size_t>(std::ranges::count_if(pw, is_letter)) < cfg.min_letters) {
        return RejectReason::TooFewLetters;
    }
    return std::nullopt;
}

std::vector<std::string> letter_runs(std::string_view pw) {
    std::vector<std::string> runs;
    std::string cur;
    for (char c : pw) {
        if (is_letter(c)) {
            cur.push_back(lower(c));
        } else if (!cur.empty()) {
            runs.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) runs.push_back(std::move(cur));
    return runs;
}

std::optional<std::vector<std::string>> greedy_segment(std::string_view pw, const Dictionaries& dicts) {
    std::vector<std::string> out;
    for (const auto& run : letter_runs(pw)) {
        std::size_t i = 0;
        while (i < run.size()) {
            std::size_t len = std::min(dicts.max_word_len(), run.size() - i);
            for (; len > 0; --len) {
                if (dicts.contains(std::string_view(run).substr(i, len))) break;
            }
            if (len == 0) return std::nullopt;
            out.push_back(run.substr(i, len));
            i += len;
        }
    }
    if (out.empty()) return std::nullopt;
    return out;
}

UnigramTable::UnigramTable(std::unordered_map<std::string, std::uint64_t> counts) : counts_(std::move(counts)) {
    for (auto it = counts_.begin(); it != counts_.end();) {
        if (it->second == 0) {
            it = counts_.erase(it);
        } else {
            total_ += it->second;
            ++it;
        }
    }
}

UnigramTable UnigramTable::from_model(const MarkovModel& model) {
    std::unordered_map<std::string, std::uint64_t> counts;
    for (WordId w = 2; w < model.id_count(); ++w) counts[model.word(w)] = model.unigram_count(w);
    return UnigramTable(std::move(counts));
}

UnigramTable UnigramTable::load(std::istream& in) {
    std::unordered_map<std::string, std::uint64_t> counts;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw LoadError("expected word<TAB>count", line_no);
        const std::string field = line.substr(tab + 1);
        std::uint64_t c = 0;
        std::size_t used = 0;
        try {
            c = std::stoull(field, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != field.size()) throw LoadError("non-numeric count '" + field + "'", line_no);
        counts[line.substr(0, tab)] += c;
    }
    return UnigramTable(std::move(counts));
}

UnigramTable UnigramTable::load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open unigram table '" + path.string() + "'");
    return load(in);
}

void UnigramTable::cover(const Dictionaries& dicts) {
    std::uint64_t floor = 1;
    if (!counts_.empty()) {
        floor = std::ranges::min_element(counts_, {}, [](const auto& kv) { return kv.second; })->second;
    }
    for (const auto& w : dicts.words()) {
        if (counts_.emplace(w, floor).second) total_ += floor;
    }
}

double UnigramTable::log10_probability(std::string_view w) const {
    auto it = counts_.find(std::string(w));
    if (it == counts_.end()) throw OovError("word '" + std::string(w) + "' is not in the unigram table");
    return std::log10(static_cast<double>(it->second) / static_cast<double>(total_));
}

int osa_distance(std::string_view a, std::string_view b) {
    const auto n = a.size();
    const auto m = b.size();
    std::vector<std::vector<int>> d(n + 1, std::vector<int>(m + 1));
    for (std::size_t i = 0; i <= n; ++i) d[i][0] = static_cast<int>(i);
    for (std::size_t j = 0; j <= m; ++j) d[0][j] = static_cast<int>(j);
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            const int cost = a[i - 1] == b[j - 1] ? 0 : 1;
            d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost});
            if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1]) {
                d[i][j] = std::min(d[i][j], d[i - 2][j - 2] + 1);
            }
        }
    }
    return d[n][m];
}

ProbabilisticSegmenter::ProbabilisticSegmenter(UnigramTable table, int edit_tolerance, std::size_t min_word_len)
    : table_(std::move(table)), tolerance_(edit_tolerance), min_word_len_(min_word_len) {
    if (tolerance_ < 0) throw ConfigError("edit_tolerance must be non-negative");
    for (const auto& [w, _] : table_.counts()) {
        max_len_ = std::max(max_len_, w.size());
        if (tolerance_ == 0 || w.size() < min_word_len_) continue;
        std::unordered_set<std::string> variants{w};
        add_deletes(w, tolerance_, variants);
        for (const auto& v : variants) deletes_[v].push_back(w);
    }
    for (auto& [_, words] : deletes_) std::ranges::sort(words);
    max_len_ += static_cast<std::size_t>(tolerance_);
}

std::optional<ProbabilisticSegmenter::Match> ProbabilisticSegmenter::lookup(std::string_view segment) const {
    if (table_.contains(segment)) return Match{std::string(segment), 0, table_.log10_probability(segment)};
    if (tolerance_ == 0 || segment.size() < min_word_len_) return std::nullopt;
    std::unordered_set<std::string> variants{std::string(segment)};
    add_deletes(std::string(segment), tolerance_, variants);
    std::optional<Match> best;
    for (const auto& v : variants) {
        auto it = deletes_.find(v);
        if (it == deletes_.end()) continue;
        for (const auto& w : it->second) {
            const int e = osa_distance(segment, w);
            if (e == 0 || e > tolerance_) continue;
            const double lp = table_.log10_probability(w);
            if (!best || e < best->edits || (e == best->edits && (lp > best->log10_p ||
                                                                  (lp == best->log10_p && w < best->word)))) {
                best = Match{w, e, lp};
            }
        }
    }
    return best;
}

namespace {

struct State {
    double score = -std::numeric_limits<double>::infinity();
    std::vector<std::string> words;
    bool reached = false;
};

}  // namespace

std::optional<std::vector<std::string>> ProbabilisticSegmenter::segment(std::string_view pw) const {
    const auto runs = letter_runs(pw);
    if (runs.empty()) return std::nullopt;
    const auto layers = static_cast<std::size_t>(tolerance_) + 1;
    // carry[e]: best segmentation of the runs so far using e edits in total.
    std::vector<State> carry(layers);
    carry[0].reached = true;
    carry[0].score = 0.0;
    for (const auto& run : runs) {
        const auto n = run.size();
        std::vector<std::vector<State>> best(n + 1, std::vector<State>(layers));
        best[0] = carry;
        for (std::size_t j = 1; j <= n; ++j) {
            const std::size_t lo = j > max_len_ ? j - max_len_ : 0;
            for (std::size_t i = lo; i < j; ++i) {
                bool any = false;
                for (const auto& s : best[i]) any = any || s.reached;
                if (!any) continue;
                const auto m = lookup(std::string_view(run).substr(i, j - i));
                if (!m) continue;
                for (std::size_t e0 = 0; e0 < layers; ++e0) {
                    const auto& from = best[i][e0];
                    const auto e = e0 + static_cast<std::size_t>(m->edits);
                    if (!from.reached || e >= layers) continue;
                    const double score = from.score + m->log10_p;
                    auto& to = best[j][e];
                    if (!to.reached || score > to.score) {
                        to.reached = true;
                        to.score = score;
                        to.words = from.words;
                        to.words.push_back(m->word);
                    }
                }
            }
        }
        carry = std::move(best[n]);
    }
    for (auto& s : carry) {
        if (s.reached) return std::move(s.words);
    }
    return std::nullopt;
}

std::optional<std::vector<std::string>> ProbabilisticSegmenter::segment_run(std::string_view run) const {
    return segment(run);
}

bool accept_passphrase(const std::vector<std::string>& words, const Dictionaries& dicts, const FilterConfig& cfg) {
    std::size_t valid = 0;
    for (const auto& w : words) {
        if (w.size() >= cfg.min_word_len && dicts.contains(w)) ++valid;
    }
    return valid >= cfg.min_valid_words;
}

PassphraseMiner::PassphraseMiner(FilterConfig cfg, Dictionaries dicts, UnigramTable table)
    : cfg_(std::move(cfg)),
      dicts_(std::move(dicts)),
      prob_(covered(std::move(table), dicts_), cfg_.edit_tolerance, cfg_.min_word_len) {
    validate(cfg_);
}

SegmentationResult PassphraseMiner::process(std::string_view password) const {
    SegmentationResult r;
    r.input = std::string(password);
    r.rejected = filter_password(password, cfg_);
    if (r.rejected) return r;

    // Leading and trailing digits or symbols are decoration; digits inside
    // the remaining body mean a composite password rather than a phrase.
    std::size_t b = 0;
    std::size_t e = password.size();
    while (b < e && !is_letter(password[b])) ++b;
    while (e > b && !is_letter(password[e - 1])) --e;
    const auto body = password.substr(b, e - b);
    if (std::ranges::any_of(body, is_digit)) {
        r.rejected = RejectReason::NonPhrasal;
        return r;
    }

    if (auto g = greedy_segment(body, dicts_); g && accept_passphrase(*g, dicts_, cfg_)) {
        r.words = std::move(*g);
        return r;
    }
    if (auto p = prob_.segment(body); p && accept_passphrase(*p, dicts_, cfg_)) {
        r.words = std::move(*p);
        return r;
    }
    r.rejected = RejectReason::NonPhrasal;
    return r;
}

std::string_view record_password(std::string_view line) {
    const auto colon = line.find(':');
    return colon == std::string_view::npos ? line : line.substr(colon + 1);
}

std::string MiningSummary::to_json() const {
    nlohmann::ordered_json j;
    j["records"] = records;
    j["accepted"] = accepted;
    j["accepted_unique"] = accepted_unique();
    nlohmann::ordered_json rej = nlohmann::ordered_json::object();
    for (auto r : kAllReasons) {
        auto it = rejected.find(std::string(reason_name(r)));
        rej[std::string(reason_name(r))] = it == rejected.end() ? 0 : it->second;
    }
    j["rejected"] = rej;
    return j.dump();
}

MiningSummary mine_dump(std::istream& in, const PassphraseMiner& miner, std::vector<SegmentationResult>* results) {
    MiningSummary s;
    std::unordered_map<std::string, std::size_t> index;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++s.records;
        auto r = miner.process(record_password(line));
        if (r.accepted()) {
            ++s.accepted;
            const auto phrase = join_words(r.words);
            auto [it, fresh] = index.emplace(phrase, s.unique.size());
            if (fresh) {
                s.unique.emplace_back(phrase, 1);
            } else {
                ++s.unique[it->second].second;
            }
        } else {
            ++s.rejected[std::string(reason_name(*r.rejected))];
        }
        if (results) results->push_back(std::move(r));
    }
    if (in.bad()) throw IoError("read failure after record " + std::to_string(s.records));
    return s;
}

}  // namespace mascara
