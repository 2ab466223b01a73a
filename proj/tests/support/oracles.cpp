#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/multiprecision/cpp_int.hpp>

#include "mascara/corpus.hpp"
#include "mascara/memorability.hpp"

namespace mascara::testing {

namespace mp = boost::multiprecision;

std::uint64_t exact_ceil_reciprocal(std::uint64_t n, double a) {
    if (!(a > 0.0)) throw std::invalid_argument("a must be positive");
    // a = m * 2^e with integer m.
    int e = 0;
    const double frac = std::frexp(a, &e);
    auto m = static_cast<std::int64_t>(std::ldexp(frac, 53));
    e -= 53;
    // 1 / (n * m * 2^e) = 2^-e / (n * m)
    mp::cpp_int num = 1, den = mp::cpp_int(n) * m;
    if (e < 0)
        num <<= -e;
    else
        den <<= e;
    mp::cpp_int q = num / den;
    if (q * den != num) q += 1;
    return q.convert_to<std::uint64_t>();
}

ToyChain::ToyChain(std::size_t vocab, std::size_t length, std::uint64_t seed, double skew)
    : vocab_(vocab), length_(length) {
    Rng rng(seed);
    auto weights = [&] {
        std::vector<double> w(vocab_);
        double sum = 0.0;
        for (auto& x : w) {
            x = std::pow(rng.uniform01() + 1e-3, skew);
            sum += x;
        }
        for (auto& x : w) x /= sum;
        return w;
    };
    init_ = weights();
    for (std::size_t i = 0; i < vocab_; ++i) trans_.push_back(weights());
}

std::size_t ToyChain::outcomes() const {
    std::size_t n = 1;
    for (std::size_t i = 0; i < length_; ++i) n *= vocab_;
    return n;
}

double ToyChain::probability(std::span<const std::size_t> x) const {
    double p = init_[x[0]];
    for (std::size_t i = 1; i < x.size(); ++i) p *= trans_[x[i - 1]][x[i]];
    return p;
}

std::vector<std::size_t> ToyChain::sample(Rng& rng) const {
    auto draw = [&](const std::vector<double>& w) {
        double u = rng.uniform01();
        for (std::size_t i = 0; i + 1 < w.size(); ++i) {
            if (u < w[i]) return i;
            u -= w[i];
        }
        return w.size() - 1;
    };
    std::vector<std::size_t> x{draw(init_)};
    while (x.size() < length_) x.push_back(draw(trans_[x.back()]));
    return x;
}

std::vector<double> ToyChain::enumerate() const {
    std::vector<double> out;
    out.reserve(outcomes());
    std::vector<std::size_t> x(length_, 0);
    for (std::size_t k = 0; k < outcomes(); ++k) {
        std::size_t r = k;
        for (std::size_t i = length_; i-- > 0;) {
            x[i] = r % vocab_;
            r /= vocab_;
        }
        out.push_back(probability(x));
    }
    return out;
}

double true_rank(std::span<const double> all_probs, double p) {
    return 1.0 + static_cast<double>(std::ranges::count_if(all_probs, [&](double q) { return q > p; }));
}

std::optional<double> exhaustive_best_split(const UnigramTable& table, const std::string& run) {
    const std::size_t n = run.size();
    if (n == 0 || n > 20) throw std::invalid_argument("run length out of range");
    std::optional<double> best;
    // Bit i set: cut after character i.
    for (std::uint32_t mask = 0; mask < (1u << (n - 1)); ++mask) {
        double score = 0.0;
        bool ok = true;
        std::size_t start = 0;
        for (std::size_t i = 0; i < n && ok; ++i) {
            if (i + 1 == n || (mask >> i & 1u)) {
                const auto piece = run.substr(start, i + 1 - start);
                if (!table.contains(piece)) {
                    ok = false;
                } else {
                    score += table.log10_probability(piece);
                }
                start = i + 1;
            }
        }
        if (ok && (!best || score > *best)) best = score;
    }
    return best;
}

double split_score(const UnigramTable& table, const std::vector<std::string>& words) {
    double s = 0.0;
    for (const auto& w : words) s += table.log10_probability(w);
    return s;
}

std::vector<std::string> mascara_violations(const MarkovModel& model, const GenerationConfig& cfg, double theta2,
                                            const std::vector<std::string>& words) {
    std::vector<std::string> v;
    if (words.size() != cfg.length) v.push_back("length " + std::to_string(words.size()));
    if (words.empty()) return v;
    if (cfg.stopwords.contains(words.front())) v.push_back("first word is a stopword: " + words.front());
    if (cfg.stopwords.contains(words.back())) v.push_back("last word is a stopword: " + words.back());
    for (std::size_t i = 1; i < words.size(); ++i) {
        const auto a = model.find(words[i - 1]);
        const auto b = model.find(words[i]);
        if (!a || !b || model.bigram_count(*a, *b) == 0) {
            v.push_back("not a corpus bigram: " + words[i - 1] + " " + words[i]);
            continue;
        }
        // L2 recomputed from raw counts.
        const double l2 = std::log10(static_cast<double>(model.bigram_count(*a, *b)) /
                                     static_cast<double>(model.successor_total(*a)));
        if (l2 > theta2) v.push_back("L2 above theta2 at " + words[i - 1] + " " + words[i]);
        // S recomputed from its definition.
        const double l1 = std::log10(static_cast<double>(model.unigram_count(*b)) /
                                     static_cast<double>(model.total_words()));
        const std::span<const std::string> prefix(words.data(), i + 1);
        const double s = cfg.cer_coeffs.alpha1 * l1 + cfg.cer_coeffs.alpha2 * l2 +
                         cfg.cer_coeffs.alpha3 * sigma_chr(prefix);
        if (s > cfg.theta1) v.push_back("S above theta1 at prefix of length " + std::to_string(i + 1));
    }
    const auto last = model.find(words.back());
    if (!last || model.bigram_count(*last, kEndId) == 0) v.push_back("last word cannot end a sentence");
    return v;
}

FilterAtEndResult mascara_end(const MarkovGenerator& markov, const MarkovModel& model, const GenerationConfig& cfg,
                              double theta2, Rng& rng, std::size_t max_drafts) {
    FilterAtEndResult r;
    for (; r.rejected < max_drafts; ++r.rejected) {
        auto draft = markov.generate(cfg.length, rng);
        if (mascara_violations(model, cfg, theta2, draft.words).empty()) {
            r.phrase = std::move(draft);
            r.phrase.source = "mascara_end";
            return r;
        }
    }
    throw GenerationError("filter-at-end found no phrase", r.rejected);
}

MarkovModel toy_model() { return MarkovModel::train(clean_corpus("Red Fox runs fast. red fox sleeps!")); }

}  // namespace mascara::testing
