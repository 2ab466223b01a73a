#include "mascara/attack.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>
#include <thread>

#include "mascara/error.hpp"

namespace mascara {

namespace {

constexpr std::uint32_t kPadToken = 0;
constexpr std::uint32_t kEndSymbol = 1;
constexpr std::uint32_t kFirstSymbol = 2;
constexpr std::size_t kCharAlphabet = 27;  // a-z and space

}  // namespace

// ---------------------------------------------------------------------------
// NgramModel

NgramModel NgramModel::train(NgramUnit unit, int order, std::span<const PhraseWords> phrases, double k) {
    if (unit == NgramUnit::Word && (order < 2 || order > 3)) {
        throw ConfigError("word n-gram order must be 2 or 3, got " + std::to_string(order));
    }
    if (unit == NgramUnit::Char && (order < 4 || order > 6)) {
        throw ConfigError("char n-gram order must be 4, 5 or 6, got " + std::to_string(order));
    }
    if (!(k > 0.0)) throw ConfigError("smoothing constant must be positive");
    if (phrases.empty()) throw TrainingError("attack model needs at least one training phrase");

    NgramModel m;
    m.unit_ = unit;
    m.order_ = order;
    m.k_ = k;
    if (unit == NgramUnit::Word) {
        std::vector<std::string> vocab;
        for (const auto& p : phrases)
            for (const auto& w : p) vocab.push_back(w);
        std::sort(vocab.begin(), vocab.end());
        vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
        m.symbols_ = std::move(vocab);
        for (std::uint32_t i = 0; i < m.symbols_.size(); ++i) m.vocab_.emplace(m.symbols_[i], kFirstSymbol + i);
        m.symbol_count_ = m.symbols_.size();
    } else {
        for (char c = 'a'; c <= 'z'; ++c) m.symbols_.emplace_back(1, c);
        m.symbols_.emplace_back(" ");
        m.symbol_count_ = kCharAlphabet;
    }

    const double base = static_cast<double>(m.symbol_count_ + 3);
    if (std::pow(base, order) > 9.0e18) throw ConfigError("vocabulary too large for a packed n-gram key");

    std::unordered_map<std::uint64_t, std::uint64_t> ngrams;
    const auto radix = static_cast<std::uint64_t>(m.symbol_count_ + 3);
    for (const auto& p : phrases) {
        auto tokens = m.encode(p);
        tokens.push_back(kEndSymbol);
        m.max_tokens_ = std::max(m.max_tokens_, tokens.size());
        std::vector<std::uint32_t> history(static_cast<std::size_t>(order - 1), kPadToken);
        for (auto t : tokens) {
            ++ngrams[m.context_key(history) * radix + t];
            history.erase(history.begin());
            history.push_back(t);
        }
    }
    for (auto [key, count] : ngrams) {
        auto& ctx = m.contexts_[key / radix];
        ctx.tokens.push_back(static_cast<std::uint32_t>(key % radix));
        ctx.cumulative.push_back(count);
        ctx.total += count;
    }
    for (auto& [key, ctx] : m.contexts_) {
        std::vector<std::size_t> idx(ctx.tokens.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return ctx.tokens[a] < ctx.tokens[b]; });
        std::vector<std::uint32_t> tokens;
        std::vector<std::uint64_t> cumulative;
        std::uint64_t running = 0;
        for (auto i : idx) {
            tokens.push_back(ctx.tokens[i]);
            running += ctx.cumulative[i];
            cumulative.push_back(running);
        }
        ctx.tokens = std::move(tokens);
        ctx.cumulative = std::move(cumulative);
    }
    return m;
}

std::string NgramModel::id() const {
    return (unit_ == NgramUnit::Word ? "word" : "char") + std::to_string(order_);
}

std::vector<std::uint32_t> NgramModel::encode(std::span<const std::string> phrase) const {
    const auto oov = static_cast<std::uint32_t>(symbol_count_ + 2);
    std::vector<std::uint32_t> out;
    if (unit_ == NgramUnit::Word) {
        out.reserve(phrase.size());
        for (const auto& w : phrase) {
            auto it = vocab_.find(w);
            out.push_back(it == vocab_.end() ? oov : it->second);
        }
        return out;
    }
    for (std::size_t i = 0; i < phrase.size(); ++i) {
        if (i) out.push_back(kFirstSymbol + 26);
        for (char c : phrase[i]) {
            out.push_back(c >= 'a' && c <= 'z' ? kFirstSymbol + static_cast<std::uint32_t>(c - 'a') : oov);
        }
    }
    return out;
}

std::uint64_t NgramModel::context_key(std::span<const std::uint32_t> history) const {
    const auto radix = static_cast<std::uint64_t>(symbol_count_ + 3);
    std::uint64_t key = 0;
    for (auto t : history) key = key * radix + t;
    return key;
}

const NgramModel::Context* NgramModel::find_context(std::uint64_t key) const {
    auto it = contexts_.find(key);
    return it == contexts_.end() ? nullptr : &it->second;
}

double NgramModel::log10_conditional(const Context* ctx, std::uint32_t token) const {
    std::uint64_t c = 0;
    std::uint64_t total = 0;
    if (ctx) {
        total = ctx->total;
        auto it = std::lower_bound(ctx->tokens.begin(), ctx->tokens.end(), token);
        if (it != ctx->tokens.end() && *it == token) {
            auto i = static_cast<std::size_t>(it - ctx->tokens.begin());
            c = ctx->cumulative[i] - (i ? ctx->cumulative[i - 1] : 0);
        }
    }
    const double events = static_cast<double>(symbol_count_ + 1);
    return std::log10((static_cast<double>(c) + k_) / (static_cast<double>(total) + k_ * events));
}

double NgramModel::log10_probability(std::span<const std::string> phrase) const {
    auto tokens = encode(phrase);
    tokens.push_back(kEndSymbol);
    std::vector<std::uint32_t> history(static_cast<std::size_t>(order_ - 1), kPadToken);
    double lp = 0.0;
    for (auto t : tokens) {
        lp += log10_conditional(find_context(context_key(history)), t);
        history.erase(history.begin());
        history.push_back(t);
    }
    return lp;
}

double NgramModel::sample_log10(Rng& rng, PhraseWords* out) const {
    std::vector<std::uint32_t> history(static_cast<std::size_t>(order_ - 1), kPadToken);
    std::vector<std::uint32_t> drawn;
    const std::uint64_t events = symbol_count_ + 1;
    const std::size_t cap = 4 * max_tokens_ + 64;
    double lp = 0.0;
    while (true) {
        const Context* ctx = find_context(context_key(history));
        const double total = ctx ? static_cast<double>(ctx->total) : 0.0;
        std::uint32_t token;
        if (ctx && rng.uniform01() * (total + k_ * static_cast<double>(events)) < total) {
            const std::uint64_t r = rng.uniform_index(ctx->total);
            auto it = std::upper_bound(ctx->cumulative.begin(), ctx->cumulative.end(), r);
            token = ctx->tokens[static_cast<std::size_t>(it - ctx->cumulative.begin())];
        } else {
            const std::uint64_t r = rng.uniform_index(events);
            token = r < symbol_count_ ? kFirstSymbol + static_cast<std::uint32_t>(r) : kEndSymbol;
        }
        // Forced stop for pathological walks; the truncated prefix keeps the
        // probability accumulated so far.
        if (drawn.size() >= cap) break;
        lp += log10_conditional(ctx, token);
        if (token == kEndSymbol) break;
        drawn.push_back(token);
        history.erase(history.begin());
        history.push_back(token);
    }
    if (out) {
        out->clear();
        if (unit_ == NgramUnit::Word) {
            for (auto t : drawn) out->push_back(symbols_[t - kFirstSymbol]);
        } else {
            std::string cur;
            for (auto t : drawn) {
                const auto& s = symbols_[t - kFirstSymbol];
                if (s == " ") {
                    out->push_back(std::move(cur));
                    cur.clear();
                } else {
                    cur += s;
                }
            }
            out->push_back(std::move(cur));
        }
    }
    return lp;
}

// ---------------------------------------------------------------------------
// CorpusBigramModel

CorpusBigramModel::CorpusBigramModel(std::shared_ptr<const MarkovModel> model, double k, bool include_end)
    : model_(std::move(model)), k_(k), include_end_(include_end) {
    if (!model_) throw ConfigError("corpus bigram attacker needs a model");
    if (!(k > 0.0)) throw ConfigError("smoothing constant must be positive");
    samplers_.resize(model_->id_count());
    std::vector<std::uint64_t> weights;
    for (WordId w = 0; w < model_->id_count(); ++w) {
        weights.clear();
        for (const auto& s : model_->successors(w)) weights.push_back(s.count);
        samplers_[w] = WeightedSampler(weights);
    }
}

double CorpusBigramModel::log10_step(std::optional<WordId> from, std::optional<WordId> to) const {
    if (from && to) {
        if (auto c = model_->bigram_count(*from, *to); c > 0) {
            return std::log10(static_cast<double>(c) / static_cast<double>(model_->successor_total(*from)));
        }
    }
    const double context = from ? static_cast<double>(model_->successor_total(*from)) : 0.0;
    const double events = static_cast<double>(model_->vocab_size() + 1);
    return std::log10(k_ / (context + k_ * events));
}

double CorpusBigramModel::log10_probability(std::span<const std::string> phrase) const {
    std::optional<WordId> prev = kStartId;
    double lp = 0.0;
    for (const auto& w : phrase) {
        auto id = model_->find(w);
        if (id && model_->is_sentinel(*id)) id.reset();
        lp += log10_step(prev, id);
        prev = id;
    }
    if (include_end_) lp += log10_step(prev, kEndId);
    return lp;
}

double CorpusBigramModel::sample_log10(Rng& rng, PhraseWords* out) const {
    if (samplers_[kStartId].empty()) throw GenerationError("corpus model has no sentence starts", 0);
    if (out) out->clear();
    WordId cur = kStartId;
    double lp = 0.0;
    for (std::size_t steps = 0; steps < 100'000; ++steps) {
        const auto& row = model_->successors(cur);
        const auto& next = row[samplers_[cur].sample(rng)];
        const double step = std::log10(static_cast<double>(next.count) / static_cast<double>(model_->successor_total(cur)));
        if (next.word == kEndId) {
            if (include_end_) lp += step;
            break;
        }
        lp += step;
        if (out) out->push_back(model_->word(next.word));
        cur = next.word;
    }
    return lp;
}

std::string attack_id(const AttackModel& m) {
    return std::visit([](const auto& x) { return x.id(); }, m);
}

double model_log10_probability(const AttackModel& m, std::span<const std::string> phrase) {
    if (phrase.empty()) throw DomainError("cannot score an empty phrase");
    return std::visit([&](const auto& x) { return x.log10_probability(phrase); }, m);
}

double model_probability(const AttackModel& m, std::span<const std::string> phrase) {
    return std::pow(10.0, model_log10_probability(m, phrase));
}

double sample_log10(const AttackModel& m, Rng& rng, PhraseWords* out) {
    return std::visit([&](const auto& x) { return x.sample_log10(rng, out); }, m);
}

// ---------------------------------------------------------------------------
// RankTable

double ceil_reciprocal(std::uint64_t n, double a) {
    const double nd = static_cast<double>(n);
    double m = std::ceil(1.0 / (nd * a));
    if (!(m < 0x1p52) || !(nd < 0x1p52)) return m;
    // m * n * a >= 1 decided exactly: m * n is an exact integer, and the fma
    // residual recovers the rounding error of the final product.
    auto reaches_one = [&](double mm) {
        const double mn = mm * nd;
        const double p = mn * a;
        if (p != 1.0) return p > 1.0;
        return std::fma(mn, a, -p) >= 0.0;
    };
    while (m > 1.0 && reaches_one(m - 1.0)) m -= 1.0;
    while (!reaches_one(m)) m += 1.0;
    return m;
}

RankTable RankTable::from_probabilities(std::vector<double> probs) {
    if (probs.empty()) throw DomainError("rank table needs at least one sample");
    for (double p : probs) {
        if (!(p > 0.0 && p <= 1.0)) throw DomainError("sample probability outside (0, 1]");
    }
    RankTable t;
    std::sort(probs.begin(), probs.end(), std::greater<>());
    t.log10_probs_.reserve(probs.size());
    for (double p : probs) t.log10_probs_.push_back(std::log10(p));
    t.probs_ = std::move(probs);
    t.build_ranks();
    return t;
}

RankTable RankTable::from_log10(std::vector<double> log10_probs) {
    if (log10_probs.empty()) throw DomainError("rank table needs at least one sample");
    for (double lp : log10_probs) {
        if (!(lp <= 0.0) || std::isnan(lp)) throw DomainError("sample log10 probability must be <= 0");
    }
    std::vector<double> probs;
    probs.reserve(log10_probs.size());
    for (double lp : log10_probs) probs.push_back(std::max(std::pow(10.0, lp), DBL_MIN));
    return from_probabilities(std::move(probs));
}

void RankTable::build_ranks() {
    const auto n = static_cast<std::uint64_t>(probs_.size());
    ranks_.resize(probs_.size());
    double running = 0.0;
    for (std::size_t i = 0; i < probs_.size(); ++i) {
        running += ceil_reciprocal(n, probs_[i]);
        ranks_[i] = running;
    }
}

double RankTable::rank_at(std::size_t above) const {
    if (above == 0) return 1.0;
    if (above == ranks_.size()) return ranks_.back();
    return 0.5 * (ranks_[above - 1] + ranks_[above]);
}

double RankTable::lookup(double p) const {
    if (!(p > 0.0)) throw DomainError("probability must be positive");
    auto it = std::partition_point(probs_.begin(), probs_.end(), [p](double a) { return a > p; });
    return rank_at(static_cast<std::size_t>(it - probs_.begin()));
}

double RankTable::lookup_log10(double log10_p) const {
    if (std::isnan(log10_p)) throw DomainError("log10 probability is NaN");
    auto it = std::partition_point(log10_probs_.begin(), log10_probs_.end(),
                                   [log10_p](double a) { return a > log10_p; });
    return rank_at(static_cast<std::size_t>(it - log10_probs_.begin()));
}

void RankTable::save(std::ostream& out) const {
    out << kRankTableHeader << '\n' << probs_.size() << '\n';
    char buf[64];
    for (double p : probs_) {
        std::snprintf(buf, sizeof buf, "%a", p);
        out << buf << '\n';
    }
}

RankTable RankTable::load(std::istream& in) {
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line) || line != kRankTableHeader) throw LoadError("unknown rank table header", line_no);
    ++line_no;
    if (!std::getline(in, line)) throw LoadError("missing sample count", line_no);
    char* end = nullptr;
    const unsigned long long n = std::strtoull(line.c_str(), &end, 10);
    if (line.empty() || *end != '\0' || n == 0) throw LoadError("invalid sample count", line_no);
    std::vector<double> probs;
    probs.reserve(n);
    while (probs.size() < n) {
        ++line_no;
        if (!std::getline(in, line)) throw LoadError("expected " + std::to_string(n) + " probabilities", line_no);
        const double p = std::strtod(line.c_str(), &end);
        if (line.empty() || *end != '\0' || !(p > 0.0 && p <= 1.0)) throw LoadError("invalid probability", line_no);
        if (!probs.empty() && p > probs.back()) throw LoadError("probabilities are not sorted descending", line_no);
        probs.push_back(p);
    }
    return from_probabilities(std::move(probs));
}

RankTable build_rank_table(const Log10Sampler& sampler, std::size_t n, std::uint64_t seed, unsigned workers) {
    if (n == 0) throw DomainError("rank table needs n >= 1");
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
    std::vector<std::vector<double>> chunks(workers);
    auto run = [&](unsigned w) {
        const std::size_t count = n / workers + (w < n % workers ? 1 : 0);
        Rng rng(derive_seed(seed, w));
        chunks[w].reserve(count);
        for (std::size_t i = 0; i < count; ++i) chunks[w].push_back(sampler(rng));
    };
    if (workers == 1) {
        run(0);
    } else {
        std::vector<std::jthread> threads;
        for (unsigned w = 0; w < workers; ++w) threads.emplace_back(run, w);
    }
    std::vector<double> all;
    all.reserve(n);
    for (auto& c : chunks) all.insert(all.end(), c.begin(), c.end());
    return RankTable::from_log10(std::move(all));
}

RankTable build_rank_table(const AttackModel& model, std::size_t n, std::uint64_t seed, unsigned workers) {
    return build_rank_table([&model](Rng& rng) { return sample_log10(model, rng); }, n, seed, workers);
}

double lookup_rank(const RankTable& table, double p) { return table.lookup(p); }

// ---------------------------------------------------------------------------
// Template attack and min-auto

double template_attack_rank(std::span<const double> capacities, std::size_t source, double position, Rng& rng) {
    if (source >= capacities.size()) throw DomainError("unknown source template " + std::to_string(source));
    if (!(position >= 0.0 && position < capacities[source])) {
        throw DomainError("position outside the source template's capacity");
    }
    std::vector<std::size_t> order(capacities.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    double enumerated = 0.0;
    for (std::size_t t = 0; t < order.size(); ++t) {
        const auto pick = t + static_cast<std::size_t>(rng.uniform_index(order.size() - t));
        std::swap(order[t], order[pick]);
        if (order[t] == source) break;
        enumerated += capacities[order[t]];
    }
    return enumerated + position + 1.0;
}

double template_attack_rank(std::span<const double> capacities, std::size_t source, double position,
                            std::uint64_t seed) {
    Rng rng(seed);
    return template_attack_rank(capacities, source, position, rng);
}

GuessRankEstimate min_auto(const std::map<std::string, double>& estimates) {
    if (estimates.empty()) throw DomainError("min-auto needs at least one model estimate");
    GuessRankEstimate out;
    out.per_model = estimates;
    out.min_auto = std::numeric_limits<double>::infinity();
    for (const auto& [id, rank] : estimates) out.min_auto = std::min(out.min_auto, rank);
    out.log10_min = std::log10(out.min_auto);
    return out;
}

void AttackEnsemble::add(AttackModel model, RankTable table) {
    entries_.push_back({std::move(model), std::move(table)});
}

void AttackEnsemble::add(AttackModel model, std::size_t samples, std::uint64_t seed, unsigned workers) {
    auto table = build_rank_table(model, samples, seed, workers);
    add(std::move(model), std::move(table));
}

std::map<std::string, double> AttackEnsemble::ranks(std::span<const std::string> phrase) const {
    std::map<std::string, double> out;
    for (const auto& e : entries_) {
        out[attack_id(e.model)] = e.table.lookup_log10(model_log10_probability(e.model, phrase));
    }
    return out;
}

AttackEnsemble standard_ensemble(std::span<const PhraseWords> training, std::shared_ptr<const MarkovModel> corpus,
                                 const EnsembleOptions& opts) {
    AttackEnsemble ensemble;
    std::uint64_t stream = 0;
    for (int order : {2, 3}) {
        ensemble.add(NgramModel::train(NgramUnit::Word, order, training, opts.smoothing), opts.rank_samples,
                     derive_seed(opts.seed, stream++), opts.workers);
    }
    for (int order : {4, 5, 6}) {
        ensemble.add(NgramModel::train(NgramUnit::Char, order, training, opts.smoothing), opts.rank_samples,
                     derive_seed(opts.seed, stream++), opts.workers);
    }
    if (corpus) {
        ensemble.add(CorpusBigramModel(std::move(corpus), opts.smoothing, opts.include_end_transition),
                     opts.rank_samples, derive_seed(opts.seed, stream++), opts.workers);
    }
    return ensemble;
}

}  // namespace mascara
