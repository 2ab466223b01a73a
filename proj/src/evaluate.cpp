#include "mascara/evaluate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <set>

#include <json.hpp>

#include "mascara/error.hpp"

namespace mascara {

namespace {

constexpr std::uint64_t kDicewareStream = 1;
constexpr std::uint64_t kTemplateStream = 2;
constexpr std::uint64_t kMarkovStream = 3;
constexpr std::uint64_t kMascaraStream = 4;
constexpr std::uint64_t kUserStream = 5;
constexpr std::uint64_t kTrainingStream = 0x747261696e;
constexpr std::uint64_t kEnsembleStream = 0x61747461636b;
constexpr std::uint64_t kTemplateAttackStream = 0x74706c;

std::uint64_t system_stream(const std::string& name) {
    if (name == "diceware") return kDicewareStream;
    if (name == "templatedice") return kTemplateStream;
    if (name == "markov") return kMarkovStream;
    if (name == "mascara") return kMascaraStream;
    if (name == "user") return kUserStream;
    throw ConfigError("unknown system '" + name + "'");
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

// Lengths drawn from `explicit_lengths` cycled, or by uniform template
// choice; the template draws are returned too so TemplateDice can reuse them.
std::vector<std::size_t> draw_lengths(const SystemSet& systems, std::size_t count, std::uint64_t seed,
                                      const std::vector<std::size_t>& explicit_lengths,
                                      std::vector<TemplateDraw>* draws) {
    std::vector<std::size_t> lengths(count);
    if (!explicit_lengths.empty()) {
        for (std::size_t i = 0; i < count; ++i) lengths[i] = explicit_lengths[i % explicit_lengths.size()];
        for (auto l : explicit_lengths)
            if (l == 0) throw ConfigError("passphrase length must be at least 1");
        return lengths;
    }
    if (!systems.templates) throw ConfigError("no template set to draw phrase lengths from; give explicit lengths");
    const std::uint64_t s = derive_seed(seed, kTemplateStream);
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng(derive_seed(s, i));
        auto d = template_dice_any(*systems.templates, rng);
        lengths[i] = d.phrase.words.size();
        if (draws) draws->push_back(std::move(d));
    }
    return lengths;
}

SystemSample generate_system(const SystemSet& systems, const std::string& name, const std::vector<std::size_t>& lengths,
                             std::uint64_t seed, std::vector<TemplateDraw>* template_draws) {
    SystemSample out;
    const std::uint64_t s = derive_seed(seed, system_stream(name));
    const std::size_t count = lengths.size();
    out.phrases.reserve(count);
    if (name == "diceware") {
        for (std::size_t i = 0; i < count; ++i) {
            Rng rng(derive_seed(s, i));
            out.phrases.push_back(diceware(systems.diceware_words, lengths[i], rng));
        }
    } else if (name == "templatedice") {
        for (std::size_t i = 0; i < count; ++i) {
            TemplateDraw d;
            if (template_draws && !template_draws->empty()) {
                d = std::move((*template_draws)[i]);
            } else {
                Rng rng(derive_seed(s, i));
                d = template_dice(*systems.templates, lengths[i], rng);
            }
            out.phrases.push_back(std::move(d.phrase));
            out.template_index.push_back(d.template_index);
            out.template_position.push_back(d.position);
        }
    } else if (name == "markov") {
        MarkovGenerator gen(*systems.model, systems.mascara.max_restarts);
        for (std::size_t i = 0; i < count; ++i) {
            Rng rng(derive_seed(s, i));
            out.phrases.push_back(gen.generate(lengths[i], rng));
        }
    } else if (name == "mascara") {
        MascaraGenerator gen(*systems.model, systems.mascara);
        for (std::size_t i = 0; i < count; ++i) {
            Rng rng(derive_seed(s, i));
            out.phrases.push_back(gen.generate(lengths[i], rng));
        }
    } else {
        throw ConfigError("system '" + name + "' is not generated");
    }
    return out;
}

// Up to `count` user phrases, a uniformly random subset when there are more.
SystemSample sample_user(const SystemSet& systems, std::size_t count, std::uint64_t seed) {
    std::vector<std::size_t> idx(systems.user_phrases.size());
    std::iota(idx.begin(), idx.end(), 0);
    if (idx.size() > count) {
        Rng rng(derive_seed(seed, kUserStream));
        for (std::size_t i = 0; i < count; ++i) std::swap(idx[i], idx[i + rng.uniform_index(idx.size() - i)]);
        idx.resize(count);
        std::ranges::sort(idx);
    }
    SystemSample out;
    for (auto i : idx) out.phrases.push_back({systems.user_phrases[i], "user", std::nullopt});
    return out;
}

double quantile_sorted(const std::vector<double>& v, double q) {
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] + (v[hi] - v[lo]) * frac;
}

}  // namespace

std::vector<std::string> SystemSet::names() const {
    std::vector<std::string> out;
    if (!diceware_words.empty()) out.push_back("diceware");
    if (model) {
        out.push_back("markov");
        out.push_back("mascara");
    }
    if (templates) out.push_back("templatedice");
    if (!user_phrases.empty()) out.push_back("user");
    return out;
}

TestSamples build_test_samples(const SystemSet& systems, std::size_t count, std::uint64_t seed,
                               const std::vector<std::size_t>& lengths) {
    if (count == 0) throw ConfigError("sample count must be at least 1");
    std::vector<TemplateDraw> draws;
    const auto drawn = draw_lengths(systems, count, seed, lengths, &draws);
    TestSamples out;
    for (const auto& name : systems.names()) {
        if (name == "user") {
            out[name] = sample_user(systems, count, seed);
        } else {
            out[name] = generate_system(systems, name, drawn, seed, &draws);
        }
    }
    return out;
}

std::vector<PhraseWords> training_phrases(const SystemSet& systems, const std::string& system, std::size_t count,
                                          std::uint64_t seed, const std::vector<std::size_t>& lengths) {
    if (system == "user") return systems.user_phrases;
    const std::uint64_t s = derive_seed(seed, kTrainingStream);
    std::vector<TemplateDraw> draws;
    const auto drawn = draw_lengths(systems, count, s, lengths, system == "templatedice" ? &draws : nullptr);
    auto sample = generate_system(systems, system, drawn, s, &draws);
    std::vector<PhraseWords> out;
    out.reserve(sample.phrases.size());
    for (auto& p : sample.phrases) out.push_back(std::move(p.words));
    return out;
}

std::vector<double> deciles(std::vector<double> values) {
    if (values.empty()) throw DomainError("quantiles of an empty sample");
    std::ranges::sort(values);
    std::vector<double> out(kQuantileCount);
    for (std::size_t i = 0; i < kQuantileCount; ++i)
        out[i] = quantile_sorted(values, static_cast<double>(i) / static_cast<double>(kQuantileCount - 1));
    return out;
}

double median(std::vector<double> values) {
    if (values.empty()) throw DomainError("median of an empty sample");
    std::ranges::sort(values);
    return quantile_sorted(values, 0.5);
}

SystemScores score_sample(const SystemSample& sample, const AttackEnsemble& ensemble, const MarkovModel& cer_model,
                          const CerCoefficients& coeffs, const TemplateSet* templates, std::uint64_t seed) {
    SystemScores out;
    const bool with_templates = templates && sample.template_index.size() == sample.phrases.size();
    const auto caps = templates ? templates->capacities() : std::vector<double>{};
    const double floor = default_oov_floor(cer_model);
    for (std::size_t i = 0; i < sample.phrases.size(); ++i) {
        const auto& words = sample.phrases[i].words;
        auto ranks = ensemble.ranks(words);
        if (with_templates) {
            ranks["template"] = template_attack_rank(caps, sample.template_index[i], sample.template_position[i],
                                                     derive_seed(seed, i));
        }
        out.lengths.push_back(words.size());
        out.cer.push_back(estimate_cer(coeffs, phrase_features(cer_model, words, floor)).value);
        out.log10_rank.push_back(min_auto(ranks).log10_min);
    }
    return out;
}

EvaluationReport summarize(const std::map<std::string, SystemScores>& scores) {
    EvaluationReport report;
    report.scores = scores;
    for (const auto& [name, s] : scores) {
        if (s.cer.empty()) throw DomainError("system '" + name + "' has no scored phrases");
        SystemSummary sum;
        sum.phrases = s.cer.size();
        sum.mean_length = std::accumulate(s.lengths.begin(), s.lengths.end(), 0.0) / static_cast<double>(sum.phrases);
        sum.cer_quantiles = deciles(s.cer);
        sum.log10_rank_quantiles = deciles(s.log10_rank);
        sum.cer_median = median(s.cer);
        sum.log10_rank_median = median(s.log10_rank);
        report.systems[name] = std::move(sum);
    }
    // Generated systems share one length per phrase; count them once.
    for (const auto& [name, s] : scores) {
        if (name == "user") continue;
        for (auto l : s.lengths) ++report.length_histogram[l];
        break;
    }

    auto has = [&](const std::string& n) { return report.systems.contains(n); };
    auto check = [&](const std::string& metric, const std::string& figure, const std::string& a,
                     const std::string& op, const std::string& b) {
        if (!has(a) || !has(b)) return;
        const bool cer = metric == "cer_median";
        const double va = cer ? report.systems[a].cer_median : report.systems[a].log10_rank_median;
        const double vb = cer ? report.systems[b].cer_median : report.systems[b].log10_rank_median;
        bool pass = false;
        if (op == ">") pass = va > vb;
        if (op == ">=") pass = va >= vb;
        if (op == "<") pass = va < vb;
        report.orderings.push_back(
            {metric, figure, a + " " + op + " " + b, a + " " + fmt(va) + ", " + b + " " + fmt(vb), pass});
    };

    check("log10_guessrank_median", "gr-all", "diceware", ">", "mascara");
    check("log10_guessrank_median", "gr-all", "mascara", ">=", "markov");
    for (const char* other : {"mascara", "markov", "templatedice"}) check("cer_median", "cer-new", "diceware", ">", other);
    for (const char* other : {"diceware", "markov", "mascara", "templatedice"}) {
        check("cer_median", "cer-new", "user", "<", other);
        check("log10_guessrank_median", "gr-all", "user", "<", other);
    }
    return report;
}

EvaluationReport evaluate(const SystemSet& systems, const TestSamples& samples, const EvaluateOptions& opts) {
    if (!systems.model) throw ConfigError("evaluation needs a corpus model");
    if (samples.empty()) throw ConfigError("no samples to evaluate");
    std::map<std::string, SystemScores> scores;
    for (const auto& [name, sample] : samples) {
        if (sample.phrases.empty()) throw ConfigError("system '" + name + "' has an empty sample");
        auto training = training_phrases(systems, name, opts.training_count, opts.seed, opts.lengths);
        if (name == "user") {
            std::set<PhraseWords> test;
            for (const auto& p : sample.phrases) test.insert(p.words);
            std::vector<PhraseWords> rest;
            for (auto& p : training)
                if (!test.contains(p)) rest.push_back(std::move(p));
            if (!rest.empty()) training = std::move(rest);
            else training = systems.user_phrases;
        }
        EnsembleOptions eo;
        eo.rank_samples = opts.rank_samples;
        eo.seed = derive_seed(derive_seed(opts.seed, kEnsembleStream), system_stream(name));
        eo.smoothing = opts.smoothing;
        eo.workers = opts.workers;
        const auto ensemble = standard_ensemble(training, systems.model, eo);
        const TemplateSet* tmpl = name == "templatedice" ? systems.templates.get() : nullptr;
        scores[name] = score_sample(sample, ensemble, *systems.model, opts.cer_coeffs, tmpl,
                                    derive_seed(opts.seed, kTemplateAttackStream));
    }
    auto report = summarize(scores);
    auto& m = report.metadata;
    m["training_count"] = std::to_string(opts.training_count);
    m["rank_samples"] = std::to_string(opts.rank_samples);
    m["seed"] = std::to_string(opts.seed);
    m["workers"] = std::to_string(opts.workers);
    m["smoothing"] = fmt(opts.smoothing);
    if (systems.model) {
        m["corpus_tokens"] = std::to_string(systems.model->total_words());
        m["corpus_vocab"] = std::to_string(systems.model->vocab_size());
        m["theta1"] = fmt(systems.mascara.theta1);
        m["theta2"] = fmt(systems.mascara.theta2.value_or(default_theta2(*systems.model)));
    }
    if (!systems.diceware_words.empty()) m["diceware_words"] = std::to_string(systems.diceware_words.size());
    if (systems.templates) m["templates"] = std::to_string(systems.templates->templates().size());
    return report;
}

bool EvaluationReport::all_pass() const {
    return std::ranges::all_of(orderings, [](const OrderingCheck& c) { return c.pass; });
}

std::string EvaluationReport::to_json() const {
    nlohmann::ordered_json j;
    j["metadata"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : metadata) j["metadata"][k] = v;
    j["metadata"]["quantile_levels"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < kQuantileCount; ++i)
        j["metadata"]["quantile_levels"].push_back(static_cast<double>(i) / static_cast<double>(kQuantileCount - 1));
    j["length_distribution"] = nlohmann::ordered_json::object();
    for (const auto& [len, n] : length_histogram) j["length_distribution"][std::to_string(len)] = n;
    j["systems"] = nlohmann::ordered_json::object();
    for (const auto& [name, s] : systems) {
        nlohmann::ordered_json e;
        e["phrases"] = s.phrases;
        e["mean_length"] = s.mean_length;
        e["cer_median"] = s.cer_median;
        e["cer_quantiles"] = s.cer_quantiles;
        e["log10_guessrank_median"] = s.log10_rank_median;
        e["log10_guessrank_quantiles"] = s.log10_rank_quantiles;
        if (s.timing_seconds_per_1000) e["timing_seconds_per_1000"] = *s.timing_seconds_per_1000;
        j["systems"][name] = std::move(e);
    }
    j["orderings"] = nlohmann::ordered_json::array();
    for (const auto& c : orderings) {
        j["orderings"].push_back({{"metric", c.metric},
                                  {"figure", c.figure},
                                  {"expected", c.expected},
                                  {"observed", c.observed},
                                  {"pass", c.pass}});
    }
    j["all_orderings_pass"] = all_pass();
    return j.dump(2) + "\n";
}

void EvaluationReport::write_csv(std::ostream& out) const {
    out << "system,length,cer,log10_rank\n";
    char buf[96];
    for (const auto& [name, s] : scores) {
        for (std::size_t i = 0; i < s.cer.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%zu,%.10g,%.10g\n", s.lengths[i], s.cer[i], s.log10_rank[i]);
            out << name << ',' << buf;
        }
    }
}

std::map<std::size_t, double> plateau_probe(const TemplateSet& templates, const std::vector<std::size_t>& lengths,
                                            std::size_t probes, std::uint64_t seed) {
    if (probes == 0) throw ConfigError("probe count must be at least 1");
    const auto caps = templates.capacities();
    std::map<std::size_t, double> out;
    for (auto len : lengths) {
        const std::uint64_t s = derive_seed(seed, len);
        double sum = 0.0;
        for (std::size_t j = 0; j < probes; ++j) {
            Rng rng(derive_seed(s, 2 * j));
            const auto d = template_dice(templates, len, rng);
            sum += std::log10(template_attack_rank(caps, d.template_index, d.position, derive_seed(s, 2 * j + 1)));
        }
        out[len] = sum / static_cast<double>(probes);
    }
    return out;
}

std::map<std::size_t, double> diceware_probe(std::size_t wordlist_size, const std::vector<std::size_t>& lengths,
                                             std::size_t probes, std::uint64_t seed) {
    if (probes == 0) throw ConfigError("probe count must be at least 1");
    if (wordlist_size == 0) throw ConfigError("diceware wordlist is empty");
    std::map<std::size_t, double> out;
    for (auto len : lengths) {
        if (len == 0) throw ConfigError("passphrase length must be at least 1");
        const double log10_total = static_cast<double>(len) * std::log10(static_cast<double>(wordlist_size));
        Rng rng(derive_seed(seed, len));
        double sum = 0.0;
        for (std::size_t j = 0; j < probes; ++j) {
            if (log10_total < 15.0) {
                // Exact while the phrase count fits in the double mantissa.
                const double total = std::round(std::pow(static_cast<double>(wordlist_size), static_cast<double>(len)));
                const double rank = static_cast<double>(rng.uniform_index(static_cast<std::uint64_t>(total))) + 1.0;
                sum += std::log10(rank);
            } else {
                const double u = (static_cast<double>(rng.next() >> 11) + 1.0) * 0x1.0p-53;
                sum += log10_total + std::log10(u);
            }
        }
        out[len] = sum / static_cast<double>(probes);
    }
    return out;
}

std::map<std::string, double> time_generation(const SystemSet& systems, std::size_t count, std::uint64_t seed,
                                              std::size_t length, std::size_t repeats) {
    if (count == 0) throw ConfigError("count must be at least 1");
    if (repeats == 0) throw ConfigError("repeats must be at least 1");
    std::map<std::string, double> out;
    const std::vector<std::size_t> lengths(count, length);
    for (const auto& name : systems.names()) {
        if (name == "user") continue;
        std::vector<double> runs;
        for (std::size_t r = 0; r < repeats; ++r) {
            const auto t0 = std::chrono::steady_clock::now();
            auto sample = generate_system(systems, name, lengths, derive_seed(seed, r), nullptr);
            const auto t1 = std::chrono::steady_clock::now();
            if (sample.phrases.size() != count) throw std::logic_error("short sample");
            runs.push_back(std::chrono::duration<double>(t1 - t0).count());
        }
        out[name] = median(runs);
    }
    return out;
}

}  // namespace mascara
