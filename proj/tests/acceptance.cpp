// Acceptance run: one PASS/FAIL line per criterion; exits non-zero if any
// criterion fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "mascara/attack.hpp"
#include "mascara/corpus.hpp"
#include "mascara/evaluate.hpp"
#include "mascara/generate.hpp"
#include "mascara/memorability.hpp"
#include "mascara/segment.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace mascara;
namespace oracle = mascara::testing;
using Clock = std::chrono::steady_clock;
using Words = std::vector<std::string>;

namespace {

const fs::path kData = MASCARA_DATA_DIR;
const fs::path kDeskModel = MASCARA_DESK_MODEL;
const fs::path kFixtures = MASCARA_FIXTURE_DIR;
const std::string kCli = MASCARA_CLI_PATH;

// Desk-scale bigram ceiling; see README for why the library default is not
// used here.
constexpr double kDeskTheta2 = -1.0;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int digits = 3) {
    std::ostringstream s;
    s.precision(digits);
    s << std::fixed << v;
    return s.str();
}

const MarkovModel& desk_model() {
    static const MarkovModel m = MarkovModel::load_file(kDeskModel.string());
    return m;
}

const StopwordSet& stopwords() {
    static const StopwordSet s = load_stopwords(kData / "stopwords.txt");
    return s;
}

// --- 1 --------------------------------------------------------------------

Outcome rank_table_exactness() {
    Rng rng(101);
    std::size_t mismatches = 0, checked = 0;
    for (int a = 0; a < 1000; ++a) {
        std::vector<double> probs(1 + rng.uniform_index(500));
        for (auto& p : probs) {
            // Mix magnitudes and exact dyadic values.
            p = rng.uniform_index(4) == 0 ? std::ldexp(1.0, -static_cast<int>(rng.uniform_index(40)))
                                          : std::pow(10.0, -15.0 * rng.uniform01());
        }
        const auto t = RankTable::from_probabilities(probs);
        const auto n = static_cast<std::uint64_t>(t.size());
        std::uint64_t running = 0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            running += oracle::exact_ceil_reciprocal(n, t.probs()[i]);
            ++checked;
            if (t.ranks()[i] != static_cast<double>(running)) ++mismatches;
        }
    }
    return {mismatches == 0, std::to_string(checked) + " entries over 1000 arrays, " + std::to_string(mismatches) +
                                 " mismatches"};
}

// --- 2 --------------------------------------------------------------------

int close_targets(const oracle::ToyChain& chain, std::uint64_t seed, std::size_t n) {
    const auto all = chain.enumerate();
    const auto table = build_rank_table(
        [&](Rng& r) {
            const auto x = chain.sample(r);
            return std::log10(chain.probability(x));
        },
        n, seed, 1);
    Rng rng(derive_seed(seed, 1));
    int close = 0;
    for (int i = 0; i < 100; ++i) {
        const auto x = chain.sample(rng);
        const double p = chain.probability(x);
        close += std::abs(std::log10(table.lookup(p)) - std::log10(oracle::true_rank(all, p))) <= 0.5;
    }
    return close;
}

Outcome monte_carlo_vs_enumeration() {
    // 10 symbols, length 5: 1e5 enumerable outcomes.
    const oracle::ToyChain chain(10, 5, 202, 0.25);
    const int close = close_targets(chain, 203, 100'000);
    std::string detail = std::to_string(close) + "/100 targets within 0.5 log10";
    // Heavier skew puts targets where n * p > 1; the ceiled terms then
    // overcount. Reported, not asserted.
    for (double skew : {1.0, 2.0}) {
        const oracle::ToyChain heavy(10, 5, 202, skew);
        detail += "; skew " + fmt(skew, 1) + ": " + std::to_string(close_targets(heavy, 203, 100'000)) + "/100";
    }
    return {close >= 90, detail};
}

// --- 3 --------------------------------------------------------------------

Outcome cer_exactness() {
    const auto m = oracle::toy_model();
    const double a1 = -3.42e-2, a2 = -6.46e-3, a3 = 1.19e-4;
    struct Case {
        Words words;
        double expected;
    };
    // Hand counts on "red fox runs fast. red fox sleeps": 7 tokens.
    const std::vector<Case> cases = {
        {{"red", "fox"}, a1 * 2 * std::log10(2.0 / 7.0)},
        {{"fox", "runs"}, a1 * (std::log10(2.0 / 7.0) + std::log10(1.0 / 7.0)) + a2 * std::log10(0.5) + a3 * 0.5},
        {{"red", "fox", "sleeps"},
         a1 * (2 * std::log10(2.0 / 7.0) + std::log10(1.0 / 7.0)) + a2 * std::log10(0.5) + a3 * std::sqrt(2.0)},
    };
    double worst = 0.0;
    for (const auto& c : cases) {
        const double got = estimate_cer(kPublishedCerCoefficients, phrase_features(m, c.words)).value;
        worst = std::max(worst, std::abs(got - c.expected));
    }

    Rng rng(303);
    std::vector<FitSample> s;
    for (int i = 0; i < 200; ++i) {
        CerFeatures f{-30 * rng.uniform01(), -20 * rng.uniform01(), 4 * rng.uniform01()};
        s.push_back({f, -0.05 * f.l1_sum + 0.02 * f.l2_sum - 0.3 * f.sigma_chr});
    }
    const auto fit = fit_cer_coefficients(s);
    const double coef_err = std::max({std::abs(fit.coefficients.alpha1 + 0.05), std::abs(fit.coefficients.alpha2 - 0.02),
                                      std::abs(fit.coefficients.alpha3 + 0.3)});
    const bool pass = worst <= 1e-9 && coef_err <= 1e-6 && fit.r_squared >= 1.0 - 1e-9;
    std::ostringstream d;
    d.precision(3);
    d << "fixture error " << std::scientific << worst << ", coefficient error " << coef_err << ", 1 - R^2 "
      << 1.0 - fit.r_squared;
    return {pass, d.str()};
}

// --- 4 --------------------------------------------------------------------

Outcome mascara_constraints() {
    const auto t0 = Clock::now();
    const auto& model = desk_model();
    std::size_t violations = 0;
    std::string first;
    for (std::size_t length = 3; length <= 8; ++length) {
        GenerationConfig cfg;
        cfg.length = length;
        cfg.theta2 = kDeskTheta2;
        cfg.stopwords = stopwords();
        const MascaraGenerator gen(model, cfg);
        // 1000 phrases spread over lengths 3 to 8.
        const std::size_t count = length <= 4 ? 167 : 166;
        for (std::size_t i = 0; i < count; ++i) {
            Rng rng(derive_seed(derive_seed(404, length), i));
            const auto p = gen.generate(rng);
            const auto v = oracle::mascara_violations(model, cfg, kDeskTheta2, p.words);
            violations += v.size();
            if (!v.empty() && first.empty()) first = p.text() + ": " + v.front();
        }
    }
    const double secs = seconds_since(t0);
    std::string detail = "1000 phrases, lengths 3-8, theta2 " + fmt(kDeskTheta2, 1) + ", " +
                         std::to_string(violations) + " violations, " + fmt(secs, 2) + " s";
    if (!first.empty()) detail += " (first: " + first + ")";
    return {violations == 0 && secs < 30.0, detail};
}

// --- 5 --------------------------------------------------------------------

Outcome orderings() {
    const auto t0 = Clock::now();
    SystemSet sys;
    sys.model = std::make_shared<const MarkovModel>(desk_model());
    sys.diceware_words = load_word_file(kData / "wordlists" / "diceware.txt");
    sys.templates = std::make_shared<const TemplateSet>(TemplateSet::load(kData / "templates" / "templates.txt"));
    sys.mascara.theta2 = kDeskTheta2;
    sys.mascara.stopwords = stopwords();
    const char* user_file = std::getenv("MASCARA_USER_PHRASES");
    if (user_file && *user_file) {
        std::ifstream in(user_file);
        std::string line;
        while (std::getline(in, line)) {
            auto w = normalize_phrase(line);
            if (!w.empty()) sys.user_phrases.push_back(std::move(w));
        }
    }
    EvaluateOptions opts;
    const auto samples = build_test_samples(sys, 1000, opts.seed);
    const auto report = evaluate(sys, samples, opts);
    const double secs = seconds_since(t0);

    std::string detail;
    for (const auto& o : report.orderings) {
        detail += (detail.empty() ? "" : "; ") + o.metric + " " + o.observed + (o.pass ? "" : " [FAILED " + o.expected + "]");
    }
    if (sys.user_phrases.empty()) detail += "; no user phrases given";
    detail += "; " + fmt(secs, 1) + " s";
    return {report.all_pass() && !report.orderings.empty() && secs < 900.0, detail};
}

// --- 6 --------------------------------------------------------------------

Outcome plateau() {
    const auto templates = TemplateSet::load(kData / "templates" / "templates.txt");
    const auto lengths = templates.lengths();
    const std::size_t largest = lengths.back();
    const auto tp = plateau_probe(templates, {8, largest}, 1000, 606);
    const auto six = load_word_file(kData / "wordlists" / "six.txt");
    const auto dp = diceware_probe(six.size(), {8, largest}, 1000, 607);
    const double t_growth = tp.at(largest) - tp.at(8);
    const double d_growth = dp.at(largest) - dp.at(8);
    const double per_word = d_growth / static_cast<double>(largest - 8);
    std::string detail = "templatedice L8 " + fmt(tp.at(8), 2) + " -> L" + std::to_string(largest) + " " +
                         fmt(tp.at(largest), 2) + " (growth " + fmt(t_growth, 2) + "); diceware(" +
                         std::to_string(six.size()) + " words) growth " + fmt(d_growth, 2) + ", " + fmt(per_word, 3) +
                         " per word vs log10(" + std::to_string(six.size()) + ") = " +
                         fmt(std::log10(static_cast<double>(six.size())), 3);
    return {t_growth < 1.0 && d_growth >= 3.0, detail};
}

// --- 7 --------------------------------------------------------------------

Outcome segmentation() {
    const auto t0 = Clock::now();
    const PassphraseMiner miner(FilterConfig{}, Dictionaries::load_dir(kData / "dicts"),
                                UnigramTable::load_file(kData / "dicts" / "unigrams.tsv"));
    std::ifstream in(kFixtures / "ex_passphrases.txt");
    std::vector<SegmentationResult> results;
    const auto summary = mine_dump(in, miner, &results);
    const Words expected_accepted = {"bullet for my valentine", "sponge bob square pants", "get there very fast indeed"};
    bool fixtures_ok = summary.accepted_unique() == 3 && summary.records == 12;
    for (std::size_t i = 0; fixtures_ok && i < 3; ++i) fixtures_ok = summary.unique[i].first == expected_accepted[i];
    for (std::size_t i = 3; i < results.size(); ++i) {
        fixtures_ok = fixtures_ok && results[i].rejected == RejectReason::NonPhrasal;
    }
    // The filter stage has its own fixtures.
    const FilterConfig fc;
    fixtures_ok = fixtures_ok && filter_password(std::string(40, 'e'), fc) == RejectReason::HashLike &&
                  filter_password("user.name@example.com12", fc) == RejectReason::EmailLike &&
                  !filter_password("speedtriple123456789", fc).has_value();

    // Exhaustive oracle, tolerance 0.
    std::size_t compared = 0, mismatched = 0;
    auto compare = [&](const ProbabilisticSegmenter& seg, const UnigramTable& table, const std::string& run) {
        const auto best = oracle::exhaustive_best_split(table, run);
        const auto got = seg.segment_run(run);
        ++compared;
        if (best.has_value() != got.has_value()) {
            ++mismatched;
            return;
        }
        if (!got) return;
        std::string joined;
        for (const auto& w : *got) joined += w;
        if (joined != run || std::abs(oracle::split_score(table, *got) - *best) > 1e-9) ++mismatched;
    };
    // Every string over a four-letter alphabet up to length 8.
    const UnigramTable small({{"a", 900}, {"an", 300}, {"and", 500}, {"at", 200}, {"ant", 20}, {"tan", 15},
                              {"nat", 3}, {"tana", 2}, {"nd", 1}, {"dan", 40}, {"da", 8}, {"ta", 9}, {"t", 4}});
    const ProbabilisticSegmenter small_seg(small, 0, 1);
    const std::string alphabet = "andt";
    for (std::size_t len = 1; len <= 8; ++len) {
        std::size_t total = 1;
        for (std::size_t i = 0; i < len; ++i) total *= alphabet.size();
        for (std::size_t k = 0; k < total; ++k) {
            std::string run(len, 'a');
            std::size_t r = k;
            for (std::size_t i = 0; i < len; ++i, r /= alphabet.size()) run[i] = alphabet[r % alphabet.size()];
            compare(small_seg, small, run);
        }
    }
    // Random runs up to 12 characters against the shipped lexicon.
    const auto shipped = UnigramTable::load_file(kData / "dicts" / "unigrams.tsv");
    const ProbabilisticSegmenter shipped_seg(shipped, 0);
    std::vector<std::string> short_words;
    for (const auto& [w, c] : shipped.counts()) {
        if (w.size() <= 6) short_words.push_back(w);
    }
    std::ranges::sort(short_words);
    Rng rng(707);
    for (int i = 0; i < 3000; ++i) {
        std::string run;
        while (true) {
            const auto& w = short_words[rng.uniform_index(short_words.size())];
            if (run.size() + w.size() > 12) break;
            run += w;
        }
        if (run.empty()) continue;
        // Half of the runs get one random letter changed.
        if (i % 2) run[rng.uniform_index(run.size())] = static_cast<char>('a' + rng.uniform_index(26));
        compare(shipped_seg, shipped, run);
    }
    const double secs = seconds_since(t0);
    return {fixtures_ok && mismatched == 0 && secs < 60.0,
            std::string("fixtures ") + (fixtures_ok ? "ok" : "wrong") + " (" + std::to_string(summary.accepted_unique()) +
                " accepted of " + std::to_string(summary.records) + "); exhaustive oracle " +
                std::to_string(compared - mismatched) + "/" + std::to_string(compared) + " agree; " + fmt(secs, 1) +
                " s"};
}

// --- 8 --------------------------------------------------------------------

// Every word has one dominant successor and ten rare ones, and every word
// can start and end a sentence. A bigram ceiling that excludes the dominant
// successor leaves MASCARA ten admissible choices at every step.
MarkovModel hub_model() {
    const std::size_t words = 200;
    auto name = [](std::size_t i) {
        std::string s = "q";
        for (int k = 0; k < 3; ++k, i /= 26) s += static_cast<char>('a' + i % 26);
        return s;
    };
    std::string text;
    for (std::size_t i = 0; i < words; ++i) {
        for (int r = 0; r < 90; ++r) text += name(i) + " " + name((i + 1) % words) + ". ";
        for (std::size_t k = 2; k < 12; ++k) text += name(i) + " " + name((i + k * 17) % words) + ". ";
    }
    return MarkovModel::train(clean_corpus(text));
}

Outcome efficiency() {
    // Same-model ratio on the desk corpus, generator setup included.
    SystemSet sys;
    sys.model = std::make_shared<const MarkovModel>(desk_model());
    sys.mascara.theta2 = kDeskTheta2;
    sys.mascara.stopwords = stopwords();
    const auto times = time_generation(sys, 1000, 808, 4, 5);
    const double ratio = times.at("mascara") / times.at("markov");

    // Filter-at-end against MASCARA where MASCARA needs no restarts.
    const auto hub = hub_model();
    GenerationConfig cfg;
    cfg.length = 4;
    cfg.theta2 = -1.0;
    const MascaraGenerator gen(hub, cfg);
    const MarkovGenerator markov(hub);
    std::size_t restarts = 0, rejected = 0, violations = 0;
    auto t0 = Clock::now();
    for (std::size_t i = 0; i < 1000; ++i) {
        Rng rng(derive_seed(809, i));
        MascaraStats st;
        gen.generate(rng, &st);
        restarts += st.restarts;
    }
    const double t_mascara = seconds_since(t0);
    t0 = Clock::now();
    for (std::size_t i = 0; i < 1000; ++i) {
        Rng rng(derive_seed(810, i));
        const auto r = oracle::mascara_end(markov, hub, cfg, -1.0, rng);
        rejected += r.rejected;
        violations += oracle::mascara_violations(hub, cfg, -1.0, r.phrase.words).size();
    }
    const double t_end = seconds_since(t0);
    const double slow = t_end / t_mascara;

    const bool pass = ratio <= 10.0 && restarts == 0 && violations == 0 && slow >= 50.0;
    return {pass, "desk mascara " + fmt(times.at("mascara") * 1e3, 1) + " ms vs markov " +
                      fmt(times.at("markov") * 1e3, 1) + " ms per 1000 (ratio " + fmt(ratio, 2) +
                      "); hub model: mascara " + fmt(t_mascara * 1e3, 1) + " ms, " + std::to_string(restarts) +
                      " restarts; filter-at-end " + fmt(t_end * 1e3, 1) + " ms, " + std::to_string(rejected) +
                      " rejected drafts (" + fmt(slow, 1) + "x slower)"};
}

// --- 9 --------------------------------------------------------------------

struct CliRun {
    int status = -1;
    std::string out;
};

CliRun cli(const std::string& args, const fs::path& stdin_file = {}) {
    std::string cmd = "\"" + kCli + "\" " + args;
    if (!stdin_file.empty()) cmd += " < \"" + stdin_file.string() + "\"";
    cmd += " 2>/dev/null";
    CliRun r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
    const int st = pclose(p);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

Outcome determinism() {
    const auto dir = fs::temp_directory_path() / ("mascara-acceptance-" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const auto model = q(kDeskModel);

    // Inputs for score and fit.
    {
        const MarkovGenerator gen(desk_model());
        std::ofstream phrases(dir / "phrases.txt"), cer(dir / "cer.tsv");
        fs::create_directories(dir / "attacks");
        std::ofstream attack_file(dir / "attacks" / "markov.txt");
        Rng rng(909);
        for (int i = 0; i < 400; ++i) {
            const auto p = gen.generate(3 + rng.uniform_index(4), rng);
            if (i < 20) phrases << p.text() << '\n';
            attack_file << p.text() << '\n';
            const auto f = phrase_features(desk_model(), p.words);
            cer << p.text() << '\t' << estimate_cer(kPublishedCerCoefficients, f).value + 0.01 * (rng.uniform01() - 0.5)
                << '\n';
        }
    }

    struct Command {
        std::string name, args;
        fs::path stdin_file, output_file;
    };
    const std::vector<Command> commands = {
        {"train", "train --corpus " + q(kFixtures / "toy_corpus.txt") + " --out " + q(dir / "OUT"), {}, dir / "OUT"},
        {"generate mascara", "generate --system mascara --model " + model + " --theta2 -1 --count 20 --seed 5", {}, {}},
        {"generate markov", "generate --system markov --model " + model + " --count 20 --seed 5 --json", {}, {}},
        {"generate diceware", "generate --system diceware --count 20 --length 6 --seed 5", {}, {}},
        {"generate templatedice", "generate --system templatedice --count 20 --length 8 --seed 5", {}, {}},
        {"score", "score --model " + model + " --attacks " + q(dir / "attacks") + " --samples 2000 --seed 5",
         dir / "phrases.txt", {}},
        {"extract", "extract --dump " + q(kFixtures / "ex_passphrases.txt") + " --out " + q(dir / "OUT"), {},
         dir / "OUT"},
        {"fit", "fit --data " + q(dir / "cer.tsv") + " --model " + model, {}, {}},
        {"evaluate",
         "evaluate --model " + model + " --theta2 -1 --count 100 --training-count 2000 --rank-samples 2000 --plateau 8 13 "
         "--probes 200 --seed 5 --out " + q(dir / "OUT") + " --csv " + q(dir / "OUT.csv"),
         {}, dir / "OUT"},
    };
    std::string failed;
    for (const auto& c : commands) {
        std::string outputs[2];
        int status[2];
        for (int k = 0; k < 2; ++k) {
            fs::remove(dir / "OUT");
            fs::remove(dir / "OUT.csv");
            const auto r = cli(c.args, c.stdin_file);
            status[k] = r.status;
            outputs[k] = r.out;
            if (!c.output_file.empty()) outputs[k] += "\n--file--\n" + slurp(c.output_file);
            if (c.name == "evaluate") outputs[k] += "\n--csv--\n" + slurp(dir / "OUT.csv");
        }
        if (status[0] != 0 || status[1] != 0 || outputs[0] != outputs[1] || outputs[0].empty()) {
            failed += (failed.empty() ? "" : ", ") + c.name + " (exit " + std::to_string(status[0]) + "/" +
                      std::to_string(status[1]) + ")";
        }
    }
    fs::remove_all(dir);
    return {failed.empty(), std::to_string(commands.size()) + " commands run twice" +
                                (failed.empty() ? ", all byte-identical" : "; differing or failing: " + failed)};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"rank table cumulative ceilings are exact", rank_table_exactness},
        {"Monte-Carlo ranks match enumeration", monte_carlo_vs_enumeration},
        {"CER estimate and fit are exact", cer_exactness},
        {"MASCARA phrases satisfy all constraints", mascara_constraints},
        {"median orderings between systems", orderings},
        {"TemplateDice plateau vs Diceware growth", plateau},
        {"segmentation fixtures and exhaustive oracle", segmentation},
        {"generation efficiency", efficiency},
        {"CLI determinism", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        const auto t0 = Clock::now();
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << ": " << criteria[i].first << " -- "
                  << o.detail << " [" << fmt(seconds_since(t0), 1) << " s]" << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
