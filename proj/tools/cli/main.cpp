// mascara: train, generate, score, extract, fit and evaluate from the shell.
// Data goes to standard output; diagnostics go to standard error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include "mascara/attack.hpp"
#include "mascara/corpus.hpp"
#include "mascara/error.hpp"
#include "mascara/evaluate.hpp"
#include "mascara/generate.hpp"
#include "mascara/markov.hpp"
#include "mascara/memorability.hpp"
#include "mascara/segment.hpp"

#ifndef MASCARA_DEFAULT_DATA_DIR
#define MASCARA_DEFAULT_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace mascara;

namespace {

constexpr std::uint64_t kDefaultSeed = 20230101;

fs::path data_dir() {
    if (const char* env = std::getenv("MASCARA_DATA_DIR"); env && *env) return env;
    return MASCARA_DEFAULT_DATA_DIR;
}

fs::path or_default(const std::string& given, const fs::path& fallback) {
    return given.empty() ? data_dir() / fallback : fs::path(given);
}

struct SeedFlags {
    std::uint64_t seed = kDefaultSeed;
    bool random = false;

    void add(CLI::App* app) {
        app->add_option("--seed", seed, "random seed")->capture_default_str();
        app->add_flag("--random-seed", random, "draw the seed from the system entropy source");
    }

    std::uint64_t resolve() const {
        if (!random) return seed;
        std::random_device rd;
        const std::uint64_t s = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
        std::cerr << "seed: " << s << '\n';
        return s;
    }
};

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    return out;
}

std::vector<PhraseWords> read_phrase_lines(std::istream& in) {
    std::vector<PhraseWords> out;
    std::string line;
    while (std::getline(in, line)) {
        auto words = normalize_phrase(line);
        if (!words.empty()) out.push_back(std::move(words));
    }
    return out;
}

std::vector<PhraseWords> read_phrase_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open phrase file '" + path.string() + "'");
    return read_phrase_lines(in);
}

// --- train ------------------------------------------------------------------

struct TrainArgs {
    std::vector<std::string> corpus;
    std::string out;
    std::size_t min_word_len = 3;
};

void run_train(const TrainArgs& a) {
    CleaningConfig cfg;
    cfg.min_word_len = a.min_word_len;
    TokenizedCorpus corpus;
    for (const auto& path : a.corpus) corpus.append(clean_corpus_file(path, cfg));
    if (corpus.empty()) throw TrainingError("corpus has no words after cleaning");
    const auto model = MarkovModel::train(corpus);
    model.save_file(a.out);
    json j;
    j["model"] = a.out;
    j["sentences"] = corpus.sentences.size();
    j["tokens"] = model.total_words();
    j["vocab"] = model.vocab_size();
    std::cout << j.dump() << '\n';
}

// --- generate -----------------------------------------------------------------

struct GenerateArgs {
    std::string model, system, stopwords, wordlist, templates;
    std::size_t length = 4, count = 1, max_restarts = 1000;
    std::optional<double> theta1, theta2;
    bool json_lines = false;
    SeedFlags seed;
};

void run_generate(const GenerateArgs& a) {
    const std::uint64_t seed = a.seed.resolve();
    std::optional<MarkovModel> model;
    if (a.system == "mascara" || a.system == "markov") {
        if (a.model.empty()) throw ConfigError("--system " + a.system + " needs --model");
        model = MarkovModel::load_file(a.model);
    }
    std::function<Passphrase(Rng&)> one;
    std::vector<std::string> words;
    std::optional<TemplateSet> templates;
    std::optional<MarkovGenerator> markov;
    std::optional<MascaraGenerator> mascara;
    if (a.system == "diceware") {
        words = load_word_file(or_default(a.wordlist, "wordlists/diceware.txt"));
        one = [&](Rng& rng) { return diceware(words, a.length, rng); };
    } else if (a.system == "templatedice") {
        templates = TemplateSet::load(or_default(a.templates, "templates/templates.txt"));
        one = [&](Rng& rng) { return template_dice(*templates, a.length, rng).phrase; };
    } else if (a.system == "markov") {
        markov.emplace(*model, a.max_restarts);
        one = [&](Rng& rng) { return markov->generate(a.length, rng); };
    } else {
        GenerationConfig cfg;
        cfg.length = a.length;
        if (a.theta1) cfg.theta1 = *a.theta1;
        cfg.theta2 = a.theta2;
        cfg.max_restarts = a.max_restarts;
        cfg.seed = seed;
        cfg.stopwords = load_stopwords(or_default(a.stopwords, "stopwords.txt"));
        mascara.emplace(*model, cfg);
        one = [&](Rng& rng) { return mascara->generate(rng); };
    }
    const auto phrases = generate_batch(a.count, seed, one);
    for (const auto& p : phrases) {
        if (a.json_lines) {
            json j;
            j["phrase"] = p.text();
            j["words"] = p.words;
            j["source"] = p.source;
            if (p.gen_probability) j["gen_probability"] = *p.gen_probability;
            std::cout << j.dump() << '\n';
        } else {
            std::cout << p.text() << '\n';
        }
    }
}

// --- score --------------------------------------------------------------------

struct ScoreArgs {
    std::string model, attacks;
    std::size_t samples = 10'000;
    unsigned workers = 4;
    SeedFlags seed;
};

void run_score(const ScoreArgs& a) {
    const std::uint64_t seed = a.seed.resolve();
    auto phrases = read_phrase_lines(std::cin);
    if (phrases.empty()) throw ConfigError("no phrases on standard input");
    auto model = std::make_shared<const MarkovModel>(MarkovModel::load_file(a.model));

    std::vector<PhraseWords> training;
    if (!a.attacks.empty()) {
        if (!fs::is_directory(a.attacks)) throw IoError("attack directory '" + a.attacks + "' does not exist");
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(a.attacks))
            if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
        std::ranges::sort(files);
        for (const auto& f : files) {
            auto more = read_phrase_file(f);
            training.insert(training.end(), more.begin(), more.end());
        }
        if (training.empty()) throw ConfigError("no training phrases (*.txt) in '" + a.attacks + "'");
    }
    EnsembleOptions eo;
    eo.rank_samples = a.samples;
    eo.seed = seed;
    eo.workers = a.workers;
    AttackEnsemble ensemble;
    if (training.empty()) {
        ensemble.add(CorpusBigramModel(model), eo.rank_samples, derive_seed(seed, 0), eo.workers);
    } else {
        ensemble = standard_ensemble(training, model, eo);
    }

    const double floor = default_oov_floor(*model);
    for (const auto& words : phrases) {
        const auto features = phrase_features(*model, words, floor);
        const auto est = min_auto(ensemble.ranks(words));
        json j;
        j["phrase"] = join_words(words);
        j["cer"] = estimate_cer(kPublishedCerCoefficients, features).value;
        j["features"] = {{"l1", features.l1_sum}, {"l2", features.l2_sum}, {"sigma_chr", features.sigma_chr}};
        j["per_model"] = est.per_model;
        j["min_auto"] = est.min_auto;
        j["log10_min_auto"] = est.log10_min;
        std::cout << j.dump() << '\n';
    }
}

// --- extract ------------------------------------------------------------------

struct ExtractArgs {
    std::string dump, dicts, model, unigrams, out;
    FilterConfig filter;
};

void run_extract(const ExtractArgs& a) {
    validate(a.filter);
    const fs::path dict_dir = or_default(a.dicts, "dicts");
    auto dicts = Dictionaries::load_dir(dict_dir);
    UnigramTable table;
    if (!a.unigrams.empty()) {
        table = UnigramTable::load_file(a.unigrams);
    } else if (!a.model.empty()) {
        table = UnigramTable::from_model(MarkovModel::load_file(a.model));
    } else {
        table = UnigramTable::load_file(dict_dir / "unigrams.tsv");
    }
    PassphraseMiner miner(a.filter, std::move(dicts), std::move(table));

    std::ifstream in(a.dump, std::ios::binary);
    if (!in) throw IoError("cannot open dump '" + a.dump + "'");
    const auto summary = mine_dump(in, miner);
    if (!a.out.empty()) {
        auto out = open_out(a.out);
        for (const auto& [phrase, n] : summary.unique) out << phrase << '\n';
        if (!out) throw IoError("failed writing '" + a.out + "'");
    }
    std::cout << summary.to_json() << '\n';
}

// --- fit ----------------------------------------------------------------------

struct FitArgs {
    std::string data, model;
};

void run_fit(const FitArgs& a) {
    const auto model = MarkovModel::load_file(a.model);
    const auto dataset = load_cer_dataset_file(a.data);
    const auto fit = fit_cer_coefficients(dataset, model);
    json j;
    j["alpha1"] = fit.coefficients.alpha1;
    j["alpha2"] = fit.coefficients.alpha2;
    j["alpha3"] = fit.coefficients.alpha3;
    j["r_squared"] = fit.r_squared;
    json p;
    const char* names[] = {"l1", "l2", "sigma_chr"};
    for (int i = 0; i < 3; ++i) p[names[i]] = fit.pearson[i] ? json(*fit.pearson[i]) : json(nullptr);
    j["pearson"] = p;
    j["samples"] = fit.samples;
    std::cout << j.dump(2) << '\n';
}

// --- evaluate -----------------------------------------------------------------

struct EvaluateArgs {
    std::string model, out, csv, user_phrases, wordlist, templates, stopwords;
    std::size_t count = 1000;
    std::optional<double> theta1, theta2;
    EvaluateOptions opts;
    bool timing = false;
    std::vector<std::size_t> plateau;
    std::size_t probes = 1000;
    SeedFlags seed;
};

void run_evaluate(EvaluateArgs a) {
    a.opts.seed = a.seed.resolve();
    SystemSet systems;
    systems.model = std::make_shared<const MarkovModel>(MarkovModel::load_file(a.model));
    systems.diceware_words = load_word_file(or_default(a.wordlist, "wordlists/diceware.txt"));
    systems.templates = std::make_shared<const TemplateSet>(TemplateSet::load(or_default(a.templates, "templates/templates.txt")));
    systems.mascara.stopwords = load_stopwords(or_default(a.stopwords, "stopwords.txt"));
    if (a.theta1) systems.mascara.theta1 = *a.theta1;
    systems.mascara.theta2 = a.theta2;
    if (!a.user_phrases.empty()) {
        systems.user_phrases = read_phrase_file(a.user_phrases);
        if (systems.user_phrases.empty()) throw ConfigError("user phrase file '" + a.user_phrases + "' is empty");
    }

    const auto samples = build_test_samples(systems, a.count, a.opts.seed, a.opts.lengths);
    auto report = evaluate(systems, samples, a.opts);
    report.metadata["count"] = std::to_string(a.count);
    if (a.timing) {
        for (const auto& [name, secs] : time_generation(systems, 1000, a.opts.seed))
            report.systems[name].timing_seconds_per_1000 = secs;
    }
    std::string text = report.to_json();
    if (!a.plateau.empty()) {
        auto j = json::parse(text);
        json probes;
        for (const auto& [len, mean] : plateau_probe(*systems.templates, a.plateau, a.probes, a.opts.seed))
            probes["templatedice"][std::to_string(len)] = mean;
        for (const auto& [len, mean] : diceware_probe(systems.diceware_words.size(), a.plateau, a.probes, a.opts.seed))
            probes["diceware"][std::to_string(len)] = mean;
        j["plateau"] = probes;
        text = j.dump(2) + "\n";
    }
    auto out = open_out(a.out);
    out << text;
    if (!out) throw IoError("failed writing '" + a.out + "'");
    if (!a.csv.empty()) {
        auto csv = open_out(a.csv);
        report.write_csv(csv);
    }
    for (const auto& c : report.orderings)
        std::cerr << (c.pass ? "pass " : "FAIL ") << c.metric << ": " << c.expected << " (" << c.observed << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Passphrase generation, strength and memorability toolkit"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "help for every subcommand");

    TrainArgs train;
    auto* t = app.add_subcommand("train", "train a word bigram model from text");
    t->add_option("--corpus", train.corpus, "raw text file(s)")->required()->expected(1, -1);
    t->add_option("--out", train.out, "model file to write")->required();
    t->add_option("--min-word-len", train.min_word_len, "drop shorter words")->capture_default_str();

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "generate passphrases");
    g->add_option("--system", gen.system, "generator")
        ->required()
        ->check(CLI::IsMember({"mascara", "markov", "diceware", "templatedice"}));
    g->add_option("--model", gen.model, "model file (mascara, markov)");
    g->add_option("--length", gen.length, "words per phrase")->capture_default_str();
    g->add_option("--count", gen.count, "number of phrases")->capture_default_str();
    g->add_option("--theta1", gen.theta1, "ceiling on the incremental CER score (default 0.5)");
    g->add_option("--theta2", gen.theta2, "ceiling on bigram log10 probability (default 0.8 x the model's minimum)");
    g->add_option("--max-restarts", gen.max_restarts, "restarts before giving up")->capture_default_str();
    g->add_option("--stopwords", gen.stopwords, "stopword file (default DATA/stopwords.txt)");
    g->add_option("--wordlist", gen.wordlist, "diceware wordlist (default DATA/wordlists/diceware.txt)");
    g->add_option("--templates", gen.templates, "template file (default DATA/templates/templates.txt)");
    g->add_flag("--json", gen.json_lines, "JSON lines instead of plain text");
    gen.seed.add(g);

    ScoreArgs score;
    auto* s = app.add_subcommand("score", "CER estimate and guess ranks of phrases read from standard input");
    s->add_option("--model", score.model, "corpus model file")->required();
    s->add_option("--attacks", score.attacks, "directory of attacker training phrases (*.txt, one per line)");
    s->add_option("--samples", score.samples, "Monte-Carlo samples per attacker")->capture_default_str();
    s->add_option("--workers", score.workers, "sampling threads (part of the result's identity)")->capture_default_str();
    score.seed.add(s);

    ExtractArgs ex;
    auto* e = app.add_subcommand("extract", "mine passphrases from a credential dump");
    e->add_option("--dump", ex.dump, "one record per line, optionally user:password")->required();
    e->add_option("--dicts", ex.dicts, "dictionary directory (default DATA/dicts)");
    e->add_option("--model", ex.model, "take unigram counts from this model");
    e->add_option("--unigrams", ex.unigrams, "word<TAB>count file (default DICTS/unigrams.tsv)");
    e->add_option("--out", ex.out, "accepted phrases, one per line");
    e->add_option("--edit-tolerance", ex.filter.edit_tolerance, "edits allowed per password")->capture_default_str();
    e->add_option("--min-chars", ex.filter.min_password_chars, "shortest password considered")->capture_default_str();
    e->add_option("--min-letters", ex.filter.min_letters, "fewest letters considered")->capture_default_str();
    e->add_option("--min-valid-words", ex.filter.min_valid_words, "dictionary words needed")->capture_default_str();

    FitArgs fit;
    auto* f = app.add_subcommand("fit", "fit the linear CER model");
    f->add_option("--data", fit.data, "phrase<TAB>cer file")->required();
    f->add_option("--model", fit.model, "corpus model file")->required();

    EvaluateArgs ev;
    auto* v = app.add_subcommand("evaluate", "compare the generators");
    v->add_option("--model", ev.model, "corpus model file")->required();
    v->add_option("--out", ev.out, "report JSON file")->required();
    v->add_option("--count", ev.count, "test phrases per system")->capture_default_str();
    v->add_option("--user-phrases", ev.user_phrases, "mined phrases, one per line");
    v->add_option("--csv", ev.csv, "per-phrase system,length,cer,log10_rank rows");
    v->add_option("--wordlist", ev.wordlist, "diceware wordlist");
    v->add_option("--templates", ev.templates, "template file");
    v->add_option("--stopwords", ev.stopwords, "stopword file");
    v->add_option("--theta1", ev.theta1, "mascara theta1");
    v->add_option("--theta2", ev.theta2, "mascara theta2");
    v->add_option("--training-count", ev.opts.training_count, "attack training phrases per system")
        ->capture_default_str();
    v->add_option("--rank-samples", ev.opts.rank_samples, "Monte-Carlo samples per attacker")->capture_default_str();
    v->add_option("--workers", ev.opts.workers, "sampling threads (part of the result's identity)")
        ->capture_default_str();
    v->add_option("--lengths", ev.opts.lengths, "explicit phrase lengths, cycled");
    v->add_flag("--timing", ev.timing, "add generation timings (not reproducible)");
    v->add_option("--plateau", ev.plateau, "lengths for the TemplateDice and Diceware rank probe");
    v->add_option("--probes", ev.probes, "phrases per probed length")->capture_default_str();
    ev.seed.add(v);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*t) run_train(train);
        if (*g) run_generate(gen);
        if (*s) run_score(score);
        if (*e) run_extract(ex);
        if (*f) run_fit(fit);
        if (*v) run_evaluate(ev);
    } catch (const Error& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 1;
    } catch (const std::exception& err) {
        std::cerr << "internal error: " << err.what() << '\n';
        return 2;
    }
    std::cout.flush();
    return std::cout ? 0 : 1;
}
