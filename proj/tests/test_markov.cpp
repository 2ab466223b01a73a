#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mascara/corpus.hpp"
#include "mascara/error.hpp"
#include "mascara/markov.hpp"
#include "mascara/random.hpp"
#include "support/oracles.hpp"

using namespace mascara;
using mascara::testing::toy_model;

namespace {

std::uint64_t count(const MarkovModel& m, std::string_view a, std::string_view b) {
    auto id = [&](std::string_view w) {
        if (w == kStartToken) return kStartId;
        if (w == kEndToken) return kEndId;
        return m.id(w);
    };
    return m.bigram_count(id(a), id(b));
}

MarkovModel random_model(std::uint64_t seed) {
    Rng rng(seed);
    const std::vector<std::string> words = {"alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf"};
    std::string text;
    for (int s = 0; s < 40; ++s) {
        const auto n = 1 + rng.uniform_index(6);
        for (std::size_t i = 0; i < n; ++i) text += words[rng.uniform_index(words.size())] + " ";
        text += ". ";
    }
    return MarkovModel::train(clean_corpus(text));
}

}  // namespace

TEST_CASE("toy model counts") {
    const auto m = toy_model();
    CHECK(m.vocab_size() == 5);
    CHECK(m.total_words() == 7);
    CHECK(m.unigram_count(m.id("red")) == 2);
    CHECK(m.unigram_count(m.id("fox")) == 2);
    CHECK(m.unigram_count(m.id("runs")) == 1);
    CHECK(count(m, "red", "fox") == 2);
    CHECK(count(m, "fox", "runs") == 1);
    CHECK(count(m, "fox", "sleeps") == 1);
    CHECK(count(m, "<s>", "red") == 2);
    CHECK(count(m, "fast", "<e>") == 1);
    CHECK(count(m, "sleeps", "<e>") == 1);
    CHECK(count(m, "runs", "fast") == 1);
    CHECK(count(m, "fox", "fox") == 0);
}

TEST_CASE("single sentence") {
    TokenizedCorpus c;
    c.sentences = {{"red"}};
    c.vocab = {"red"};
    c.total_words = 1;
    const auto m = MarkovModel::train(c);
    CHECK(count(m, "<s>", "red") == 1);
    CHECK(count(m, "red", "<e>") == 1);
    CHECK(m.l1("red") == 0.0);
}

TEST_CASE("empty corpus is a training error") {
    CHECK_THROWS_AS(MarkovModel::train(TokenizedCorpus{}), TrainingError);
}

TEST_CASE("l1 and l2 values") {
    const auto m = toy_model();
    CHECK(m.l1("red") == doctest::Approx(std::log10(2.0 / 7.0)).epsilon(1e-12));
    CHECK(m.l1("red") == doctest::Approx(-0.5441).epsilon(1e-4));
    CHECK_THROWS_AS(m.l1("missing"), OovError);
    CHECK(m.l2("red", "fox") == 0.0);
    CHECK(m.l2("fox", "runs") == doctest::Approx(-0.30103).epsilon(1e-5));
    CHECK_THROWS_AS(m.l2("fox", "fox"), OovError);
}

TEST_CASE("next") {
    const auto m = toy_model();
    auto sorted = [](std::vector<std::string> v) {
        std::ranges::sort(v);
        return v;
    };
    CHECK(sorted(m.next("fox")) == std::vector<std::string>{"runs", "sleeps"});
    CHECK(m.next(kStartToken) == std::vector<std::string>{"red"});
    CHECK(m.next("fast") == std::vector<std::string>{std::string(kEndToken)});
    CHECK_THROWS_AS(m.next("nope"), OovError);
}

TEST_CASE("save and load round trip") {
    const auto m = toy_model();
    std::stringstream ss;
    m.save(ss);
    const std::string text = ss.str();
    CHECK(text.rfind("MASCARA-MODEL v1\n", 0) == 0);
    CHECK(text.find("U\tfox\t2\n") != std::string::npos);
    CHECK(text.find("B\t<s>\tred\t2\n") != std::string::npos);
    const auto back = MarkovModel::load(ss);
    CHECK(back == m);

    std::stringstream again;
    back.save(again);
    CHECK(again.str() == text);
}

TEST_CASE("load errors") {
    std::istringstream wrong_version("MASCARA-MODEL v9\n");
    CHECK_THROWS_AS(MarkovModel::load(wrong_version), LoadError);
    std::istringstream bad_count("MASCARA-MODEL v1\nU\tred\tmany\n");
    try {
        MarkovModel::load(bad_count);
        FAIL("expected LoadError");
    } catch (const LoadError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("probability sums and next consistency on random models") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const auto m = random_model(seed);
        double sum1 = 0.0;
        for (WordId w = 2; w < m.id_count(); ++w) sum1 += std::pow(10.0, m.l1(w));
        CHECK(sum1 == doctest::Approx(1.0).epsilon(1e-9));
        for (WordId w = 0; w < m.id_count(); ++w) {
            if (w == kEndId || m.successors(w).empty()) continue;
            double sum2 = 0.0;
            for (const auto& s : m.successors(w)) sum2 += std::pow(10.0, m.l2(w, s.word));
            CHECK(sum2 == doctest::Approx(1.0).epsilon(1e-9));
            std::uint64_t total = 0;
            for (const auto& s : m.successors(w)) total += s.count;
            CHECK(total == m.successor_total(w));
        }
        std::stringstream ss;
        m.save(ss);
        CHECK(MarkovModel::load(ss) == m);
    }
}

TEST_CASE("min_word_l2 ignores sentinel transitions") {
    const auto m = toy_model();
    CHECK(m.min_word_l2() == doctest::Approx(std::log10(0.5)));
}
