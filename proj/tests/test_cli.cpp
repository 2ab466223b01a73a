#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Run {
    int status = -1;
    std::string out;
};

Run run(const std::string& args, const std::string& stdin_file = "") {
    std::string cmd = std::string("\"") + MASCARA_CLI_PATH + "\" " + args;
    if (!stdin_file.empty()) cmd += " < \"" + stdin_file + "\"";
    cmd += " 2>/dev/null";
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
    const int st = pclose(p);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

fs::path scratch() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / ("mascara-cli-test-" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

fs::path toy_model_file() {
    static const fs::path model = [] {
        const auto m = scratch() / "toy.model";
        const auto r = run("train --corpus " + q(fs::path(MASCARA_FIXTURE_DIR) / "toy_corpus.txt") + " --out " + q(m));
        REQUIRE(r.status == 0);
        return m;
    }();
    return model;
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
}

std::string read(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("cli train writes the hand-counted model") {
    const auto r = run("train --corpus " + q(fs::path(MASCARA_FIXTURE_DIR) / "toy_corpus.txt") + " --out " +
                       q(scratch() / "t.model"));
    REQUIRE(r.status == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["sentences"] == 2);
    CHECK(j["tokens"] == 7);
    CHECK(j["vocab"] == 5);
    const auto text = read(scratch() / "t.model");
    CHECK(text.find("B\tred\tfox\t2\n") != std::string::npos);
    CHECK(run("train --corpus /nonexistent/file --out " + q(scratch() / "x.model")).status == 1);
}

TEST_CASE("cli generate") {
    const auto model = toy_model_file();
    const auto m = run("generate --system markov --model " + q(model) + " --length 4 --count 3");
    REQUIRE(m.status == 0);
    CHECK(m.out == "red fox runs fast\nred fox runs fast\nred fox runs fast\n");

    const auto mc = run("generate --system mascara --model " + q(model) +
                        " --length 3 --theta2 0 --stopwords /dev/null --json");
    REQUIRE(mc.status == 0);
    const auto j = nlohmann::json::parse(mc.out);
    CHECK(j["phrase"] == "red fox sleeps");
    CHECK(j["source"] == "mascara");

    const auto six = fs::path(MASCARA_TEST_DATA_DIR) / "wordlists" / "six.txt";
    const auto d = run("generate --system diceware --wordlist " + q(six) + " --length 5 --count 20 --seed 3");
    REQUIRE(d.status == 0);
    const std::set<std::string> allowed = {"apple", "river", "stone", "cloud", "tiger", "maple"};
    std::istringstream lines(d.out);
    std::string word;
    int words = 0;
    while (lines >> word) {
        CHECK(allowed.contains(word));
        ++words;
    }
    CHECK(words == 100);
    CHECK(d.out == run("generate --system diceware --wordlist " + q(six) + " --length 5 --count 20 --seed 3").out);
    CHECK(d.out != run("generate --system diceware --wordlist " + q(six) + " --length 5 --count 20 --seed 4").out);

    const auto t = run("generate --system templatedice --length 4 --count 5");
    CHECK(t.status == 0);
    CHECK(run("generate --system templatedice --length 99").status == 1);
}

TEST_CASE("cli generate errors") {
    const auto model = toy_model_file();
    CHECK(run("generate --system nope").status == 1);
    CHECK(run("generate --system markov").status == 1);
    CHECK(run("generate --system mascara --model " + q(model) +
              " --length 3 --theta2 -0.5 --max-restarts 5 --stopwords /dev/null")
              .status == 1);
    CHECK(run("generate --system mascara --model " + q(model) + " --theta2 0.5").status == 1);
    CHECK(run("--help").status == 0);
    CHECK(run("frobnicate").status == 1);
}

TEST_CASE("cli score") {
    const auto model = toy_model_file();
    write(scratch() / "phrases.txt", "red fox\nfox runs fast\n");
    const auto r = run("score --model " + q(model) + " --samples 200", (scratch() / "phrases.txt").string());
    REQUIRE(r.status == 0);
    std::istringstream lines(r.out);
    std::string line;
    std::getline(lines, line);
    const auto j = nlohmann::json::parse(line);
    CHECK(j["phrase"] == "red fox");
    CHECK(j["features"]["l1"].get<double>() == doctest::Approx(-1.0882).epsilon(1e-4));
    CHECK(j["cer"].get<double>() == doctest::Approx(0.03722).epsilon(1e-3));
    CHECK(j["per_model"].contains("corpus2"));
    CHECK(r.out == run("score --model " + q(model) + " --samples 200", (scratch() / "phrases.txt").string()).out);

    write(scratch() / "empty.txt", "");
    CHECK(run("score --model " + q(model), (scratch() / "empty.txt").string()).status == 1);
}

TEST_CASE("cli extract") {
    const auto out = scratch() / "accepted.txt";
    const auto r = run("extract --dump " + q(fs::path(MASCARA_FIXTURE_DIR) / "ex_passphrases.txt") + " --out " + q(out));
    REQUIRE(r.status == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["records"] == 12);
    CHECK(j["accepted_unique"] == 3);
    CHECK(read(out) == "bullet for my valentine\nsponge bob square pants\nget there very fast indeed\n");
    CHECK(run("extract --dump /nonexistent").status == 1);
}

TEST_CASE("cli fit") {
    const auto model = toy_model_file();
    write(scratch() / "few.tsv", "red fox\t0.1\nfox runs\t0.2\nred\t0.3\n");
    CHECK(run("fit --data " + q(scratch() / "few.tsv") + " --model " + q(model)).status == 1);
}
