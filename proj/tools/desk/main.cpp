// Writes the synthetic training text used for desk-scale runs.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "desk_corpus.hpp"
#include "mascara/error.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Generate a synthetic English-like training corpus"};
    std::string lexicon_path, out_path;
    mascara::desk::DeskConfig cfg;
    app.add_option("--lexicon", lexicon_path, "word<TAB>class<TAB>frequency file")->required();
    app.add_option("--out", out_path, "output text file (default: standard output)");
    app.add_option("--words", cfg.target_words, "approximate number of words")->capture_default_str();
    app.add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    app.add_option("--affinity", cfg.affinity, "collocation preference in [0, 1]")->capture_default_str();
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }
    try {
        const auto lex = mascara::desk::Lexicon::load(lexicon_path);
        const std::string text = mascara::desk::generate_text(lex, cfg);
        if (out_path.empty()) {
            std::cout << text;
        } else {
            std::ofstream out(out_path, std::ios::binary);
            if (!(out << text)) throw mascara::IoError("cannot write " + out_path);
        }
    } catch (const mascara::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
