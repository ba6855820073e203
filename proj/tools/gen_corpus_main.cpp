// Writes the synthetic benchmark corpora (deterministic per seed).

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "incnet/corpus.hpp"
#include "incnet/error.hpp"

int main(int argc, char** argv) {
    CLI::App app{"generate synthetic benchmark corpora"};

    std::string kind = "glyphs";
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    std::size_t train_per_class = 250;
    std::size_t test_per_class = 60;

    app.add_option("--kind", kind, "'glyphs' (36-class 28x28 IDX) or 'shapes' (10-class 3x16x16 CSV)");
    app.add_option("--out", out_dir, "output directory")->required();
    app.add_option("--seed", seed, "corpus seed");
    app.add_option("--train-per-class", train_per_class, "training samples per class");
    app.add_option("--test-per-class", test_per_class, "test samples per class");

    CLI11_PARSE(app, argc, argv);

    try {
        std::filesystem::create_directories(out_dir);
        if (kind == "glyphs") {
            incnet::GlyphCorpusOptions opt;
            opt.train_per_class = train_per_class;
            opt.test_per_class = test_per_class;
            opt.seed = seed;
            incnet::generate_glyph_corpus(out_dir, opt);
        } else if (kind == "shapes") {
            incnet::ShapeCorpusOptions opt;
            opt.train_per_class = train_per_class;
            opt.test_per_class = test_per_class;
            opt.seed = seed;
            incnet::generate_shape_corpus(out_dir, opt);
        } else {
            std::cerr << "config error: unknown corpus kind '" << kind << "'\n";
            return 2;
        }
    } catch (const incnet::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cout << "wrote " << kind << " corpus to " << out_dir << "\n";
    return 0;
}
