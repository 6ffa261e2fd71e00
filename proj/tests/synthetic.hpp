#pragma once

// Seeded synthetic corpus with a genre-independent lexical gender signal:
// each label draws from its own word set (shared across genres), mixed with
// genre-specific words and common filler. Used by the end-to-end tests.

#include <random>
#include <string>
#include <vector>

#include "xgenre/corpus.hpp"

namespace synthetic {

struct GeneratorConfig {
    std::size_t docs = 2000;  // split evenly over 2 genres x 2 labels
    double gender_rate = 0.35;
    double genre_rate = 0.30;
    uint64_t seed = 12345;
};

inline xgenre::Corpus gendered_corpus(const GeneratorConfig& cfg = {}) {
    using namespace xgenre;
    std::mt19937_64 rng(cfg.seed);
    auto mkwords = [](const std::string& stem, int n) {
        std::vector<std::string> out;
        for (int i = 0; i < n; ++i) out.push_back(stem + std::to_string(i));
        return out;
    };
    const std::vector<std::string> female = mkwords("fem", 20);
    const std::vector<std::string> male = mkwords("man", 20);
    const std::vector<std::string> genre_a = mkwords("nieuws", 30);
    const std::vector<std::string> genre_b = mkwords("tweet", 30);
    const std::vector<std::string> filler = mkwords("vul", 40);

    auto pick = [&](const std::vector<std::string>& pool) { return pool[rng() % pool.size()]; };
    auto unit = [&]() { return double(rng() >> 11) * 0x1.0p-53; };

    Corpus corpus;
    corpus.provenance = "synthetic";
    for (std::size_t i = 0; i < cfg.docs; ++i) {
        Genre genre = (i % 2 == 0) ? Genre::news() : Genre::twitter();
        Label label = (i % 4 < 2) ? Label::F : Label::M;
        const std::vector<std::string>& gender_pool = (label == Label::F) ? female : male;
        const std::vector<std::string>& genre_pool = (genre == Genre::news()) ? genre_a : genre_b;

        std::string text;
        std::size_t sentences = 2 + rng() % 2;
        for (std::size_t s = 0; s < sentences; ++s) {
            std::size_t len = 6 + rng() % 5;
            for (std::size_t j = 0; j < len; ++j) {
                if (!text.empty()) text += ' ';
                double r = unit();
                if (r < cfg.gender_rate) text += pick(gender_pool);
                else if (r < cfg.gender_rate + cfg.genre_rate) text += pick(genre_pool);
                else text += pick(filler);
            }
            text += '.';
        }
        corpus.documents.push_back(Document{"doc" + std::to_string(i), genre, label, text});
    }
    return corpus;
}

}  // namespace synthetic
