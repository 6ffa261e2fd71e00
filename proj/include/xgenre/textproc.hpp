#pragma once

// Deterministic tokenization and sentence segmentation shared by the feature
// extractors and the language models. Rules are fixed so that runs are
// reproducible: split on Unicode whitespace, then peel leading/trailing
// punctuation runs off each chunk. Word-internal punctuation (apostrophes,
// hyphens) stays inside the token, so "d'r" is a single token.

#include <string>
#include <vector>

#include "xgenre/unicode.hpp"

namespace xgenre {

struct TokenizerConfig {
    bool lowercase = false;  // non-lowercased works best; kept as a flag for ablations
};

struct Sentence {
    std::vector<std::string> tokens;  // non-empty; tokens contain no whitespace
};

namespace detail {

inline void emit_token(const std::vector<uni::Codepoint>& cps, std::size_t begin, std::size_t end,
                       bool lowercase, std::vector<std::string>& out) {
    if (begin >= end) return;
    std::string tok;
    for (std::size_t i = begin; i < end; ++i)
        uni::encode_to(lowercase ? uni::to_lower(cps[i]) : cps[i], tok);
    out.push_back(std::move(tok));
}

// Splits one whitespace-free chunk into [leading punct run][core][trailing punct run].
inline void split_chunk(const std::vector<uni::Codepoint>& cps, std::size_t begin, std::size_t end,
                        bool lowercase, std::vector<std::string>& out) {
    std::size_t lead = begin;
    while (lead < end && uni::is_punct(cps[lead])) ++lead;
    if (lead == end) {  // chunk is one punctuation run
        emit_token(cps, begin, end, lowercase, out);
        return;
    }
    std::size_t trail = end;
    while (trail > lead && uni::is_punct(cps[trail - 1])) --trail;
    emit_token(cps, begin, lead, lowercase, out);
    emit_token(cps, lead, trail, lowercase, out);
    emit_token(cps, trail, end, lowercase, out);
}

}  // namespace detail

inline std::vector<std::string> tokenize(const std::string& text, const TokenizerConfig& cfg = {}) {
    std::vector<uni::Codepoint> cps = uni::decode(text);
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < cps.size()) {
        while (i < cps.size() && uni::is_whitespace(cps[i])) ++i;
        std::size_t begin = i;
        while (i < cps.size() && !uni::is_whitespace(cps[i])) ++i;
        if (begin < i) detail::split_chunk(cps, begin, i, cfg.lowercase, out);
    }
    return out;
}

inline bool is_sentence_terminator(uni::Codepoint cp) {
    return cp == '.' || cp == '!' || cp == '?' || cp == 0x2026;  // ellipsis
}

// Boundary after a terminator followed by whitespace or end of text. Text with
// no terminator is one sentence; whitespace-only segments are dropped.
inline std::vector<Sentence> segment_sentences(const std::string& text,
                                               const TokenizerConfig& cfg = {}) {
    std::vector<uni::Codepoint> cps = uni::decode(text);
    std::vector<Sentence> out;
    std::size_t start = 0;
    auto flush = [&](std::size_t end) {
        if (end <= start) return;
        std::string segment;
        for (std::size_t i = start; i < end; ++i) uni::encode_to(cps[i], segment);
        std::vector<std::string> tokens = tokenize(segment, cfg);
        if (!tokens.empty()) out.push_back(Sentence{std::move(tokens)});
        start = end;
    };
    for (std::size_t i = 0; i < cps.size(); ++i) {
        if (is_sentence_terminator(cps[i]) &&
            (i + 1 == cps.size() || uni::is_whitespace(cps[i + 1]))) {
            flush(i + 1);
        }
    }
    flush(cps.size());
    return out;
}

}  // namespace xgenre
