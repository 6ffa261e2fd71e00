#pragma once

// Corpus ingestion, the six experimental scenarios, and external-data dedupe.
//
// Interchange format is 4-column TSV: id, genre, label (F|M|empty), text.
// Literal tabs/newlines inside text are escaped as \t and \n (and backslash as
// \\ so the escaping round-trips).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "xgenre/errors.hpp"
#include "xgenre/unicode.hpp"

namespace xgenre {

enum class Label : uint8_t { F, M };

inline char label_char(Label l) { return l == Label::F ? 'F' : 'M'; }

inline std::optional<Label> parse_label(const std::string& s) {
    if (s == "F" || s == "f") return Label::F;
    if (s == "M" || s == "m") return Label::M;
    return std::nullopt;
}

struct Genre {
    enum class Kind : uint8_t { News, Twitter, YouTube, Other };
    Kind kind = Kind::Other;
    std::string tag;  // only for Other

    static Genre news() { return {Kind::News, {}}; }
    static Genre twitter() { return {Kind::Twitter, {}}; }
    static Genre youtube() { return {Kind::YouTube, {}}; }
    static Genre other(std::string t) { return {Kind::Other, std::move(t)}; }

    bool operator==(const Genre& rhs) const { return kind == rhs.kind && tag == rhs.tag; }
    bool operator!=(const Genre& rhs) const { return !(*this == rhs); }
    bool operator<(const Genre& rhs) const {
        if (kind != rhs.kind) return kind < rhs.kind;
        return tag < rhs.tag;
    }

    std::string str() const {
        switch (kind) {
            case Kind::News: return "news";
            case Kind::Twitter: return "twitter";
            case Kind::YouTube: return "youtube";
            case Kind::Other: return "other:" + tag;
        }
        return "other:" + tag;
    }
};

// Genre tokens are case-insensitive: news, twitter, youtube, other:<tag>.
inline std::optional<Genre> parse_genre(const std::string& s) {
    std::string low = uni::lowercase(s);
    if (low == "news" || low == "n") return Genre::news();
    if (low == "twitter" || low == "tw") return Genre::twitter();
    if (low == "youtube" || low == "yt") return Genre::youtube();
    if (low.rfind("other:", 0) == 0 && low.size() > 6) return Genre::other(s.substr(6));
    return std::nullopt;
}

struct Document {
    std::string id;      // non-empty, unique within a corpus
    Genre genre;
    std::optional<Label> label;
    std::string text;    // non-empty after whitespace trimming
};

struct Corpus {
    std::vector<Document> documents;
    std::string provenance;  // e.g. "provided", "external"
};

namespace tsv {

inline std::string escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '\t': out += "\\t"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

inline std::string unescape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '\\' || i + 1 == s.size()) {
            out.push_back(s[i]);
            continue;
        }
        switch (s[++i]) {
            case '\\': out.push_back('\\'); break;
            case 't': out.push_back('\t'); break;
            case 'n': out.push_back('\n'); break;
            case 'r': out.push_back('\r'); break;
            default: out.push_back('\\'); out.push_back(s[i]);
        }
    }
    return out;
}

}  // namespace tsv

namespace detail {

inline bool all_whitespace(const std::string& s) {
    for (uni::Codepoint cp : uni::decode(s))
        if (!uni::is_whitespace(cp)) return false;
    return true;
}

inline std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == '\t') {
            fields.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return fields;
}

}  // namespace detail

inline Corpus parse_corpus_tsv(std::istream& in, const std::string& provenance = "provided") {
    Corpus corpus;
    corpus.provenance = provenance;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields = detail::split_fields(line);
        if (fields.size() != 4)
            throw MalformedRow(lineno, "expected 4 tab-separated fields, got " +
                                           std::to_string(fields.size()));
        Document doc;
        doc.id = fields[0];
        if (doc.id.empty()) throw MalformedRow(lineno, "empty id");
        std::optional<Genre> genre = parse_genre(fields[1]);
        if (!genre) throw MalformedRow(lineno, "unknown genre token: " + fields[1]);
        doc.genre = *genre;
        if (!fields[2].empty()) {
            std::optional<Label> label = parse_label(fields[2]);
            if (!label) throw MalformedRow(lineno, "unknown label token: " + fields[2]);
            doc.label = label;
        }
        doc.text = tsv::unescape(fields[3]);
        if (detail::all_whitespace(doc.text)) throw MalformedRow(lineno, "empty text");
        if (!seen_ids.insert(doc.id).second) throw DuplicateId(doc.id);
        corpus.documents.push_back(std::move(doc));
    }
    return corpus;
}

inline Corpus ingest_tsv(const std::string& path, const std::string& provenance = "provided") {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open corpus file: " + path);
    return parse_corpus_tsv(in, provenance);
}

inline void write_corpus_tsv(std::ostream& out, const std::vector<Document>& docs) {
    for (const Document& d : docs) {
        out << d.id << '\t' << d.genre.str() << '\t' << (d.label ? std::string(1, label_char(*d.label)) : "")
            << '\t' << tsv::escape(d.text) << '\n';
    }
}

inline void write_corpus_tsv(const std::string& path, const std::vector<Document>& docs) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write corpus file: " + path);
    write_corpus_tsv(out, docs);
}

struct ScenarioSpec {
    std::string name;
    enum class Mode : uint8_t { InDomain, CrossGenre } mode = Mode::InDomain;
    std::vector<Genre> train_genres;
    Genre valid_genre;
    double valid_fraction = 0.10;  // InDomain only
    uint64_t seed = 0;
};

namespace detail {

// Deterministic Fisher-Yates; std::shuffle is implementation-defined.
template <typename T>
void seeded_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace detail

// 90/10-style split: |valid| = ceil(fraction * N), stratified by label via a
// seeded shuffle. Per-label validation counts follow the largest-remainder
// rule, so each differs from exact proportionality by less than 1.
inline std::pair<std::vector<Document>, std::vector<Document>> split_in_domain(
    const std::vector<Document>& docs, double valid_fraction, uint64_t seed) {
    if (docs.empty()) throw EmptyInput("split_in_domain");
    if (!(valid_fraction > 0.0 && valid_fraction < 1.0))
        throw OutOfRange("valid_fraction must be in (0,1)");
    for (const Document& d : docs)
        if (!d.label) throw UnlabelledDocument(d.id);

    const std::size_t total = docs.size();
    const std::size_t n_valid =
        static_cast<std::size_t>(std::ceil(valid_fraction * static_cast<double>(total)));

    // Indices per label, in corpus order. Fixed label order keeps the RNG
    // stream deterministic.
    std::vector<std::size_t> group[2];
    for (std::size_t i = 0; i < docs.size(); ++i)
        group[docs[i].label == Label::F ? 0 : 1].push_back(i);

    // Largest-remainder allocation of n_valid across the two labels.
    std::size_t take[2] = {0, 0};
    double frac[2] = {0.0, 0.0};
    std::size_t assigned = 0;
    for (int g = 0; g < 2; ++g) {
        double exact = static_cast<double>(n_valid) * static_cast<double>(group[g].size()) /
                       static_cast<double>(total);
        take[g] = static_cast<std::size_t>(std::floor(exact));
        frac[g] = exact - static_cast<double>(take[g]);
        assigned += take[g];
    }
    while (assigned < n_valid) {
        int g = (frac[0] >= frac[1]) ? 0 : 1;
        if (take[g] >= group[g].size()) g = 1 - g;
        ++take[g];
        frac[g] = -1.0;
        ++assigned;
    }

    std::mt19937_64 rng(seed);
    std::vector<bool> in_valid(docs.size(), false);
    for (int g = 0; g < 2; ++g) {
        std::vector<std::size_t> order = group[g];
        detail::seeded_shuffle(order, rng);
        for (std::size_t k = 0; k < take[g]; ++k) in_valid[order[k]] = true;
    }

    std::pair<std::vector<Document>, std::vector<Document>> result;
    for (std::size_t i = 0; i < docs.size(); ++i)
        (in_valid[i] ? result.second : result.first).push_back(docs[i]);
    return result;
}

inline std::pair<std::vector<Document>, std::vector<Document>> build_scenario(
    const Corpus& corpus, const ScenarioSpec& spec) {
    auto labelled_of = [&](const Genre& g) {
        std::vector<Document> out;
        for (const Document& d : corpus.documents)
            if (d.label && d.genre == g) out.push_back(d);
        return out;
    };

    if (spec.mode == ScenarioSpec::Mode::InDomain) {
        std::vector<Document> docs = labelled_of(spec.valid_genre);
        if (docs.empty()) throw MissingGenre(spec.valid_genre.str());
        return split_in_domain(docs, spec.valid_fraction, spec.seed);
    }

    std::pair<std::vector<Document>, std::vector<Document>> result;
    for (const Genre& g : spec.train_genres) {
        std::vector<Document> docs = labelled_of(g);
        if (docs.empty()) throw MissingGenre(g.str());
        result.first.insert(result.first.end(), docs.begin(), docs.end());
    }
    result.second = labelled_of(spec.valid_genre);
    if (result.second.empty()) throw MissingGenre(spec.valid_genre.str());
    if (result.first.empty()) throw EmptyInput("cross-genre training set");
    return result;
}

// Whitespace-collapsed, NFC-composed text key used for exact-duplicate checks.
inline std::string normalized_text_key(const std::string& text) {
    std::vector<uni::Codepoint> cps = uni::compose_nfc_latin(uni::decode(text));
    std::string out;
    bool pending_space = false;
    for (uni::Codepoint cp : cps) {
        if (uni::is_whitespace(cp)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        uni::encode_to(cp, out);
    }
    return out;
}

// Removes external documents whose normalized text exactly matches a provided
// document's normalized text. Order preserved; idempotent.
inline Corpus dedupe_external(const Corpus& provided, const Corpus& external) {
    std::unordered_set<std::string> provided_keys;
    for (const Document& d : provided.documents) provided_keys.insert(normalized_text_key(d.text));
    Corpus out;
    out.provenance = external.provenance;
    for (const Document& d : external.documents)
        if (!provided_keys.count(normalized_text_key(d.text))) out.documents.push_back(d);
    return out;
}

}  // namespace xgenre
