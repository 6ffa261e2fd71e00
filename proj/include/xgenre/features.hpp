#pragma once

// The paper-style feature families: word unigrams, character trigrams, cluster
// unigrams, gendered word-list counts, and diminutive counts. A FeatureSpace
// is fitted on training documents only and frozen; vectorize drops anything
// unseen at fit time.

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "xgenre/clusters.hpp"
#include "xgenre/corpus.hpp"
#include "xgenre/errors.hpp"
#include "xgenre/textproc.hpp"
#include "xgenre/unicode.hpp"

namespace xgenre {

// feature-id -> value, no explicit zeros, ids sorted.
struct SparseVector {
    std::vector<std::pair<uint32_t, double>> entries;

    static SparseVector from_map(const std::map<uint32_t, double>& m) {
        SparseVector v;
        v.entries.reserve(m.size());
        for (const auto& [id, val] : m)
            if (val != 0.0) v.entries.emplace_back(id, val);
        return v;
    }

    double dot(const std::vector<double>& dense) const {
        double s = 0.0;
        for (const auto& [id, val] : entries) s += dense[id] * val;
        return s;
    }
};

struct Lexicon {
    std::string name;
    std::unordered_set<std::string> words;  // lowercase entries
};

// Word lists from Dutch spoken-corpus research: these items skew male/female.
inline const Lexicon& male_lexicon() {
    static const Lexicon lex{"male",
                             {"feitelijk", "voornamelijk", "degelijk", "oorspronkelijk",
                              "tamelijk", "onmiddellijk", "je", "d'r", "ja", "nee", "neen"}};
    return lex;
}

inline const Lexicon& female_lexicon() {
    static const Lexicon lex{"female",
                             {"ik", "hij", "dadelijk", "vriendelijk", "lelijk", "vrolijk",
                              "eindelijk", "verschrikkelijk"}};
    return lex;
}

inline Lexicon parse_lexicon(std::istream& in, const std::string& name) {
    Lexicon lex;
    lex.name = name;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        lex.words.insert(uni::lowercase(line));
    }
    if (lex.words.empty()) throw EmptyInput("lexicon " + name);
    return lex;
}

inline Lexicon load_lexicon(const std::string& path, const std::string& name) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open lexicon: " + path);
    return parse_lexicon(in, name);
}

inline std::size_t lexicon_count(const std::vector<std::string>& tokens, const Lexicon& lex) {
    std::size_t n = 0;
    for (const std::string& tok : tokens)
        if (lex.words.count(uni::lowercase(tok))) ++n;
    return n;
}

struct DiminutiveConfig {
    std::vector<std::string> suffixes = {"etje", "tje", "pje", "kje", "je"};
    std::unordered_set<std::string> exclusions = {"oranje", "franje"};
    std::size_t min_length = 4;  // codepoints
};

inline const DiminutiveConfig& default_diminutive_config() {
    static const DiminutiveConfig cfg;
    return cfg;
}

// Suffix heuristic for Dutch diminutives (-je and friends), length-gated and
// with an exclusion list for common false positives.
inline std::size_t diminutive_count(const std::vector<std::string>& tokens,
                                    const DiminutiveConfig& cfg = default_diminutive_config()) {
    std::size_t n = 0;
    for (const std::string& tok : tokens) {
        std::string low = uni::lowercase(tok);
        if (uni::decode(low).size() < cfg.min_length) continue;
        if (cfg.exclusions.count(low)) continue;
        for (const std::string& suffix : cfg.suffixes) {
            if (low.size() >= suffix.size() &&
                low.compare(low.size() - suffix.size(), suffix.size(), suffix) == 0) {
                ++n;
                break;
            }
        }
    }
    return n;
}

// All contiguous token n-grams with multiplicity. Grams are joined with a
// space (tokens never contain whitespace).
inline std::map<std::string, std::size_t> extract_word_ngrams(
    const std::vector<std::string>& tokens, std::size_t n) {
    if (n == 0) throw OutOfRange("word n-gram order must be >= 1");
    std::map<std::string, std::size_t> grams;
    if (tokens.size() < n) return grams;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string gram = tokens[i];
        for (std::size_t j = 1; j < n; ++j) {
            gram.push_back(' ');
            gram += tokens[i + j];
        }
        ++grams[gram];
    }
    return grams;
}

// Sliding window of n codepoints over the text with whitespace runs collapsed
// to single spaces (leading/trailing runs removed).
inline std::map<std::string, std::size_t> extract_char_ngrams(const std::string& text,
                                                              std::size_t n) {
    if (n == 0) throw OutOfRange("char n-gram order must be >= 1");
    std::vector<uni::Codepoint> collapsed;
    bool pending_space = false;
    for (uni::Codepoint cp : uni::decode(text)) {
        if (uni::is_whitespace(cp)) {
            pending_space = !collapsed.empty();
            continue;
        }
        if (pending_space) {
            collapsed.push_back(' ');
            pending_space = false;
        }
        collapsed.push_back(cp);
    }
    std::map<std::string, std::size_t> grams;
    if (collapsed.size() < n) return grams;
    for (std::size_t i = 0; i + n <= collapsed.size(); ++i) {
        std::string gram;
        for (std::size_t j = 0; j < n; ++j) uni::encode_to(collapsed[i + j], gram);
        ++grams[gram];
    }
    return grams;
}

struct FeatureConfig {
    bool word_unigrams = false;   // w1:
    bool char_trigrams = false;   // c3:
    bool clusters = false;        // cl: (word unigrams after cluster mapping)
    bool lex_male = false;        // lexM scalar
    bool lex_female = false;      // lexF scalar
    bool diminutives = false;     // dim scalar
    TokenizerConfig tokenizer;

    bool any() const {
        return word_unigrams || char_trigrams || clusters || lex_male || lex_female || diminutives;
    }

    std::string str() const {
        std::string parts;
        auto add = [&](bool on, const char* name) {
            if (!on) return;
            if (!parts.empty()) parts.push_back(',');
            parts += name;
        };
        add(word_unigrams, "w1");
        add(char_trigrams, "c3");
        add(clusters, "cl");
        add(lex_male, "lexM");
        add(lex_female, "lexF");
        add(diminutives, "dim");
        if (tokenizer.lowercase) parts += "+lowercase";
        return parts;
    }
};

// The strongest traditional combination: clusters + male word list + char
// trigrams.
inline FeatureConfig best_trad_config() {
    FeatureConfig cfg;
    cfg.clusters = true;
    cfg.lex_male = true;
    cfg.char_trigrams = true;
    return cfg;
}

// Named presets accepted by the CLI; a comma-separated family list is also
// accepted (e.g. "w1,c3,lexF").
inline FeatureConfig parse_feature_config(const std::string& text) {
    if (text == "best-trad") return best_trad_config();
    if (text == "unigrams") {
        FeatureConfig cfg;
        cfg.word_unigrams = true;
        return cfg;
    }
    if (text == "all") {
        FeatureConfig cfg;
        cfg.word_unigrams = cfg.char_trigrams = cfg.clusters = true;
        cfg.lex_male = cfg.lex_female = cfg.diminutives = true;
        return cfg;
    }
    FeatureConfig cfg;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item == "w1") cfg.word_unigrams = true;
        else if (item == "c3") cfg.char_trigrams = true;
        else if (item == "cl") cfg.clusters = true;
        else if (item == "lexM") cfg.lex_male = true;
        else if (item == "lexF") cfg.lex_female = true;
        else if (item == "dim") cfg.diminutives = true;
        else if (item == "lowercase") cfg.tokenizer.lowercase = true;
        else throw ConfigError("unknown feature family: " + item);
    }
    if (!cfg.any()) throw ConfigError("no feature families enabled: " + text);
    return cfg;
}

class FeatureSpace {
public:
    FeatureSpace() = default;

    const FeatureConfig& config() const { return config_; }
    std::size_t size() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }
    const std::string& fingerprint() const { return fingerprint_; }

    std::optional<uint32_t> id_of(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    // Enumerates every feature name observed in the training documents, dense
    // ids in first-seen order. Scalar features come first so they exist even
    // when no n-gram does.
    static FeatureSpace fit(const std::vector<Document>& train_docs, const FeatureConfig& config,
                            const ClusterMap* cm = nullptr) {
        if (train_docs.empty()) throw EmptyInput("fit_feature_space");
        if (!config.any()) throw ConfigError("feature config enables nothing");
        FeatureSpace fs;
        fs.config_ = config;
        fs.has_cluster_map_ = (cm != nullptr && !cm->empty());
        if (config.lex_male) fs.intern("lexM");
        if (config.lex_female) fs.intern("lexF");
        if (config.diminutives) fs.intern("dim");
        for (const Document& doc : train_docs)
            fs.collect(doc, cm, [&fs](const std::string& name, double) { fs.intern(name); });
        fs.fingerprint_ = fs.compute_fingerprint();
        return fs;
    }

    // Rebuilds a frozen space from persisted parts; ids follow `names` order.
    static FeatureSpace from_parts(const FeatureConfig& config, std::vector<std::string> names,
                                   bool has_cluster_map) {
        FeatureSpace fs;
        fs.config_ = config;
        fs.has_cluster_map_ = has_cluster_map;
        for (std::string& name : names) fs.intern(name);
        fs.fingerprint_ = fs.compute_fingerprint();
        return fs;
    }

    bool uses_cluster_map() const { return has_cluster_map_; }

    // Raw counts over the fitted space; unseen features dropped, never errors
    // on OOV.
    SparseVector vectorize(const Document& doc, const ClusterMap* cm = nullptr) const {
        bool has_cm = (cm != nullptr && !cm->empty());
        if (has_cm != has_cluster_map_)
            throw ConfigMismatch(has_cluster_map_
                                     ? "feature space was fitted with a cluster map"
                                     : "feature space was fitted without a cluster map");
        std::map<uint32_t, double> acc;
        collect(doc, cm, [&](const std::string& name, double value) {
            auto it = index_.find(name);
            if (it != index_.end()) acc[it->second] += value;
        });
        return SparseVector::from_map(acc);
    }

private:
    uint32_t intern(const std::string& name) {
        auto it = index_.find(name);
        if (it != index_.end()) return it->second;
        uint32_t id = static_cast<uint32_t>(names_.size());
        index_.emplace(name, id);
        names_.push_back(name);
        return id;
    }

    // Shared walk for fit (interning bump) and vectorize (accumulating bump).
    template <typename Bump>
    void collect(const Document& doc, const ClusterMap* cm, Bump&& raw_bump) const {
        auto bump = [&](const std::string& name, double value) {
            if (value != 0.0) raw_bump(name, value);
        };

        std::vector<std::string> tokens = tokenize(doc.text, config_.tokenizer);
        if (config_.word_unigrams)
            for (const std::string& tok : tokens) bump("w1:" + tok, 1.0);
        if (config_.clusters) {
            std::vector<std::string> mapped =
                cm != nullptr ? map_to_clusters(tokens, *cm) : tokens;
            for (const std::string& tok : mapped) bump("cl:" + tok, 1.0);
        }
        if (config_.char_trigrams)
            for (const auto& [gram, count] : extract_char_ngrams(doc.text, 3))
                bump("c3:" + gram, static_cast<double>(count));
        if (config_.lex_male)
            bump("lexM", static_cast<double>(lexicon_count(tokens, male_lexicon())));
        if (config_.lex_female)
            bump("lexF", static_cast<double>(lexicon_count(tokens, female_lexicon())));
        if (config_.diminutives) bump("dim", static_cast<double>(diminutive_count(tokens)));
    }

    // FNV-1a over the config string and the names in id order.
    std::string compute_fingerprint() const {
        uint64_t h = 1469598103934665603ull;
        auto mix = [&](const std::string& s) {
            for (unsigned char c : s) {
                h ^= c;
                h *= 1099511628211ull;
            }
            h ^= 0xFF;
            h *= 1099511628211ull;
        };
        mix(config_.str());
        mix(has_cluster_map_ ? "cm" : "nocm");
        for (const std::string& name : names_) mix(name);
        std::ostringstream out;
        out << std::hex << h;
        return out.str();
    }

    FeatureConfig config_;
    bool has_cluster_map_ = false;
    std::unordered_map<std::string, uint32_t> index_;
    std::vector<std::string> names_;
    std::string fingerprint_;
};

inline const char* kFeatureSpaceMagic = "xgenre-fspace v1";

inline void save_feature_space(std::ostream& out, const FeatureSpace& fs) {
    out << kFeatureSpaceMagic << "\n";
    out << "features=" << fs.config().str() << "\n";
    out << "lowercase=" << (fs.config().tokenizer.lowercase ? 1 : 0) << "\n";
    out << "cluster_map=" << (fs.uses_cluster_map() ? 1 : 0) << "\n";
    out << "count=" << fs.size() << "\n";
    for (const std::string& name : fs.names()) out << name << "\n";
    out << "end\n";
}

inline void save_feature_space(const std::string& path, const FeatureSpace& fs) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write feature space: " + path);
    save_feature_space(out, fs);
}

inline FeatureSpace parse_feature_space(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kFeatureSpaceMagic)
        throw CorruptModelFile("bad magic line, expected '" + std::string(kFeatureSpaceMagic) +
                               "'");
    FeatureConfig config;
    bool has_cm = false;
    std::size_t count = 0;
    auto expect_kv = [&](const char* key) -> std::string {
        if (!std::getline(in, line)) throw CorruptModelFile("truncated feature space file");
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string prefix = std::string(key) + "=";
        if (line.rfind(prefix, 0) != 0)
            throw CorruptModelFile("expected '" + prefix + "...', got: " + line);
        return line.substr(prefix.size());
    };
    std::string families = expect_kv("features");
    // strip the tokenizer suffix str() appends; the explicit key below wins
    std::size_t plus = families.find("+lowercase");
    if (plus != std::string::npos) families = families.substr(0, plus);
    config = parse_feature_config(families);
    config.tokenizer.lowercase = expect_kv("lowercase") == "1";
    has_cm = expect_kv("cluster_map") == "1";
    try {
        count = std::stoull(expect_kv("count"));
    } catch (const std::exception&) {
        throw CorruptModelFile("bad feature count");
    }
    std::vector<std::string> names;
    names.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        if (!std::getline(in, line)) throw CorruptModelFile("truncated feature list");
        if (!line.empty() && line.back() == '\r') line.pop_back();
        names.push_back(line);
    }
    if (!std::getline(in, line) || (line != "end" && line != "end\r"))
        throw CorruptModelFile("missing end marker");
    return FeatureSpace::from_parts(config, std::move(names), has_cm);
}

inline FeatureSpace load_feature_space(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open feature space: " + path);
    return parse_feature_space(in);
}

}  // namespace xgenre
