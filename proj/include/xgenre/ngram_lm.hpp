#pragma once

// Interpolated modified Kneser-Ney n-gram language model with singleton
// pruning, ARPA-format persistence, and the dual-LM gender classifier.
//
// Conventions, fixed so that estimation, scoring, the file format and the
// test oracle all agree:
//  - each sentence is padded with order-1 begin sentinels and one end
//    sentinel; every k-gram window (k = 1..order) is counted;
//  - the begin sentinel is never a predicted word: k-grams ending in <s> are
//    context-only entries (written with prob -99, like classic ARPA tools);
//  - adjusted counts: raw counts at the top order and for <s>-initial grams,
//    left-extension type counts elsewhere;
//  - per-order discounts D1/D2/D3+ from count-of-counts over adjusted counts,
//    falling back to absolute discounting with D=0.75 when the count-of-counts
//    are degenerate (any of n1,n2,n3 zero, or a non-positive D2/D3);
//  - the unigram level interpolates with a uniform 1/(|vocab|+1) distribution
//    whose support includes the reserved unknown symbol.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "xgenre/corpus.hpp"
#include "xgenre/errors.hpp"
#include "xgenre/textproc.hpp"

namespace xgenre {

namespace lm {

using TokenId = uint32_t;
using Gram = std::vector<TokenId>;

class Vocab {
public:
    static constexpr TokenId kBos = 0;
    static constexpr TokenId kEos = 1;
    static constexpr TokenId kUnk = 2;

    Vocab() {
        add("<s>");
        add("</s>");
        add("<unk>");
    }

    TokenId add(const std::string& tok) {
        auto it = ids_.find(tok);
        if (it != ids_.end()) return it->second;
        TokenId id = static_cast<TokenId>(tokens_.size());
        ids_.emplace(tok, id);
        tokens_.push_back(tok);
        return id;
    }

    std::optional<TokenId> find(const std::string& tok) const {
        auto it = ids_.find(tok);
        if (it == ids_.end()) return std::nullopt;
        return it->second;
    }

    TokenId id_or_unk(const std::string& tok) const {
        auto it = ids_.find(tok);
        return it == ids_.end() ? kUnk : it->second;
    }

    const std::string& token(TokenId id) const { return tokens_[id]; }
    std::size_t size() const { return tokens_.size(); }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, TokenId> ids_;
};

constexpr int kMaxOrder = 8;

struct CountTable {
    int order = 0;
    Vocab vocab;
    // counts[k] holds the k-gram counts, k = 1..order; index 0 unused.
    std::vector<std::map<Gram, uint64_t>> counts;
};

inline CountTable count_ngrams(const std::vector<Sentence>& sentences, int order) {
    if (order < 1 || order > kMaxOrder) throw OrderOutOfRange(order);
    if (sentences.empty()) throw EmptyInput("count_ngrams");
    CountTable ct;
    ct.order = order;
    ct.counts.resize(order + 1);
    for (const Sentence& s : sentences) {
        std::vector<TokenId> padded;
        padded.reserve(s.tokens.size() + order);
        for (int i = 0; i + 1 < order; ++i) padded.push_back(Vocab::kBos);
        for (const std::string& tok : s.tokens) padded.push_back(ct.vocab.add(tok));
        padded.push_back(Vocab::kEos);
        for (int k = 1; k <= order; ++k) {
            if (padded.size() < static_cast<std::size_t>(k)) continue;
            for (std::size_t i = 0; i + k <= padded.size(); ++i)
                ++ct.counts[k][Gram(padded.begin() + i, padded.begin() + i + k)];
        }
    }
    return ct;
}

// Removes every n-gram of order >= 2 with count 1, then restores prefix
// closure (which only ever removes grams that were themselves singletons).
// Unigrams are never pruned.
inline CountTable prune_singletons(const CountTable& ct) {
    CountTable out;
    out.order = ct.order;
    out.vocab = ct.vocab;
    out.counts.resize(ct.order + 1);
    if (ct.order >= 1) out.counts[1] = ct.counts[1];
    for (int k = 2; k <= ct.order; ++k) {
        for (const auto& [gram, count] : ct.counts[k]) {
            if (count < 2) continue;
            if (k > 2) {
                Gram prefix(gram.begin(), gram.end() - 1);
                if (!out.counts[k - 1].count(prefix)) continue;
            }
            out.counts[k][gram] = count;
        }
    }
    return out;
}

struct Discounts {
    double d1 = 0.75, d2 = 0.75, d3 = 0.75;

    double of(uint64_t adjusted) const {
        if (adjusted == 0) return 0.0;
        if (adjusted == 1) return d1;
        if (adjusted == 2) return d2;
        return d3;
    }
};

// Chen-Goodman estimates from count-of-counts; falls back to absolute
// discounting when they are unusable.
inline Discounts estimate_discounts(uint64_t n1, uint64_t n2, uint64_t n3, uint64_t n4) {
    if (n1 > 0 && n2 > 0 && n3 > 0) {
        double y = static_cast<double>(n1) / (static_cast<double>(n1) + 2.0 * static_cast<double>(n2));
        Discounts d;
        d.d1 = 1.0 - 2.0 * y * static_cast<double>(n2) / static_cast<double>(n1);
        d.d2 = 2.0 - 3.0 * y * static_cast<double>(n3) / static_cast<double>(n2);
        d.d3 = 3.0 - 4.0 * y * static_cast<double>(n4) / static_cast<double>(n3);
        if (d.d1 > 0.0 && d.d2 > 0.0 && d.d3 > 0.0) return d;
    }
    return Discounts{};
}

struct Entry {
    double prob10 = 0.0;    // log10 conditional probability (valid when has_prob)
    double backoff10 = 0.0;  // log10 backoff weight
    bool has_prob = false;
};

class NGramLM {
public:
    int order = 0;
    Vocab vocab;
    std::vector<std::map<Gram, Entry>> tables;  // tables[k], k = 1..order
    std::size_t real_word_types = 0;            // |vocabulary| excluding sentinels/unk

    // log10 P(w | history); history may have any length, only the last
    // order-1 ids are used. Standard ARPA backoff walk; w must not be a
    // begin sentinel.
    double log10_cond(const std::vector<TokenId>& history, TokenId w) const {
        std::size_t use = std::min(history.size(), static_cast<std::size_t>(order - 1));
        double acc = 0.0;
        for (std::size_t len = use;; --len) {
            Gram g(history.end() - len, history.end());
            g.push_back(w);
            auto it = tables[len + 1].find(g);
            if (it != tables[len + 1].end() && it->second.has_prob) return acc + it->second.prob10;
            if (len == 0) break;  // unigram must exist; unreachable for valid models
            g.pop_back();
            auto ctx = tables[len].find(g);
            if (ctx != tables[len].end()) acc += ctx->second.backoff10;
        }
        return acc + -99.0;  // defensive: unknown unigram in a corrupt model
    }

    double score_sentence(const Sentence& s) const {
        std::vector<TokenId> history;
        for (int i = 0; i + 1 < order; ++i) history.push_back(Vocab::kBos);
        double total = 0.0;
        auto predict = [&](TokenId w) {
            total += log10_cond(history, w);
            history.push_back(w);
        };
        for (const std::string& tok : s.tokens) predict(vocab.id_or_unk(tok));
        predict(Vocab::kEos);
        return total;
    }
};

inline NGramLM estimate_kn(const CountTable& ct) {
    if (ct.order < 1 || ct.order > kMaxOrder) throw OrderOutOfRange(ct.order);
    for (int k = 1; k <= ct.order; ++k)
        if (ct.counts[k].empty()) throw DegenerateCounts(k);

    const int order = ct.order;

    // Adjusted counts: top order and <s>-initial grams keep raw counts;
    // lower orders use left-extension type counts from one order up.
    std::vector<std::map<Gram, uint64_t>> adj(order + 1);
    adj[order] = ct.counts[order];
    for (int k = order - 1; k >= 1; --k) {
        std::map<Gram, uint64_t> left_types;
        for (const auto& [gram, count] : ct.counts[k + 1])
            ++left_types[Gram(gram.begin() + 1, gram.end())];
        for (const auto& [gram, count] : ct.counts[k]) {
            if (gram.front() == Vocab::kBos) {
                adj[k][gram] = count;
            } else {
                auto it = left_types.find(gram);
                adj[k][gram] = it == left_types.end() ? 0 : it->second;
            }
        }
    }

    // Per-order discounts over adjusted counts; grams ending in <s> are
    // context-only and do not participate.
    std::vector<Discounts> discounts(order + 1);
    for (int k = 1; k <= order; ++k) {
        uint64_t n[5] = {0, 0, 0, 0, 0};
        for (const auto& [gram, a] : adj[k]) {
            if (gram.back() == Vocab::kBos) continue;
            if (a >= 1 && a <= 4) ++n[a];
        }
        discounts[k] = estimate_discounts(n[1], n[2], n[3], n[4]);
    }

    NGramLM model;
    model.order = order;
    model.vocab = ct.vocab;
    model.tables.resize(order + 1);
    for (const auto& [gram, count] : ct.counts[1])
        if (gram[0] != Vocab::kBos && gram[0] != Vocab::kEos) ++model.real_word_types;

    // Linear-space probabilities during estimation; converted to log10 at the
    // end so the ARPA round-trip is exact.
    std::vector<std::map<Gram, double>> linprob(order + 1);

    // Unigram level: interpolate with the uniform distribution over real
    // words + </s> + <unk>.
    const double uniform_denom = static_cast<double>(model.real_word_types) + 2.0;
    {
        const Discounts& d = discounts[1];
        double sum = 0.0;
        double discounted = 0.0;
        for (const auto& [gram, a] : adj[1]) {
            if (gram[0] == Vocab::kBos) continue;
            sum += static_cast<double>(a);
            discounted += d.of(a);
        }
        double gamma = sum > 0.0 ? discounted / sum : 1.0;
        for (const auto& [gram, a] : adj[1]) {
            if (gram[0] == Vocab::kBos) continue;
            double u = sum > 0.0 ? std::max(static_cast<double>(a) - d.of(a), 0.0) / sum : 0.0;
            linprob[1][gram] = u + gamma / uniform_denom;
        }
        linprob[1][Gram{Vocab::kUnk}] = gamma / uniform_denom;
    }

    // Higher orders, grouped by history (map order keeps groups contiguous).
    std::vector<std::map<Gram, double>> backoff(order + 1);  // keyed by history gram
    for (int k = 2; k <= order; ++k) {
        const Discounts& d = discounts[k];
        auto it = adj[k].begin();
        while (it != adj[k].end()) {
            Gram history(it->first.begin(), it->first.end() - 1);
            auto group_end = it;
            double sum = 0.0;
            double discounted = 0.0;
            while (group_end != adj[k].end() &&
                   std::equal(history.begin(), history.end(), group_end->first.begin())) {
                if (group_end->first.back() != Vocab::kBos) {
                    sum += static_cast<double>(group_end->second);
                    discounted += d.of(group_end->second);
                }
                ++group_end;
            }
            double gamma = sum > 0.0 ? discounted / sum : 1.0;
            backoff[k - 1][history] = gamma;
            for (auto g = it; g != group_end; ++g) {
                if (g->first.back() == Vocab::kBos) continue;
                double u = sum > 0.0
                               ? std::max(static_cast<double>(g->second) - d.of(g->second), 0.0) / sum
                               : 0.0;
                Gram suffix(g->first.begin() + 1, g->first.end());
                linprob[k][g->first] = u + gamma * linprob[k - 1].at(suffix);
            }
            it = group_end;
        }
    }

    for (int k = 1; k <= order; ++k) {
        for (const auto& [gram, count] : adj[k]) {
            Entry e;
            if (gram.back() == Vocab::kBos) {
                e.has_prob = false;  // context-only sentinel entry
            } else {
                e.has_prob = true;
                e.prob10 = std::log10(linprob[k].at(gram));
            }
            auto bo = backoff[k].find(gram);
            if (bo != backoff[k].end()) e.backoff10 = std::log10(bo->second);
            model.tables[k][gram] = e;
        }
        if (k == 1) {
            Entry unk;
            unk.has_prob = true;
            unk.prob10 = std::log10(linprob[1].at(Gram{Vocab::kUnk}));
            model.tables[1][Gram{Vocab::kUnk}] = unk;
        }
    }
    return model;
}

namespace detail {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

// ARPA text format: \data\ counts, then per-order blocks of
// "log10prob TAB n-gram TAB log10backoff" (backoff column absent at the top
// order). Context-only sentinel entries carry prob -99.
inline void save_arpa(std::ostream& out, const NGramLM& model) {
    out << "\\data\\\n";
    for (int k = 1; k <= model.order; ++k)
        out << "ngram " << k << "=" << model.tables[k].size() << "\n";
    out << "\n";
    for (int k = 1; k <= model.order; ++k) {
        out << "\\" << k << "-grams:\n";
        for (const auto& [gram, e] : model.tables[k]) {
            out << (e.has_prob ? detail::fmt_double(e.prob10) : std::string("-99"));
            out << '\t';
            for (std::size_t i = 0; i < gram.size(); ++i) {
                if (i) out << ' ';
                out << model.vocab.token(gram[i]);
            }
            if (k < model.order) out << '\t' << detail::fmt_double(e.backoff10);
            out << '\n';
        }
        out << "\n";
    }
    out << "\\end\\\n";
}

inline void save_arpa(const std::string& path, const NGramLM& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write model: " + path);
    save_arpa(out, model);
}

inline NGramLM parse_arpa(std::istream& in) {
    std::string line;
    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            return true;
        }
        return false;
    };

    // Header: first non-blank line must be \data\ (serves as the format marker).
    do {
        if (!next_line()) throw CorruptModelFile("missing \\data\\ header");
    } while (line.empty());
    if (line != "\\data\\") throw CorruptModelFile("expected \\data\\ header, got: " + line);

    std::vector<std::size_t> declared;  // declared[k-1]
    while (next_line()) {
        if (line.empty()) break;
        std::istringstream row(line);
        std::string word;
        int k = 0;
        char eq = 0;
        std::size_t count = 0;
        row >> word;
        std::string rest;
        row >> rest;
        if (word != "ngram" || rest.empty()) throw CorruptModelFile("bad count line: " + line);
        std::istringstream kv(rest);
        if (!(kv >> k) || !(kv >> eq) || eq != '=' || !(kv >> count) || k < 1 || k > kMaxOrder)
            throw CorruptModelFile("bad count line: " + line);
        if (static_cast<std::size_t>(k) != declared.size() + 1)
            throw CorruptModelFile("counts out of order: " + line);
        declared.push_back(count);
    }
    if (declared.empty()) throw CorruptModelFile("no ngram counts declared");

    NGramLM model;
    model.order = static_cast<int>(declared.size());
    model.tables.resize(model.order + 1);

    int current = 0;
    while (next_line()) {
        if (line.empty()) continue;
        if (line == "\\end\\") {
            current = -1;
            break;
        }
        if (line.front() == '\\') {
            std::size_t dash = line.find("-grams:");
            if (dash == std::string::npos)
                throw CorruptModelFile("unexpected section header: " + line);
            try {
                current = std::stoi(line.substr(1, dash - 1));
            } catch (const std::exception&) {
                throw CorruptModelFile("unexpected section header: " + line);
            }
            if (current < 1 || current > model.order)
                throw CorruptModelFile("unexpected section order: " + line);
            continue;
        }
        if (current == 0) throw CorruptModelFile("n-gram line before any section: " + line);
        // prob \t tokens \t [backoff]
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == '\t') {
                fields.push_back(line.substr(start, i - start));
                start = i + 1;
            }
        }
        if (fields.size() != 2 && fields.size() != 3)
            throw CorruptModelFile("bad n-gram line: " + line);
        Entry e;
        char* endp = nullptr;
        double prob = std::strtod(fields[0].c_str(), &endp);
        if (endp == fields[0].c_str()) throw CorruptModelFile("bad probability: " + line);
        Gram gram;
        std::istringstream toks(fields[1]);
        std::string tok;
        while (toks >> tok) gram.push_back(model.vocab.add(tok));
        if (gram.size() != static_cast<std::size_t>(current))
            throw CorruptModelFile("wrong gram length: " + line);
        if (fields.size() == 3) {
            e.backoff10 = std::strtod(fields[2].c_str(), &endp);
            if (endp == fields[2].c_str()) throw CorruptModelFile("bad backoff: " + line);
        }
        e.has_prob = gram.back() != Vocab::kBos;
        e.prob10 = prob;
        model.tables[current][gram] = e;
    }
    if (current != -1) throw CorruptModelFile("missing \\end\\ marker");
    for (int k = 1; k <= model.order; ++k)
        if (model.tables[k].size() != declared[k - 1])
            throw CorruptModelFile("ngram " + std::to_string(k) + " count mismatch: declared " +
                                   std::to_string(declared[k - 1]) + ", found " +
                                   std::to_string(model.tables[k].size()));
    for (const auto& [gram, e] : model.tables[1])
        if (gram[0] != Vocab::kBos && gram[0] != Vocab::kEos && gram[0] != Vocab::kUnk)
            ++model.real_word_types;
    return model;
}

inline NGramLM load_arpa(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model: " + path);
    return parse_arpa(in);
}

}  // namespace lm

struct DualLMClassifier {
    lm::NGramLM lm_pos;  // label F
    lm::NGramLM lm_neg;  // label M
    Label tie_label = Label::F;
    TokenizerConfig tokenizer;
};

// Trains one LM per label subset on the documents' sentences.
inline DualLMClassifier train_dual_lm(const std::vector<Document>& train_docs, int order,
                                      bool prune, const TokenizerConfig& tokenizer = {}) {
    std::vector<Sentence> pos, neg;
    for (const Document& d : train_docs) {
        if (!d.label) throw UnlabelledDocument(d.id);
        std::vector<Sentence> sents = segment_sentences(d.text, tokenizer);
        auto& dst = (*d.label == Label::F) ? pos : neg;
        dst.insert(dst.end(), sents.begin(), sents.end());
    }
    if (pos.empty() || neg.empty()) throw SingleClassInput();
    auto build = [&](const std::vector<Sentence>& sents) {
        lm::CountTable ct = lm::count_ngrams(sents, order);
        if (prune) ct = lm::prune_singletons(ct);
        return lm::estimate_kn(ct);
    };
    DualLMClassifier clf;
    clf.lm_pos = build(pos);
    clf.lm_neg = build(neg);
    clf.tokenizer = tokenizer;
    return clf;
}

// Mean per-sentence log10 score of a paragraph under one LM.
inline double mean_sentence_score(const lm::NGramLM& model, const std::string& paragraph,
                                  const TokenizerConfig& tokenizer = {}) {
    std::vector<Sentence> sents = segment_sentences(paragraph, tokenizer);
    if (sents.empty()) throw EmptyParagraph();
    double total = 0.0;
    for (const Sentence& s : sents) total += model.score_sentence(s);
    return total / static_cast<double>(sents.size());
}

inline const char* kDualLMMagic = "xgenre-duallm v1";

// Manifest file referencing two ARPA models stored next to it as
// <path>.F.arpa and <path>.M.arpa.
inline void save_dual_lm(const std::string& path, const DualLMClassifier& clf) {
    const std::string pos_name = std::filesystem::path(path).filename().string() + ".F.arpa";
    const std::string neg_name = std::filesystem::path(path).filename().string() + ".M.arpa";
    const auto dir = std::filesystem::path(path).parent_path();
    lm::save_arpa((dir / pos_name).string(), clf.lm_pos);
    lm::save_arpa((dir / neg_name).string(), clf.lm_neg);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write model: " + path);
    out << kDualLMMagic << "\n";
    out << "order=" << clf.lm_pos.order << "\n";
    out << "tie=" << label_char(clf.tie_label) << "\n";
    out << "lowercase=" << (clf.tokenizer.lowercase ? 1 : 0) << "\n";
    out << "lm_pos=" << pos_name << "\n";
    out << "lm_neg=" << neg_name << "\n";
    out << "end\n";
}

inline DualLMClassifier load_dual_lm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model: " + path);
    std::string line;
    if (!std::getline(in, line) || line != kDualLMMagic)
        throw CorruptModelFile("bad magic line, expected '" + std::string(kDualLMMagic) + "'");
    DualLMClassifier clf;
    std::string pos_name, neg_name;
    bool done = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line == "end") {
            done = true;
            break;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw CorruptModelFile("expected key=value, got: " + line);
        std::string key = line.substr(0, eq), value = line.substr(eq + 1);
        if (key == "order") {
            // validated against the loaded models below
        } else if (key == "tie") {
            std::optional<Label> tie = parse_label(value);
            if (!tie) throw CorruptModelFile("bad tie label: " + value);
            clf.tie_label = *tie;
        } else if (key == "lowercase") {
            clf.tokenizer.lowercase = (value == "1");
        } else if (key == "lm_pos") {
            pos_name = value;
        } else if (key == "lm_neg") {
            neg_name = value;
        } else {
            throw CorruptModelFile("unknown key: " + key);
        }
    }
    if (!done) throw CorruptModelFile("missing end marker");
    if (pos_name.empty() || neg_name.empty())
        throw CorruptModelFile("manifest missing lm_pos/lm_neg entries");
    const auto dir = std::filesystem::path(path).parent_path();
    clf.lm_pos = lm::load_arpa((dir / pos_name).string());
    clf.lm_neg = lm::load_arpa((dir / neg_name).string());
    if (clf.lm_pos.order != clf.lm_neg.order)
        throw CorruptModelFile("dual-lm halves have different orders");
    return clf;
}

struct DualLMResult {
    Label label;
    double margin;  // mean_pos - mean_neg, in log10
};

inline DualLMResult classify_dual_lm(const DualLMClassifier& clf, const std::string& paragraph) {
    double mean_pos = mean_sentence_score(clf.lm_pos, paragraph, clf.tokenizer);
    double mean_neg = mean_sentence_score(clf.lm_neg, paragraph, clf.tokenizer);
    double margin = mean_pos - mean_neg;
    Label label = margin > 0 ? Label::F : (margin < 0 ? Label::M : clf.tie_label);
    return {label, margin};
}

}  // namespace xgenre
