#pragma once

// Embedding-based word clusters: load a fasttext-style .vec table, run seeded
// k-means, then drop clusters that are singletons or larger than max_size.
// Words of dropped clusters keep their surface form downstream.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "xgenre/errors.hpp"
#include "xgenre/unicode.hpp"

namespace xgenre {

struct EmbeddingTable {
    std::size_t dimension = 0;
    std::vector<std::string> words;          // insertion order = file order
    std::vector<std::vector<double>> vectors;  // parallel to words

    std::size_t size() const { return words.size(); }
};

inline EmbeddingTable parse_embeddings(std::istream& in) {
    EmbeddingTable table;
    std::string line;
    if (!std::getline(in, line)) throw MalformedEmbedding(1, "missing header line");
    std::istringstream header(line);
    std::size_t count = 0;
    if (!(header >> count >> table.dimension) || table.dimension == 0)
        throw MalformedEmbedding(1, "header must be '<count> <dimension>'");
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string word;
        row >> word;
        if (word.empty()) throw MalformedEmbedding(lineno, "missing word");
        std::vector<double> vec(table.dimension);
        std::string component;
        for (std::size_t d = 0; d < table.dimension; ++d) {
            if (!(row >> component))
                throw MalformedEmbedding(lineno, "expected " + std::to_string(table.dimension) +
                                                     " components");
            char* end = nullptr;
            vec[d] = std::strtod(component.c_str(), &end);  // strtod accepts nan/inf forms
            if (end == component.c_str() || *end != '\0')
                throw MalformedEmbedding(lineno, "bad component: " + component);
            if (!std::isfinite(vec[d])) throw NonFiniteEmbedding(word);
        }
        table.words.push_back(word);
        table.vectors.push_back(std::move(vec));
    }
    if (count != table.words.size())
        throw MalformedEmbedding(lineno, "header count " + std::to_string(count) +
                                             " does not match " + std::to_string(table.words.size()) +
                                             " rows");
    return table;
}

inline EmbeddingTable load_embeddings(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open embedding file: " + path);
    return parse_embeddings(in);
}

struct ClusterMap {
    std::unordered_map<std::string, uint32_t> assignment;  // lowercased word -> cluster id
    std::map<uint32_t, std::size_t> sizes;                 // surviving clusters only

    bool empty() const { return assignment.empty(); }
};

namespace detail {

inline double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

// Uniform double in [0,1) from the raw engine; distributions from <random>
// are not bit-stable across standard libraries.
inline double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

// Seeded k-means++ initialization followed by Lloyd iterations (at most
// max_iters, or until the largest centroid displacement drops below tol).
// Returns per-point cluster indices in [0,k).
inline std::vector<uint32_t> kmeans(const std::vector<std::vector<double>>& points, std::size_t k,
                                    uint64_t seed, std::size_t max_iters = 100,
                                    double tol = 1e-6) {
    if (points.size() < k || k == 0) throw TooFewWords(points.size(), k);
    const std::size_t n = points.size();
    const std::size_t dim = points[0].size();
    std::mt19937_64 rng(seed);

    std::vector<std::vector<double>> centroids;
    centroids.reserve(k);
    centroids.push_back(points[rng() % n]);
    std::vector<double> best_sq(n, std::numeric_limits<double>::infinity());
    while (centroids.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            best_sq[i] = std::min(best_sq[i], detail::sq_dist(points[i], centroids.back()));
            total += best_sq[i];
        }
        std::size_t pick = 0;
        if (total > 0.0) {
            double target = detail::unit_uniform(rng) * total;
            double acc = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += best_sq[i];
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = rng() % n;  // all remaining points coincide with a centroid
        }
        centroids.push_back(points[pick]);
    }

    std::vector<uint32_t> assign(n, 0);
    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            uint32_t arg = 0;
            for (std::size_t c = 0; c < k; ++c) {
                double d = detail::sq_dist(points[i], centroids[c]);
                if (d < best) {
                    best = d;
                    arg = static_cast<uint32_t>(c);
                }
            }
            assign[i] = arg;
        }
        std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            ++counts[assign[i]];
            for (std::size_t d = 0; d < dim; ++d) sums[assign[i]][d] += points[i][d];
        }
        double max_move_sq = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;  // empty cluster keeps its centroid
            for (std::size_t d = 0; d < dim; ++d) sums[c][d] /= static_cast<double>(counts[c]);
            max_move_sq = std::max(max_move_sq, detail::sq_dist(sums[c], centroids[c]));
            centroids[c] = std::move(sums[c]);
        }
        if (std::sqrt(max_move_sq) < tol) break;
    }
    return assign;
}

// Drops clusters of size 1 or size > max_size; words of dropped clusters are
// absent from the assignment. Matching downstream is on lowercase forms.
inline ClusterMap build_clusters(const EmbeddingTable& emb, std::size_t k, std::size_t max_size,
                                 uint64_t seed) {
    if (emb.size() < k || k == 0) throw TooFewWords(emb.size(), k);
    for (std::size_t i = 0; i < emb.size(); ++i)
        for (double v : emb.vectors[i])
            if (!std::isfinite(v)) throw NonFiniteEmbedding(emb.words[i]);

    std::vector<uint32_t> assign = kmeans(emb.vectors, k, seed);
    std::vector<std::size_t> sizes(k, 0);
    for (uint32_t c : assign) ++sizes[c];

    ClusterMap cm;
    for (std::size_t i = 0; i < emb.size(); ++i) {
        uint32_t c = assign[i];
        if (sizes[c] < 2 || sizes[c] > max_size) continue;
        cm.assignment[uni::lowercase(emb.words[i])] = c;
    }
    for (const auto& [word, c] : cm.assignment) ++cm.sizes[c];
    return cm;
}

// Replaces tokens found in the map (on their lowercase form) by CL_<id>.
inline std::vector<std::string> map_to_clusters(const std::vector<std::string>& tokens,
                                                const ClusterMap& cm) {
    if (cm.empty()) return tokens;
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const std::string& tok : tokens) {
        auto it = cm.assignment.find(uni::lowercase(tok));
        out.push_back(it == cm.assignment.end() ? tok : "CL_" + std::to_string(it->second));
    }
    return out;
}

inline void save_cluster_map(std::ostream& out, const ClusterMap& cm) {
    std::map<std::string, uint32_t> sorted(cm.assignment.begin(), cm.assignment.end());
    for (const auto& [word, c] : sorted) out << word << '\t' << c << '\n';
}

inline void save_cluster_map(const std::string& path, const ClusterMap& cm) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write cluster map: " + path);
    save_cluster_map(out, cm);
}

inline ClusterMap parse_cluster_map(std::istream& in) {
    ClusterMap cm;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t tab = line.find('\t');
        if (tab == std::string::npos || tab == 0)
            throw CorruptModelFile("cluster map line " + std::to_string(lineno) +
                                   ": expected word\\tcluster_id");
        std::string word = line.substr(0, tab);
        uint32_t c = 0;
        try {
            c = static_cast<uint32_t>(std::stoul(line.substr(tab + 1)));
        } catch (const std::exception&) {
            throw CorruptModelFile("cluster map line " + std::to_string(lineno) +
                                   ": bad cluster id");
        }
        if (cm.assignment.count(word))
            throw CorruptModelFile("cluster map has duplicate word: " + word);
        cm.assignment[word] = c;
    }
    for (const auto& [word, c] : cm.assignment) ++cm.sizes[c];
    return cm;
}

inline ClusterMap load_cluster_map(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open cluster map: " + path);
    return parse_cluster_map(in);
}

}  // namespace xgenre
