#pragma once

// Scenario runner and report arithmetic: builds one of the six experimental
// scenarios, fits strictly on the training side, predicts the validation
// side, and emits a report (human-readable table + key-value file) plus a
// prediction file.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "xgenre/corpus.hpp"
#include "xgenre/ensemble.hpp"
#include "xgenre/errors.hpp"
#include "xgenre/features.hpp"
#include "xgenre/linear.hpp"
#include "xgenre/ngram_lm.hpp"

namespace xgenre {

inline double accuracy(const std::map<std::string, Label>& predictions,
                       const std::map<std::string, Label>& gold) {
    if (predictions.empty() || gold.empty()) throw EmptyInput("accuracy");
    if (predictions.size() != gold.size())
        throw KeyMismatch("prediction and gold sets have different sizes");
    std::size_t hits = 0;
    for (const auto& [id, label] : predictions) {
        auto it = gold.find(id);
        if (it == gold.end()) throw KeyMismatch("no gold label for doc " + id);
        if (it->second == label) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

inline double macro_average(const std::vector<double>& values) {
    if (values.empty()) throw EmptyInput("macro_average");
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

// Display rounding, half away from zero, two decimals. 56.123 -> "56.12",
// 64.6066 -> "64.61", -0.125 -> "-0.13".
inline std::string format_round2(double v) {
    long long scaled = static_cast<long long>(std::floor(std::abs(v) * 100.0 + 0.5));
    std::ostringstream out;
    if (v < 0 && scaled != 0) out << '-';
    out << scaled / 100 << '.' << std::setw(2) << std::setfill('0') << scaled % 100;
    return out.str();
}

enum class ModelKind { LogReg, NB, DualLM, Ensemble };

inline std::string model_kind_str(ModelKind k) {
    switch (k) {
        case ModelKind::LogReg: return "logreg";
        case ModelKind::NB: return "nb";
        case ModelKind::DualLM: return "dual-lm";
        case ModelKind::Ensemble: return "ensemble";
    }
    return "logreg";
}

inline ModelKind parse_model_kind(const std::string& s) {
    if (s == "logreg") return ModelKind::LogReg;
    if (s == "nb") return ModelKind::NB;
    if (s == "dual-lm" || s == "duallm") return ModelKind::DualLM;
    if (s == "ensemble") return ModelKind::Ensemble;
    throw ConfigError("unknown model kind: " + s);
}

struct RunConfig {
    ScenarioSpec scenario;
    ModelKind model = ModelKind::LogReg;
    FeatureConfig features = best_trad_config();
    uint64_t seed = 0;          // submodule seeds derive from this
    int lm_order = 5;
    bool lm_prune = true;
    double nb_alpha = 1.0;
    TrainConfig train;

    std::string corpus_path;       // empty when a corpus is passed in memory
    std::string embeddings_path;   // optional; build clusters from it
    std::string clusters_path;     // optional; precomputed cluster map
    std::size_t cluster_k = 0;     // 0 = vocabulary/50, floor 10
    std::size_t cluster_max_size = 500;
    std::string members_dir;       // ensemble mode
    std::string out_dir;           // where reports/predictions land; empty = no files

    uint64_t split_seed() const { return seed + 1; }
    uint64_t train_seed() const { return seed + 2; }
    uint64_t cluster_seed() const { return seed + 3; }
};

struct MemberInfo {
    std::string name;
    double validation_accuracy;
    double weight;
};

struct Report {
    std::string scenario_name;
    std::string mode;
    std::string model;
    std::string features;
    uint64_t seed = 0;
    int lm_order = 0;
    std::size_t train_size = 0;
    std::size_t valid_size = 0;
    std::map<std::string, double> genre_accuracy;  // genre string -> accuracy in [0,1]
    double macro_avg = 0.0;
    std::vector<MemberInfo> members;
    std::map<std::string, Label> predictions;
};

inline void write_report_kv(std::ostream& out, const Report& r) {
    out << "xgenre-report v1\n";
    out << "scenario=" << r.scenario_name << "\n";
    out << "mode=" << r.mode << "\n";
    out << "model=" << r.model << "\n";
    out << "features=" << r.features << "\n";
    out << "seed=" << r.seed << "\n";
    out << "seed_split=" << r.seed + 1 << "\n";
    out << "seed_train=" << r.seed + 2 << "\n";
    out << "seed_cluster=" << r.seed + 3 << "\n";
    if (r.lm_order > 0) out << "lm_order=" << r.lm_order << "\n";
    out << "train_size=" << r.train_size << "\n";
    out << "valid_size=" << r.valid_size << "\n";
    for (const auto& [genre, acc] : r.genre_accuracy)
        out << "genre_accuracy " << genre << "=" << detail::fmt17(acc) << "\n";
    out << "macro_average=" << detail::fmt17(r.macro_avg) << "\n";
    for (const MemberInfo& m : r.members)
        out << "member " << m.name << " acc=" << detail::fmt17(m.validation_accuracy)
            << " weight=" << detail::fmt17(m.weight) << "\n";
    out << "end\n";
}

inline void write_report_table(std::ostream& out, const Report& r) {
    out << "scenario: " << r.scenario_name << " (" << r.mode << ")\n";
    out << "model:    " << r.model;
    if (r.model == "logreg" || r.model == "nb") out << " [" << r.features << "]";
    if (r.lm_order > 0) out << " order=" << r.lm_order;
    out << "  seed=" << r.seed << "\n";
    out << "train/valid: " << r.train_size << "/" << r.valid_size << "\n";
    out << "---------------------------------\n";
    for (const auto& [genre, acc] : r.genre_accuracy) {
        out << std::left << std::setw(12) << genre << std::right << std::setw(8)
            << format_round2(acc * 100.0) << "%\n";
    }
    out << std::left << std::setw(12) << "AVG" << std::right << std::setw(8)
        << format_round2(r.macro_avg * 100.0) << "%\n";
    if (!r.members.empty()) {
        out << "---------------------------------\n";
        for (const MemberInfo& m : r.members)
            out << "member " << m.name << " acc=" << format_round2(m.validation_accuracy * 100.0)
                << "% weight=" << detail::fmt17(m.weight) << "\n";
    }
}

namespace detail {

inline void require_readable(const std::string& path, const std::string& what) {
    if (path.empty()) return;
    std::ifstream probe(path);
    if (!probe) throw ConfigError(what + " file not found: " + path);
}

}  // namespace detail

// Core protocol: split -> fit on train only -> predict validation. No
// validation document reaches any fitting step.
inline Report run_scenario(const Corpus& corpus, const RunConfig& cfg) {
    detail::require_readable(cfg.embeddings_path, "embeddings");
    detail::require_readable(cfg.clusters_path, "cluster map");
    if (cfg.model == ModelKind::Ensemble && cfg.members_dir.empty())
        throw ConfigError("ensemble mode requires a members directory");
    if (cfg.model == ModelKind::DualLM && (cfg.lm_order < 1 || cfg.lm_order > lm::kMaxOrder))
        throw ConfigError("lm order out of range");

    ScenarioSpec spec = cfg.scenario;
    if (spec.seed == 0) spec.seed = cfg.split_seed();
    auto [train, valid] = build_scenario(corpus, spec);

    Report report;
    report.scenario_name = spec.name;
    report.mode = spec.mode == ScenarioSpec::Mode::InDomain ? "in-domain" : "cross-genre";
    report.model = model_kind_str(cfg.model);
    report.features = cfg.features.str();
    report.seed = cfg.seed;
    report.lm_order = cfg.model == ModelKind::DualLM ? cfg.lm_order : 0;
    report.train_size = train.size();
    report.valid_size = valid.size();

    std::map<std::string, Label> gold;
    for (const Document& d : valid) gold[d.id] = *d.label;

    std::map<std::string, Label> predicted;
    if (cfg.model == ModelKind::LogReg || cfg.model == ModelKind::NB) {
        // Optional cluster map: precomputed file wins over building from
        // embeddings; with neither, cluster features fall back to surface
        // forms.
        ClusterMap cm;
        if (cfg.features.clusters) {
            if (!cfg.clusters_path.empty()) {
                cm = load_cluster_map(cfg.clusters_path);
            } else if (!cfg.embeddings_path.empty()) {
                EmbeddingTable emb = load_embeddings(cfg.embeddings_path);
                std::size_t k = cfg.cluster_k;
                if (k == 0) k = std::max<std::size_t>(10, emb.size() / 50);
                if (k > emb.size()) k = emb.size();
                cm = build_clusters(emb, k, cfg.cluster_max_size, cfg.cluster_seed());
            }
        }
        const ClusterMap* cmp = cm.empty() ? nullptr : &cm;
        FeatureSpace fs = FeatureSpace::fit(train, cfg.features, cmp);
        std::vector<SparseVector> X;
        std::vector<Label> y;
        X.reserve(train.size());
        for (const Document& d : train) {
            X.push_back(fs.vectorize(d, cmp));
            y.push_back(*d.label);
        }
        if (cfg.model == ModelKind::LogReg) {
            TrainConfig tc = cfg.train;
            tc.seed = cfg.train_seed();
            LinearModel model = train_logreg(X, y, fs.size(), tc, fs.fingerprint());
            for (const Document& d : valid)
                predicted[d.id] = predict_label(model, fs.vectorize(d, cmp), fs.fingerprint());
        } else {
            NBModel model = train_bernoulli_nb(X, y, fs.size(), cfg.nb_alpha, fs.fingerprint());
            for (const Document& d : valid)
                predicted[d.id] = nb_label(model, fs.vectorize(d, cmp), fs.fingerprint());
        }
    } else if (cfg.model == ModelKind::DualLM) {
        DualLMClassifier clf = train_dual_lm(train, cfg.lm_order, cfg.lm_prune,
                                             cfg.features.tokenizer);
        for (const Document& d : valid) predicted[d.id] = classify_dual_lm(clf, d.text).label;
    } else {
        std::vector<EnsembleMember> members;
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(cfg.members_dir))
            if (entry.is_regular_file()) files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& path : files) members.push_back(load_external_predictions(path.string()));
        if (members.empty()) throw EmptyEnsemble();
        for (const EnsembleMember& m : members)
            report.members.push_back({m.name, m.validation_accuracy, m.weight});
        for (const auto& [id, label] : gold) predicted[id] = combine(members, id).label;
    }

    // Per-genre accuracy over the validation set (one genre per scenario in
    // the six standard runs, but the report supports several).
    std::map<std::string, std::map<std::string, Label>> by_genre_pred, by_genre_gold;
    for (const Document& d : valid) {
        by_genre_pred[d.genre.str()][d.id] = predicted.at(d.id);
        by_genre_gold[d.genre.str()][d.id] = *d.label;
    }
    std::vector<double> accs;
    for (const auto& [genre, preds] : by_genre_pred) {
        double acc = accuracy(preds, by_genre_gold.at(genre));
        report.genre_accuracy[genre] = acc;
        accs.push_back(acc);
    }
    report.macro_avg = macro_average(accs);
    report.predictions = predicted;

    if (cfg.model != ModelKind::Ensemble) {
        double overall = accuracy(predicted, gold);
        report.members.push_back(
            {model_kind_str(cfg.model), overall, member_weight(overall)});
    }

    if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        std::filesystem::path dir(cfg.out_dir);
        std::ofstream kv(dir / (spec.name + ".report.kv"), std::ios::binary);
        write_report_kv(kv, report);
        std::ofstream table(dir / (spec.name + ".report.txt"), std::ios::binary);
        write_report_table(table, report);
        std::map<std::string, int> encoded;
        LabelEncoding enc;
        for (const auto& [id, label] : predicted) encoded[id] = enc.encode(label);
        double overall = accuracy(predicted, gold);
        save_predictions((dir / (spec.name + ".pred")).string(),
                         EnsembleMember::make(model_kind_str(cfg.model) + "_" + spec.name,
                                              overall, std::move(encoded)));
    }
    return report;
}

inline Report run_scenario(const RunConfig& cfg) {
    if (cfg.corpus_path.empty()) throw ConfigError("no corpus path configured");
    detail::require_readable(cfg.corpus_path, "corpus");
    Corpus corpus = ingest_tsv(cfg.corpus_path);
    return run_scenario(corpus, cfg);
}

// The six standard scenarios. InDomain fraction defaults to 0.10.
inline ScenarioSpec parse_scenario(const std::string& text, double fraction = 0.10) {
    auto in_domain = [&](const Genre& g, const std::string& name) {
        ScenarioSpec s;
        s.name = name;
        s.mode = ScenarioSpec::Mode::InDomain;
        s.train_genres = {g};
        s.valid_genre = g;
        s.valid_fraction = fraction;
        return s;
    };
    auto cross = [&](std::vector<Genre> tr, const Genre& va, const std::string& name) {
        ScenarioSpec s;
        s.name = name;
        s.mode = ScenarioSpec::Mode::CrossGenre;
        s.train_genres = std::move(tr);
        s.valid_genre = va;
        return s;
    };
    if (text == "in-news") return in_domain(Genre::news(), text);
    if (text == "in-twitter") return in_domain(Genre::twitter(), text);
    if (text == "in-youtube") return in_domain(Genre::youtube(), text);
    if (text == "cross-youtube")
        return cross({Genre::news(), Genre::twitter()}, Genre::youtube(), text);
    if (text == "cross-twitter")
        return cross({Genre::news(), Genre::youtube()}, Genre::twitter(), text);
    if (text == "cross-news")
        return cross({Genre::twitter(), Genre::youtube()}, Genre::news(), text);

    // Explicit forms: "in:<genre>" and "cross:<genre>+<genre>|<genre>".
    if (text.rfind("in:", 0) == 0) {
        std::optional<Genre> g = parse_genre(text.substr(3));
        if (!g) throw ConfigError("bad scenario genre: " + text);
        return in_domain(*g, text);
    }
    if (text.rfind("cross:", 0) == 0) {
        std::string body = text.substr(6);
        std::size_t bar = body.rfind('|');
        if (bar == std::string::npos) throw ConfigError("cross scenario needs '|': " + text);
        std::optional<Genre> va = parse_genre(body.substr(bar + 1));
        if (!va) throw ConfigError("bad scenario genre: " + text);
        std::vector<Genre> tr;
        std::string trains = body.substr(0, bar);
        std::size_t start = 0;
        while (start <= trains.size()) {
            std::size_t plus = trains.find('+', start);
            std::string tok = trains.substr(start, plus == std::string::npos ? std::string::npos
                                                                             : plus - start);
            std::optional<Genre> g = parse_genre(tok);
            if (!g) throw ConfigError("bad scenario genre: " + tok);
            if (*g == *va) throw ConfigError("validation genre cannot be a training genre");
            tr.push_back(*g);
            if (plus == std::string::npos) break;
            start = plus + 1;
        }
        if (tr.empty()) throw ConfigError("cross scenario needs training genres: " + text);
        ScenarioSpec s = cross(std::move(tr), *va, text);
        return s;
    }
    throw ConfigError("unknown scenario: " + text);
}

// Flat key=value config file mirroring RunConfig. '#' starts a comment line.
inline RunConfig parse_run_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    RunConfig cfg;
    std::string scenario_text;
    double fraction = 0.10;
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        auto [key, value] = detail::parse_kv(line);
        kv[key] = value;
    }
    auto take = [&](const char* key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        return it->second;
    };
    if (auto v = take("valid_fraction")) fraction = detail::parse_double(*v);
    if (auto v = take("scenario")) scenario_text = *v;
    if (!scenario_text.empty()) cfg.scenario = parse_scenario(scenario_text, fraction);
    if (auto v = take("model")) cfg.model = parse_model_kind(*v);
    if (auto v = take("features")) cfg.features = parse_feature_config(*v);
    if (auto v = take("seed")) cfg.seed = detail::parse_u64(*v);
    if (auto v = take("lm_order")) cfg.lm_order = static_cast<int>(detail::parse_u64(*v));
    if (auto v = take("lm_prune")) cfg.lm_prune = (*v == "1" || *v == "true");
    if (auto v = take("nb_alpha")) cfg.nb_alpha = detail::parse_double(*v);
    if (auto v = take("l2_lambda")) cfg.train.l2_lambda = detail::parse_double(*v);
    if (auto v = take("learning_rate")) cfg.train.learning_rate = detail::parse_double(*v);
    if (auto v = take("epochs")) cfg.train.epochs = detail::parse_u64(*v);
    if (auto v = take("batch_size")) cfg.train.batch_size = detail::parse_u64(*v);
    if (auto v = take("corpus")) cfg.corpus_path = *v;
    if (auto v = take("embeddings")) cfg.embeddings_path = *v;
    if (auto v = take("clusters")) cfg.clusters_path = *v;
    if (auto v = take("cluster_k")) cfg.cluster_k = detail::parse_u64(*v);
    if (auto v = take("cluster_max_size")) cfg.cluster_max_size = detail::parse_u64(*v);
    if (auto v = take("members")) cfg.members_dir = *v;
    if (auto v = take("out_dir")) cfg.out_dir = *v;
    return cfg;
}

}  // namespace xgenre
