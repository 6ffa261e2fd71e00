// Command-line front end: ingest/split corpora, build clusters, train and
// apply the classifiers, combine prediction files, evaluate, and run whole
// scenarios. Exit codes: 0 success, 1 usage error, 2 data error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "xgenre/harness.hpp"

namespace fs = std::filesystem;
using namespace xgenre;

namespace {

std::string detect_magic(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model: " + path);
    std::string first;
    std::getline(in, first);
    if (!first.empty() && first.back() == '\r') first.pop_back();
    return first;
}

std::map<std::string, Label> gold_of(const std::vector<Document>& docs) {
    std::map<std::string, Label> gold;
    for (const Document& d : docs)
        if (d.label) gold[d.id] = *d.label;
    return gold;
}

void write_member(const std::string& path, const std::string& name, double acc,
                  const std::map<std::string, Label>& predictions) {
    LabelEncoding enc;
    std::map<std::string, int> encoded;
    for (const auto& [id, label] : predictions) encoded[id] = enc.encode(label);
    save_predictions(path, EnsembleMember::make(name, acc, std::move(encoded)));
}

int cmd_ingest(const std::string& input, const std::string& output,
               const std::string& dedupe_against) {
    Corpus corpus = ingest_tsv(input);
    if (!dedupe_against.empty()) {
        Corpus provided = ingest_tsv(dedupe_against);
        std::size_t before = corpus.documents.size();
        corpus = dedupe_external(provided, corpus);
        std::cerr << "dedupe: dropped " << before - corpus.documents.size() << " of " << before
                  << " documents\n";
    }
    write_corpus_tsv(output, corpus.documents);
    std::cout << "ingested " << corpus.documents.size() << " documents -> " << output << "\n";
    return 0;
}

int cmd_split(const std::string& corpus_path, const std::string& scenario_text, double fraction,
              uint64_t seed, const std::string& out_train, const std::string& out_valid) {
    Corpus corpus = ingest_tsv(corpus_path);
    ScenarioSpec spec = parse_scenario(scenario_text, fraction);
    spec.seed = seed;
    auto [train, valid] = build_scenario(corpus, spec);
    write_corpus_tsv(out_train, train);
    write_corpus_tsv(out_valid, valid);
    std::cout << "scenario " << spec.name << ": train " << train.size() << ", valid "
              << valid.size() << "\n";
    return 0;
}

int cmd_cluster_build(const std::string& embeddings, std::size_t k, std::size_t max_size,
                      uint64_t seed, const std::string& output) {
    EmbeddingTable emb = load_embeddings(embeddings);
    std::size_t use_k = k == 0 ? std::max<std::size_t>(10, emb.size() / 50) : k;
    if (use_k > emb.size()) use_k = emb.size();
    ClusterMap cm = build_clusters(emb, use_k, max_size, seed);
    save_cluster_map(output, cm);
    std::cout << "clustered " << emb.size() << " words with k=" << use_k << ": kept "
              << cm.sizes.size() << " clusters covering " << cm.assignment.size() << " words -> "
              << output << "\n";
    return 0;
}

int cmd_train(const std::string& model_kind, const std::string& features,
              const std::string& train_path, const std::string& clusters_path,
              const std::string& output, const TrainConfig& tc, double alpha) {
    Corpus corpus = ingest_tsv(train_path);
    FeatureConfig config = parse_feature_config(features);
    ClusterMap cm;
    if (!clusters_path.empty()) cm = load_cluster_map(clusters_path);
    const ClusterMap* cmp = cm.empty() ? nullptr : &cm;

    std::vector<Document> labelled;
    for (const Document& d : corpus.documents)
        if (d.label) labelled.push_back(d);
    FeatureSpace fspace = FeatureSpace::fit(labelled, config, cmp);
    std::vector<SparseVector> X;
    std::vector<Label> y;
    for (const Document& d : labelled) {
        X.push_back(fspace.vectorize(d, cmp));
        y.push_back(*d.label);
    }

    if (model_kind == "logreg") {
        LinearModel model = train_logreg(X, y, fspace.size(), tc, fspace.fingerprint());
        save_linear_model(output, model);
    } else if (model_kind == "nb") {
        NBModel model = train_bernoulli_nb(X, y, fspace.size(), alpha, fspace.fingerprint());
        save_nb_model(output, model);
    } else {
        throw ConfigError("train supports logreg|nb, got: " + model_kind);
    }
    save_feature_space(output + ".fspace", fspace);
    std::cout << "trained " << model_kind << " on " << labelled.size() << " docs, "
              << fspace.size() << " features -> " << output << "\n";
    return 0;
}

int cmd_train_lm(const std::string& train_path, int order, bool prune, bool lowercase,
                 const std::string& output) {
    Corpus corpus = ingest_tsv(train_path);
    std::vector<Document> labelled;
    for (const Document& d : corpus.documents)
        if (d.label) labelled.push_back(d);
    TokenizerConfig tok;
    tok.lowercase = lowercase;
    DualLMClassifier clf = train_dual_lm(labelled, order, prune, tok);
    save_dual_lm(output, clf);
    std::cout << "trained dual order-" << order << " LM" << (prune ? " (pruned)" : "") << " on "
              << labelled.size() << " docs -> " << output << "\n";
    return 0;
}

int cmd_predict(const std::string& model_path, const std::string& input,
                const std::string& clusters_path, const std::string& output,
                const std::string& name, double acc_override) {
    Corpus corpus = ingest_tsv(input);
    std::map<std::string, Label> predictions;
    std::string magic = detect_magic(model_path);

    if (magic == kDualLMMagic) {
        DualLMClassifier clf = load_dual_lm(model_path);
        for (const Document& d : corpus.documents)
            predictions[d.id] = classify_dual_lm(clf, d.text).label;
    } else if (magic == kLinearModelMagic || magic == kNBModelMagic) {
        FeatureSpace fspace = load_feature_space(model_path + ".fspace");
        ClusterMap cm;
        if (!clusters_path.empty()) cm = load_cluster_map(clusters_path);
        if (fspace.uses_cluster_map() && cm.empty())
            throw ConfigError("model was trained with clusters; pass --clusters");
        const ClusterMap* cmp = cm.empty() ? nullptr : &cm;
        if (magic == kLinearModelMagic) {
            LinearModel model = load_linear_model(model_path);
            for (const Document& d : corpus.documents)
                predictions[d.id] =
                    predict_label(model, fspace.vectorize(d, cmp), fspace.fingerprint());
        } else {
            NBModel model = load_nb_model(model_path);
            for (const Document& d : corpus.documents)
                predictions[d.id] = nb_label(model, fspace.vectorize(d, cmp), fspace.fingerprint());
        }
    } else {
        throw CorruptModelFile("unrecognized model file: " + model_path);
    }

    double acc = 0.5;
    if (acc_override >= 0.0) {
        acc = acc_override;
    } else {
        std::map<std::string, Label> gold = gold_of(corpus.documents);
        if (gold.size() == predictions.size() && !gold.empty()) acc = accuracy(predictions, gold);
    }
    write_member(output, name, acc, predictions);
    std::cout << "predicted " << predictions.size() << " documents (acc field " << acc << ") -> "
              << output << "\n";
    return 0;
}

int cmd_ensemble(const std::string& members_dir, const std::string& gold_path,
                 const std::string& output, const std::string& name) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(members_dir))
        if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::vector<EnsembleMember> members;
    for (const auto& f : files) members.push_back(load_external_predictions(f.string()));
    if (members.empty()) throw EmptyEnsemble();

    LabelEncoding enc;
    std::map<std::string, Label> predictions;
    for (const auto& [id, p] : members.front().predictions)
        predictions[id] = combine(members, id).label;

    double acc = 0.5;
    if (!gold_path.empty()) {
        Corpus gold_corpus = ingest_tsv(gold_path);
        std::map<std::string, Label> gold = gold_of(gold_corpus.documents);
        std::map<std::string, Label> on_gold;
        for (const auto& [id, label] : predictions)
            if (gold.count(id)) on_gold[id] = label;
        if (!on_gold.empty()) {
            std::map<std::string, Label> gold_subset;
            for (const auto& [id, label] : on_gold) gold_subset[id] = gold.at(id);
            acc = accuracy(on_gold, gold_subset);
        }
    }
    write_member(output, name, acc, predictions);
    std::cout << "ensembled " << members.size() << " members over " << predictions.size()
              << " documents -> " << output << "\n";
    for (const EnsembleMember& m : members)
        std::cout << "  member " << m.name << " acc=" << m.validation_accuracy
                  << " weight=" << m.weight << "\n";
    return 0;
}

int cmd_evaluate(const std::string& gold_path, const std::string& pred_path) {
    Corpus gold_corpus = ingest_tsv(gold_path);
    std::map<std::string, Label> gold = gold_of(gold_corpus.documents);
    EnsembleMember member = load_external_predictions(pred_path);
    LabelEncoding enc;
    std::map<std::string, Label> predictions;
    for (const auto& [id, p] : member.predictions) predictions[id] = enc.decode(p);
    double acc = accuracy(predictions, gold);
    std::cout << "accuracy " << detail::fmt17(acc) << " (" << format_round2(acc * 100.0)
              << "%) over " << predictions.size() << " documents\n";
    return 0;
}

int cmd_report(RunConfig cfg) {
    Report report = cfg.corpus_path.empty() ? throw ConfigError("report needs a corpus")
                                            : run_scenario(cfg);
    write_report_table(std::cout, report);
    if (!cfg.out_dir.empty()) std::cout << "report files written to " << cfg.out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cross-genre gender prediction toolkit"};
    app.require_subcommand(1);

    // ingest
    std::string in_input, in_output, in_dedupe;
    auto* ingest = app.add_subcommand("ingest", "validate a TSV corpus and write it back");
    ingest->add_option("--input", in_input, "input TSV")->required();
    ingest->add_option("--output", in_output, "output TSV")->required();
    ingest->add_option("--dedupe-against", in_dedupe,
                       "drop documents whose normalized text appears in this corpus");

    // split
    std::string sp_corpus, sp_scenario, sp_train, sp_valid;
    double sp_fraction = 0.10;
    uint64_t sp_seed = 1;
    auto* split = app.add_subcommand("split", "build a scenario's train/valid corpora");
    split->add_option("--corpus", sp_corpus)->required();
    split->add_option("--scenario", sp_scenario,
                      "in-news|in-twitter|in-youtube|cross-news|cross-twitter|cross-youtube|"
                      "in:<genre>|cross:<g>+<g>|<g>")
        ->required();
    split->add_option("--fraction", sp_fraction, "in-domain validation fraction");
    split->add_option("--seed", sp_seed);
    split->add_option("--out-train", sp_train)->required();
    split->add_option("--out-valid", sp_valid)->required();

    // cluster-build
    std::string cb_embeddings, cb_output;
    std::size_t cb_k = 0, cb_max = 500;
    uint64_t cb_seed = 1;
    auto* cluster = app.add_subcommand("cluster-build", "k-means clusters from embeddings");
    cluster->add_option("--embeddings", cb_embeddings)->required();
    cluster->add_option("--k", cb_k, "0 = vocabulary/50 (min 10)");
    cluster->add_option("--max-size", cb_max);
    cluster->add_option("--seed", cb_seed);
    cluster->add_option("--output", cb_output)->required();

    // train
    std::string tr_model = "logreg", tr_features = "best-trad", tr_train, tr_clusters, tr_output;
    TrainConfig tr_cfg;
    double tr_alpha = 1.0;
    auto* train = app.add_subcommand("train", "train a sparse linear classifier");
    train->add_option("--model", tr_model, "logreg|nb");
    train->add_option("--features", tr_features, "preset or comma list (w1,c3,cl,lexM,lexF,dim)");
    train->add_option("--train", tr_train, "training corpus TSV")->required();
    train->add_option("--clusters", tr_clusters, "cluster map TSV");
    train->add_option("--output", tr_output)->required();
    train->add_option("--l2-lambda", tr_cfg.l2_lambda);
    train->add_option("--learning-rate", tr_cfg.learning_rate);
    train->add_option("--epochs", tr_cfg.epochs);
    train->add_option("--batch-size", tr_cfg.batch_size);
    train->add_option("--seed", tr_cfg.seed);
    train->add_option("--alpha", tr_alpha, "NB smoothing");

    // train-lm
    std::string tl_train, tl_output;
    int tl_order = 5;
    bool tl_prune = false, tl_lowercase = false;
    auto* train_lm = app.add_subcommand("train-lm", "train the dual Kneser-Ney classifier");
    train_lm->add_option("--train", tl_train)->required();
    train_lm->add_option("--order", tl_order)->check(CLI::Range(3, 6));
    train_lm->add_flag("--prune", tl_prune, "prune singleton 2-grams and above");
    train_lm->add_flag("--lowercase", tl_lowercase);
    train_lm->add_option("--output", tl_output)->required();

    // predict
    std::string pr_model, pr_input, pr_clusters, pr_output, pr_name = "model";
    double pr_acc = -1.0;
    auto* predict = app.add_subcommand("predict", "apply a trained model to a corpus");
    predict->add_option("--model", pr_model)->required();
    predict->add_option("--input", pr_input)->required();
    predict->add_option("--clusters", pr_clusters);
    predict->add_option("--output", pr_output)->required();
    predict->add_option("--name", pr_name, "member name in the prediction file header");
    predict->add_option("--acc", pr_acc, "override the header accuracy field");

    // ensemble
    std::string en_members, en_gold, en_output, en_name = "ensemble";
    auto* ensemble = app.add_subcommand("ensemble", "weighted combination of prediction files");
    ensemble->add_option("--members", en_members, "directory of prediction files")->required();
    ensemble->add_option("--gold", en_gold, "labelled corpus for the header accuracy");
    ensemble->add_option("--output", en_output)->required();
    ensemble->add_option("--name", en_name);

    // evaluate
    std::string ev_gold, ev_pred;
    auto* evaluate = app.add_subcommand("evaluate", "accuracy of a prediction file");
    evaluate->add_option("--gold", ev_gold)->required();
    evaluate->add_option("--pred", ev_pred)->required();

    // report
    std::string rp_config, rp_corpus, rp_scenario, rp_model, rp_features, rp_embeddings,
        rp_clusters, rp_members, rp_out_dir;
    uint64_t rp_seed = 0;
    int rp_order = 0;
    double rp_fraction = 0.10;
    bool rp_no_prune = false;
    auto* report = app.add_subcommand("report", "run a full scenario and print the report");
    report->add_option("--config", rp_config,
                       "key=value config file (default from XGENRE_CONFIG)");
    report->add_option("--corpus", rp_corpus);
    report->add_option("--scenario", rp_scenario);
    report->add_option("--model", rp_model, "logreg|nb|dual-lm|ensemble");
    report->add_option("--features", rp_features);
    report->add_option("--seed", rp_seed);
    report->add_option("--lm-order", rp_order)->check(CLI::Range(3, 6));
    report->add_flag("--no-prune", rp_no_prune);
    report->add_option("--fraction", rp_fraction);
    report->add_option("--embeddings", rp_embeddings);
    report->add_option("--clusters", rp_clusters);
    report->add_option("--members", rp_members);
    report->add_option("--out-dir", rp_out_dir);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);  // prints the message / help text
        return code == 0 ? 0 : 1;
    }

    try {
        if (*ingest) return cmd_ingest(in_input, in_output, in_dedupe);
        if (*split)
            return cmd_split(sp_corpus, sp_scenario, sp_fraction, sp_seed, sp_train, sp_valid);
        if (*cluster) return cmd_cluster_build(cb_embeddings, cb_k, cb_max, cb_seed, cb_output);
        if (*train)
            return cmd_train(tr_model, tr_features, tr_train, tr_clusters, tr_output, tr_cfg,
                             tr_alpha);
        if (*train_lm) return cmd_train_lm(tl_train, tl_order, tl_prune, tl_lowercase, tl_output);
        if (*predict)
            return cmd_predict(pr_model, pr_input, pr_clusters, pr_output, pr_name, pr_acc);
        if (*ensemble) return cmd_ensemble(en_members, en_gold, en_output, en_name);
        if (*evaluate) return cmd_evaluate(ev_gold, ev_pred);
        if (*report) {
            RunConfig cfg;
            std::string config_path = rp_config;
            if (config_path.empty()) {
                const char* env = std::getenv("XGENRE_CONFIG");
                if (env != nullptr && *env != '\0' && fs::exists(env)) config_path = env;
            }
            if (!config_path.empty()) cfg = parse_run_config_file(config_path);
            if (!rp_corpus.empty()) cfg.corpus_path = rp_corpus;
            if (!rp_scenario.empty()) cfg.scenario = parse_scenario(rp_scenario, rp_fraction);
            if (!rp_model.empty()) cfg.model = parse_model_kind(rp_model);
            if (!rp_features.empty()) cfg.features = parse_feature_config(rp_features);
            if (rp_seed != 0) cfg.seed = rp_seed;
            if (rp_order != 0) cfg.lm_order = rp_order;
            if (rp_no_prune) cfg.lm_prune = false;
            if (!rp_embeddings.empty()) cfg.embeddings_path = rp_embeddings;
            if (!rp_clusters.empty()) cfg.clusters_path = rp_clusters;
            if (!rp_members.empty()) cfg.members_dir = rp_members;
            if (!rp_out_dir.empty()) cfg.out_dir = rp_out_dir;
            if (cfg.scenario.name.empty()) throw ConfigError("report needs a scenario");
            return cmd_report(cfg);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
