#pragma once

// Sparse-input binary classifiers: L2-regularized logistic regression trained
// by seeded mini-batch gradient descent, and Bernoulli naive Bayes. Labels
// map F -> 1, M -> 0; predicted probability is P(F | x).

#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "xgenre/corpus.hpp"
#include "xgenre/errors.hpp"
#include "xgenre/features.hpp"

namespace xgenre {

struct TrainConfig {
    double l2_lambda = 1e-4;
    double learning_rate = 0.1;
    std::size_t epochs = 20;
    std::size_t batch_size = 32;
    uint64_t seed = 0;
};

struct LinearModel {
    std::vector<double> weights;  // length = feature-space size
    double bias = 0.0;
    std::string trained_on;       // feature-space fingerprint
    TrainConfig config;
};

inline double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

// log(1 + e^z) without overflow.
inline double log1p_exp(double z) {
    if (z > 0.0) return z + std::log1p(std::exp(-z));
    return std::log1p(std::exp(z));
}

// J(w,b) = sum_i [log(1+e^{z_i}) - y_i z_i] + (lambda/2)||w||^2, z = w.x + b.
inline double logreg_objective(const std::vector<SparseVector>& X, const std::vector<Label>& y,
                               const std::vector<double>& w, double bias, double l2_lambda) {
    double obj = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        double z = X[i].dot(w) + bias;
        double target = (y[i] == Label::F) ? 1.0 : 0.0;
        obj += log1p_exp(z) - target * z;
    }
    double reg = 0.0;
    for (double v : w) reg += v * v;
    return obj + 0.5 * l2_lambda * reg;
}

// Full-batch gradient of logreg_objective; grad_w must have feature-space size.
inline void logreg_gradient(const std::vector<SparseVector>& X, const std::vector<Label>& y,
                            const std::vector<double>& w, double bias, double l2_lambda,
                            std::vector<double>& grad_w, double& grad_b) {
    std::fill(grad_w.begin(), grad_w.end(), 0.0);
    grad_b = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        double z = X[i].dot(w) + bias;
        double residual = sigmoid(z) - ((y[i] == Label::F) ? 1.0 : 0.0);
        for (const auto& [id, val] : X[i].entries) grad_w[id] += residual * val;
        grad_b += residual;
    }
    for (std::size_t j = 0; j < w.size(); ++j) grad_w[j] += l2_lambda * w[j];
}

namespace detail {

template <typename T>
void seeded_shuffle_vec(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng() % i]);
}

}  // namespace detail

// Seeded mini-batch gradient descent with an epoch-level safeguard: if an
// epoch raises the full-batch objective, the epoch is rolled back and the
// step size halved, so the reported objective is non-increasing.
inline LinearModel train_logreg(const std::vector<SparseVector>& X, const std::vector<Label>& y,
                                std::size_t feature_count, const TrainConfig& cfg,
                                const std::string& fingerprint = "") {
    if (X.size() != y.size()) throw DimensionMismatch("X and y lengths differ");
    if (X.size() < 2) throw EmptyInput("train_logreg needs at least 2 examples");
    bool saw_f = false, saw_m = false;
    for (Label l : y) (l == Label::F ? saw_f : saw_m) = true;
    if (!saw_f || !saw_m) throw SingleClassInput();
    for (const SparseVector& x : X)
        for (const auto& [id, val] : x.entries)
            if (id >= feature_count) throw DimensionMismatch("feature id beyond space size");

    LinearModel model;
    model.weights.assign(feature_count, 0.0);
    model.bias = 0.0;
    model.trained_on = fingerprint;
    model.config = cfg;

    const std::size_t n = X.size();
    const std::size_t batch = std::min(cfg.batch_size == 0 ? n : cfg.batch_size, n);
    double lr = cfg.learning_rate;
    double objective = logreg_objective(X, y, model.weights, model.bias, cfg.l2_lambda);

    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::mt19937_64 rng(cfg.seed + 0x9E3779B97F4A7C15ull * (epoch + 1));
        detail::seeded_shuffle_vec(perm, rng);
        std::vector<double> snapshot_w = model.weights;
        double snapshot_b = model.bias;

        bool accepted = false;
        for (int attempt = 0; attempt < 40 && !accepted; ++attempt) {
            const double eta = lr / static_cast<double>(n);
            for (std::size_t start = 0; start < n; start += batch) {
                std::size_t end = std::min(start + batch, n);
                double scale = static_cast<double>(n) / static_cast<double>(end - start);
                std::vector<std::pair<uint32_t, double>> sparse_grad;
                double gb = 0.0;
                for (std::size_t p = start; p < end; ++p) {
                    const SparseVector& x = X[perm[p]];
                    double z = x.dot(model.weights) + model.bias;
                    double residual = sigmoid(z) - ((y[perm[p]] == Label::F) ? 1.0 : 0.0);
                    for (const auto& [id, val] : x.entries)
                        sparse_grad.emplace_back(id, residual * val);
                    gb += residual;
                }
                double shrink = 1.0 - eta * cfg.l2_lambda;
                if (shrink < 0.0) shrink = 0.0;
                for (double& wj : model.weights) wj *= shrink;
                double step = eta * scale;
                for (const auto& [id, g] : sparse_grad) model.weights[id] -= step * g;
                model.bias -= step * gb;
            }
            double new_objective =
                logreg_objective(X, y, model.weights, model.bias, cfg.l2_lambda);
            if (new_objective <= objective + 1e-12) {
                objective = new_objective;
                accepted = true;
            } else {
                model.weights = snapshot_w;
                model.bias = snapshot_b;
                lr *= 0.5;
            }
        }
    }
    return model;
}

inline double predict_proba(const LinearModel& m, const SparseVector& x,
                            const std::string& fingerprint = "") {
    if (!m.trained_on.empty() && !fingerprint.empty() && m.trained_on != fingerprint)
        throw FingerprintMismatch(m.trained_on, fingerprint);
    return sigmoid(x.dot(m.weights) + m.bias);
}

inline Label predict_label(const LinearModel& m, const SparseVector& x,
                           const std::string& fingerprint = "") {
    return predict_proba(m, x, fingerprint) >= 0.5 ? Label::F : Label::M;
}

// Bernoulli naive Bayes. Feature presence is x > 0; counts are kept as
// integers so persistence can rebuild the exact same model.
struct NBModel {
    double alpha = 1.0;
    uint64_t n_docs[2] = {0, 0};                 // [F, M]
    std::vector<uint64_t> present_counts[2];     // per feature, per label
    std::string trained_on;

    // Derived, rebuilt by finalize().
    double log_prior[2] = {0.0, 0.0};
    std::vector<double> log_present[2];
    std::vector<double> log_absent[2];

    void finalize() {
        uint64_t total = n_docs[0] + n_docs[1];
        for (int c = 0; c < 2; ++c) {
            log_prior[c] = std::log(static_cast<double>(n_docs[c]) / static_cast<double>(total));
            std::size_t dim = present_counts[c].size();
            log_present[c].resize(dim);
            log_absent[c].resize(dim);
            for (std::size_t j = 0; j < dim; ++j) {
                double p = (static_cast<double>(present_counts[c][j]) + alpha) /
                           (static_cast<double>(n_docs[c]) + 2.0 * alpha);
                log_present[c][j] = std::log(p);
                log_absent[c][j] = std::log(1.0 - p);
            }
        }
    }
};

inline NBModel train_bernoulli_nb(const std::vector<SparseVector>& X, const std::vector<Label>& y,
                                  std::size_t feature_count, double alpha,
                                  const std::string& fingerprint = "") {
    if (X.size() != y.size()) throw DimensionMismatch("X and y lengths differ");
    if (X.size() < 2) throw EmptyInput("train_bernoulli_nb needs at least 2 examples");
    if (!(alpha > 0.0)) throw OutOfRange("alpha must be > 0");
    NBModel model;
    model.alpha = alpha;
    model.trained_on = fingerprint;
    model.present_counts[0].assign(feature_count, 0);
    model.present_counts[1].assign(feature_count, 0);
    for (std::size_t i = 0; i < X.size(); ++i) {
        int c = (y[i] == Label::F) ? 0 : 1;
        ++model.n_docs[c];
        for (const auto& [id, val] : X[i].entries) {
            if (id >= feature_count) throw DimensionMismatch("feature id beyond space size");
            if (val > 0.0) ++model.present_counts[c][id];
        }
    }
    if (model.n_docs[0] == 0 || model.n_docs[1] == 0) throw SingleClassInput();
    model.finalize();
    return model;
}

// P(F | x) via log-space Bayes rule over binarized features.
inline double nb_posterior(const NBModel& m, const SparseVector& x,
                           const std::string& fingerprint = "") {
    if (!m.trained_on.empty() && !fingerprint.empty() && m.trained_on != fingerprint)
        throw FingerprintMismatch(m.trained_on, fingerprint);
    double joint[2];
    for (int c = 0; c < 2; ++c) {
        double acc = m.log_prior[c];
        for (std::size_t j = 0; j < m.log_absent[c].size(); ++j) acc += m.log_absent[c][j];
        for (const auto& [id, val] : x.entries)
            if (val > 0.0 && id < m.log_present[c].size())
                acc += m.log_present[c][id] - m.log_absent[c][id];
        joint[c] = acc;
    }
    double hi = std::max(joint[0], joint[1]);
    double denom = std::exp(joint[0] - hi) + std::exp(joint[1] - hi);
    return std::exp(joint[0] - hi) / denom;
}

inline Label nb_label(const NBModel& m, const SparseVector& x,
                      const std::string& fingerprint = "") {
    return nb_posterior(m, x, fingerprint) >= 0.5 ? Label::F : Label::M;
}

// Versioned key-value persistence. Floats are written with 17 significant
// digits so reload reproduces bit-identical predictions.

namespace detail {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::pair<std::string, std::string> parse_kv(const std::string& line) {
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw CorruptModelFile("expected key=value, got: " + line);
    return {line.substr(0, eq), line.substr(eq + 1)};
}

inline double parse_double(const std::string& s) {
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) throw CorruptModelFile("bad float: " + s);
    return v;
}

inline uint64_t parse_u64(const std::string& s) {
    try {
        return std::stoull(s);
    } catch (const std::exception&) {
        throw CorruptModelFile("bad integer: " + s);
    }
}

}  // namespace detail

inline const char* kLinearModelMagic = "xgenre-logreg v1";
inline const char* kNBModelMagic = "xgenre-nb v1";

inline void save_linear_model(std::ostream& out, const LinearModel& m) {
    out << kLinearModelMagic << "\n";
    out << "fingerprint=" << m.trained_on << "\n";
    out << "l2_lambda=" << detail::fmt17(m.config.l2_lambda) << "\n";
    out << "learning_rate=" << detail::fmt17(m.config.learning_rate) << "\n";
    out << "epochs=" << m.config.epochs << "\n";
    out << "batch_size=" << m.config.batch_size << "\n";
    out << "seed=" << m.config.seed << "\n";
    out << "dim=" << m.weights.size() << "\n";
    out << "bias=" << detail::fmt17(m.bias) << "\n";
    std::size_t nonzero = 0;
    for (double w : m.weights)
        if (w != 0.0) ++nonzero;
    out << "nonzero=" << nonzero << "\n";
    for (std::size_t j = 0; j < m.weights.size(); ++j)
        if (m.weights[j] != 0.0) out << "w " << j << " " << detail::fmt17(m.weights[j]) << "\n";
    out << "end\n";
}

inline LinearModel parse_linear_model(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kLinearModelMagic)
        throw CorruptModelFile("bad magic line, expected '" + std::string(kLinearModelMagic) + "'");
    LinearModel m;
    std::size_t dim = 0, nonzero = 0, seen = 0;
    bool done = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line == "end") {
            done = true;
            break;
        }
        if (line.rfind("w ", 0) == 0) {
            std::istringstream row(line.substr(2));
            std::size_t j = 0;
            std::string val;
            if (!(row >> j >> val) || j >= dim) throw CorruptModelFile("bad weight line: " + line);
            m.weights[j] = detail::parse_double(val);
            ++seen;
            continue;
        }
        auto [key, value] = detail::parse_kv(line);
        if (key == "fingerprint") m.trained_on = value;
        else if (key == "l2_lambda") m.config.l2_lambda = detail::parse_double(value);
        else if (key == "learning_rate") m.config.learning_rate = detail::parse_double(value);
        else if (key == "epochs") m.config.epochs = detail::parse_u64(value);
        else if (key == "batch_size") m.config.batch_size = detail::parse_u64(value);
        else if (key == "seed") m.config.seed = detail::parse_u64(value);
        else if (key == "dim") { dim = detail::parse_u64(value); m.weights.assign(dim, 0.0); }
        else if (key == "bias") m.bias = detail::parse_double(value);
        else if (key == "nonzero") nonzero = detail::parse_u64(value);
        else throw CorruptModelFile("unknown key: " + key);
    }
    if (!done) throw CorruptModelFile("missing end marker");
    if (seen != nonzero)
        throw CorruptModelFile("weight count mismatch: declared " + std::to_string(nonzero) +
                               ", found " + std::to_string(seen));
    return m;
}

inline void save_nb_model(std::ostream& out, const NBModel& m) {
    out << kNBModelMagic << "\n";
    out << "fingerprint=" << m.trained_on << "\n";
    out << "alpha=" << detail::fmt17(m.alpha) << "\n";
    out << "n_f=" << m.n_docs[0] << "\n";
    out << "n_m=" << m.n_docs[1] << "\n";
    out << "dim=" << m.present_counts[0].size() << "\n";
    for (int c = 0; c < 2; ++c) {
        std::size_t nonzero = 0;
        for (uint64_t v : m.present_counts[c])
            if (v != 0) ++nonzero;
        out << (c == 0 ? "nonzero_f=" : "nonzero_m=") << nonzero << "\n";
        for (std::size_t j = 0; j < m.present_counts[c].size(); ++j)
            if (m.present_counts[c][j] != 0)
                out << (c == 0 ? "f " : "m ") << j << " " << m.present_counts[c][j] << "\n";
    }
    out << "end\n";
}

inline NBModel parse_nb_model(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kNBModelMagic)
        throw CorruptModelFile("bad magic line, expected '" + std::string(kNBModelMagic) + "'");
    NBModel m;
    std::size_t dim = 0;
    std::size_t declared[2] = {0, 0}, seen[2] = {0, 0};
    bool done = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line == "end") {
            done = true;
            break;
        }
        if (line.rfind("f ", 0) == 0 || line.rfind("m ", 0) == 0) {
            int c = line[0] == 'f' ? 0 : 1;
            std::istringstream row(line.substr(2));
            std::size_t j = 0;
            uint64_t count = 0;
            if (!(row >> j >> count) || j >= dim) throw CorruptModelFile("bad count line: " + line);
            m.present_counts[c][j] = count;
            ++seen[c];
            continue;
        }
        auto [key, value] = detail::parse_kv(line);
        if (key == "fingerprint") m.trained_on = value;
        else if (key == "alpha") m.alpha = detail::parse_double(value);
        else if (key == "n_f") m.n_docs[0] = detail::parse_u64(value);
        else if (key == "n_m") m.n_docs[1] = detail::parse_u64(value);
        else if (key == "dim") {
            dim = detail::parse_u64(value);
            m.present_counts[0].assign(dim, 0);
            m.present_counts[1].assign(dim, 0);
        } else if (key == "nonzero_f") declared[0] = detail::parse_u64(value);
        else if (key == "nonzero_m") declared[1] = detail::parse_u64(value);
        else throw CorruptModelFile("unknown key: " + key);
    }
    if (!done) throw CorruptModelFile("missing end marker");
    if (seen[0] != declared[0] || seen[1] != declared[1])
        throw CorruptModelFile("count list mismatch");
    if (m.n_docs[0] == 0 || m.n_docs[1] == 0 || !(m.alpha > 0.0))
        throw CorruptModelFile("invalid priors or alpha");
    m.finalize();
    return m;
}

inline void save_linear_model(const std::string& path, const LinearModel& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write model: " + path);
    save_linear_model(out, m);
}

inline LinearModel load_linear_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model: " + path);
    return parse_linear_model(in);
}

inline void save_nb_model(const std::string& path, const NBModel& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write model: " + path);
    save_nb_model(out, m);
}

inline NBModel load_nb_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model: " + path);
    return parse_nb_model(in);
}

}  // namespace xgenre
