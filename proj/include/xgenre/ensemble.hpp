#pragma once

// Weighted ensemble where each member contributes its deviation from
// randomness: weight = validation accuracy - 0.5 (a 0.55 model weighs +0.05,
// a 0.40 model weighs -0.10). Member predictions are +/-1; the weighted sum
// is thresholded at zero, ties resolving to the positive label.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "xgenre/corpus.hpp"
#include "xgenre/errors.hpp"

namespace xgenre {

struct LabelEncoding {
    Label positive = Label::F;  // maps to +1; the other label maps to -1

    int encode(Label l) const { return l == positive ? +1 : -1; }
    Label decode(int v) const {
        return v >= 0 ? positive : (positive == Label::F ? Label::M : Label::F);
    }
};

inline double member_weight(double validation_accuracy) {
    if (!(validation_accuracy >= 0.0 && validation_accuracy <= 1.0))
        throw OutOfRange("validation accuracy must be in [0,1], got " +
                         std::to_string(validation_accuracy));
    return validation_accuracy - 0.5;
}

struct EnsembleMember {
    std::string name;
    double validation_accuracy = 0.5;
    double weight = 0.0;  // always validation_accuracy - 0.5
    std::map<std::string, int> predictions;  // doc-id -> +1/-1

    static EnsembleMember make(std::string name, double validation_accuracy,
                               std::map<std::string, int> predictions) {
        EnsembleMember m;
        m.name = std::move(name);
        m.validation_accuracy = validation_accuracy;
        m.weight = member_weight(validation_accuracy);
        m.predictions = std::move(predictions);
        return m;
    }
};

struct CombineResult {
    Label label;
    double score;
};

inline CombineResult combine(const std::vector<EnsembleMember>& members, const std::string& doc_id,
                             const LabelEncoding& enc = {}) {
    if (members.empty()) throw EmptyEnsemble();
    double score = 0.0;
    for (const EnsembleMember& m : members) {
        auto it = m.predictions.find(doc_id);
        if (it == m.predictions.end()) throw MissingPrediction(m.name, doc_id);
        score += m.weight * static_cast<double>(it->second);
    }
    Label label = score > 0.0 ? enc.positive
                              : (score < 0.0 ? enc.decode(-1) : enc.positive);
    return {label, score};
}

// Prediction file: line 1 "name=<string> acc=<decimal>", then "doc_id TAB
// label" rows with label in {F, M, +1, -1}.
inline EnsembleMember parse_predictions(std::istream& in, const LabelEncoding& enc = {}) {
    std::string line;
    if (!std::getline(in, line)) throw MalformedHeader("empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream header(line);
    std::string name_field, acc_field;
    if (!(header >> name_field >> acc_field) || name_field.rfind("name=", 0) != 0 ||
        acc_field.rfind("acc=", 0) != 0)
        throw MalformedHeader("expected 'name=<string> acc=<decimal>', got: " + line);
    std::string name = name_field.substr(5);
    if (name.empty()) throw MalformedHeader("empty member name");
    char* end = nullptr;
    const std::string acc_text = acc_field.substr(4);
    double acc = std::strtod(acc_text.c_str(), &end);
    if (end == acc_text.c_str()) throw MalformedHeader("bad accuracy: " + acc_text);

    std::map<std::string, int> predictions;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t tab = line.find('\t');
        if (tab == std::string::npos || tab == 0) throw UnknownLabel(lineno, line);
        std::string doc_id = line.substr(0, tab);
        std::string label_tok = line.substr(tab + 1);
        int value = 0;
        if (label_tok == "F" || label_tok == "f") value = enc.encode(Label::F);
        else if (label_tok == "M" || label_tok == "m") value = enc.encode(Label::M);
        else if (label_tok == "+1" || label_tok == "1") value = +1;
        else if (label_tok == "-1") value = -1;
        else throw UnknownLabel(lineno, label_tok);
        if (predictions.count(doc_id)) throw DuplicateDocId(doc_id);
        predictions[doc_id] = value;
    }
    return EnsembleMember::make(std::move(name), acc, std::move(predictions));
}

inline EnsembleMember load_external_predictions(const std::string& path,
                                                const LabelEncoding& enc = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open prediction file: " + path);
    return parse_predictions(in, enc);
}

inline void save_predictions(std::ostream& out, const EnsembleMember& member,
                             const LabelEncoding& enc = {}) {
    std::ostringstream acc;
    acc.precision(17);
    acc << member.validation_accuracy;
    out << "name=" << member.name << " acc=" << acc.str() << "\n";
    for (const auto& [doc_id, value] : member.predictions)
        out << doc_id << '\t' << label_char(enc.decode(value)) << '\n';
}

inline void save_predictions(const std::string& path, const EnsembleMember& member,
                             const LabelEncoding& enc = {}) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write prediction file: " + path);
    save_predictions(out, member, enc);
}

// Combined predictions over the first member's document set; every member
// must cover all of it.
inline EnsembleMember combine_all(const std::vector<EnsembleMember>& members,
                                  const std::string& name, double ensemble_accuracy,
                                  const LabelEncoding& enc = {}) {
    if (members.empty()) throw EmptyEnsemble();
    std::map<std::string, int> out;
    for (const auto& [doc_id, value] : members.front().predictions)
        out[doc_id] = enc.encode(combine(members, doc_id, enc).label);
    return EnsembleMember::make(name, ensemble_accuracy, std::move(out));
}

}  // namespace xgenre
