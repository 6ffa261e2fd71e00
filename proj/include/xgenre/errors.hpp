#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace xgenre {

// Base class for all toolkit errors. Data/usage problems throw subclasses of
// this; anything else escaping the library is a bug.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class MalformedRow : public Error {
public:
    MalformedRow(std::size_t line, const std::string& why)
        : Error("malformed row at line " + std::to_string(line) + ": " + why), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class DuplicateId : public Error {
public:
    explicit DuplicateId(const std::string& id) : Error("duplicate document id: " + id) {}
};

class EmptyInput : public Error {
public:
    explicit EmptyInput(const std::string& what) : Error("empty input: " + what) {}
};

class UnlabelledDocument : public Error {
public:
    explicit UnlabelledDocument(const std::string& id)
        : Error("document has no gender label: " + id) {}
};

class MissingGenre : public Error {
public:
    explicit MissingGenre(const std::string& genre)
        : Error("no labelled documents of genre: " + genre) {}
};

class TooFewWords : public Error {
public:
    TooFewWords(std::size_t have, std::size_t need)
        : Error("too few words to cluster: have " + std::to_string(have) + ", need " +
                std::to_string(need)) {}
};

class NonFiniteEmbedding : public Error {
public:
    explicit NonFiniteEmbedding(const std::string& word)
        : Error("non-finite embedding component for word: " + word) {}
};

class MalformedEmbedding : public Error {
public:
    MalformedEmbedding(std::size_t line, const std::string& why)
        : Error("malformed embedding file at line " + std::to_string(line) + ": " + why) {}
};

class ConfigMismatch : public Error {
public:
    explicit ConfigMismatch(const std::string& why) : Error("config mismatch: " + why) {}
};

class FingerprintMismatch : public Error {
public:
    FingerprintMismatch(const std::string& expected, const std::string& got)
        : Error("feature-space fingerprint mismatch: model trained on " + expected +
                ", input vectorized with " + got) {}
};

class SingleClassInput : public Error {
public:
    SingleClassInput() : Error("training data contains a single class") {}
};

class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string& why) : Error("dimension mismatch: " + why) {}
};

class OrderOutOfRange : public Error {
public:
    explicit OrderOutOfRange(int order)
        : Error("n-gram order out of range [1,8]: " + std::to_string(order)) {}
};

class DegenerateCounts : public Error {
public:
    explicit DegenerateCounts(int order)
        : Error("count table has no n-grams at order " + std::to_string(order)) {}
};

class EmptyParagraph : public Error {
public:
    EmptyParagraph() : Error("paragraph yields no sentences") {}
};

class OutOfRange : public Error {
public:
    explicit OutOfRange(const std::string& why) : Error("value out of range: " + why) {}
};

class EmptyEnsemble : public Error {
public:
    EmptyEnsemble() : Error("ensemble has no members") {}
};

class MissingPrediction : public Error {
public:
    MissingPrediction(const std::string& member, const std::string& doc_id)
        : Error("member " + member + " has no prediction for document " + doc_id) {}
};

class MalformedHeader : public Error {
public:
    explicit MalformedHeader(const std::string& why)
        : Error("malformed prediction-file header: " + why) {}
};

class UnknownLabel : public Error {
public:
    UnknownLabel(std::size_t line, const std::string& token)
        : Error("unknown label token at line " + std::to_string(line) + ": " + token) {}
};

class DuplicateDocId : public Error {
public:
    explicit DuplicateDocId(const std::string& id)
        : Error("duplicate doc id in prediction file: " + id) {}
};

class KeyMismatch : public Error {
public:
    explicit KeyMismatch(const std::string& why) : Error("key sets differ: " + why) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& why) : Error("configuration error: " + why) {}
};

class CorruptModelFile : public Error {
public:
    explicit CorruptModelFile(const std::string& why) : Error("corrupt model file: " + why) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& why) : Error("i/o error: " + why) {}
};

}  // namespace xgenre
