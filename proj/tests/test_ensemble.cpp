#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "xgenre/ensemble.hpp"

using namespace xgenre;

TEST_CASE("member_weight is deviation from randomness") {
    CHECK(member_weight(0.55) == Catch::Approx(0.05).margin(1e-15));
    CHECK(member_weight(0.40) == Catch::Approx(-0.10).margin(1e-15));
    CHECK(member_weight(0.50) == 0.0);
    CHECK_THROWS_AS(member_weight(1.2), OutOfRange);
    CHECK_THROWS_AS(member_weight(-0.1), OutOfRange);
}

TEST_CASE("combine follows the worked examples") {
    EnsembleMember a = EnsembleMember::make("a", 0.55, {{"d", +1}});
    EnsembleMember b = EnsembleMember::make("b", 0.40, {{"d", +1}});
    CombineResult r = combine({a, b}, "d");
    CHECK(r.score == Catch::Approx(-0.05).margin(1e-12));
    CHECK(r.label == Label::M);

    EnsembleMember solo = EnsembleMember::make("solo", 0.55, {{"d", -1}});
    CombineResult r2 = combine({solo}, "d");
    CHECK(r2.score == Catch::Approx(-0.05).margin(1e-12));
    CHECK(r2.label == Label::M);

    EnsembleMember z1 = EnsembleMember::make("z1", 0.50, {{"d", +1}});
    EnsembleMember z2 = EnsembleMember::make("z2", 0.50, {{"d", -1}});
    CombineResult r3 = combine({z1, z2}, "d");
    CHECK(r3.score == 0.0);
    CHECK(r3.label == Label::F);  // tie resolves to the positive label

    CHECK_THROWS_AS(combine({}, "d"), EmptyEnsemble);
    CHECK_THROWS_AS(combine({a}, "missing"), MissingPrediction);
}

namespace {

std::vector<EnsembleMember> random_ensemble(std::mt19937_64& rng, std::size_t max_members,
                                            std::size_t max_docs) {
    std::size_t n_members = 1 + rng() % max_members;
    std::size_t n_docs = 1 + rng() % max_docs;
    std::vector<EnsembleMember> members;
    for (std::size_t m = 0; m < n_members; ++m) {
        std::map<std::string, int> preds;
        for (std::size_t d = 0; d < n_docs; ++d)
            preds["doc" + std::to_string(d)] = (rng() % 2) ? +1 : -1;
        members.push_back(EnsembleMember::make("m" + std::to_string(m),
                                               double(rng() % 101) / 100.0, std::move(preds)));
    }
    return members;
}

}  // namespace

TEST_CASE("combine invariances over random ensembles") {
    std::mt19937_64 rng(51);
    for (int iter = 0; iter < 200; ++iter) {
        std::vector<EnsembleMember> members = random_ensemble(rng, 12, 30);
        std::size_t n_docs = members.front().predictions.size();

        // scale invariance of the decision; a power-of-two factor keeps the
        // scaling exact so near-zero scores cannot flip from rounding alone
        double c = std::ldexp(1.0, int(rng() % 7) - 3);
        std::vector<EnsembleMember> scaled = members;
        for (EnsembleMember& m : scaled) m.weight *= c;
        // negation duality
        std::vector<EnsembleMember> negated = members;
        for (EnsembleMember& m : negated)
            for (auto& [id, p] : m.predictions) p = -p;
        // permutation invariance
        std::vector<EnsembleMember> shuffled = members;
        for (std::size_t i = shuffled.size(); i > 1; --i)
            std::swap(shuffled[i - 1], shuffled[rng() % i]);

        for (std::size_t d = 0; d < n_docs; ++d) {
            std::string id = "doc" + std::to_string(d);
            CombineResult base = combine(members, id);
            CombineResult sc = combine(scaled, id);
            CHECK(sc.label == base.label);
            CHECK(sc.score == Catch::Approx(base.score * c).margin(1e-9));
            CombineResult ng = combine(negated, id);
            CHECK(ng.score == Catch::Approx(-base.score).margin(1e-12));
            if (base.score != 0.0) CHECK(ng.label != base.label);
            CombineResult sh = combine(shuffled, id);
            CHECK(sh.score == Catch::Approx(base.score).margin(1e-12));
            CHECK(sh.label == base.label);
        }
    }
}

TEST_CASE("single member dominance") {
    std::mt19937_64 rng(52);
    for (int iter = 0; iter < 50; ++iter) {
        std::map<std::string, int> preds;
        for (int d = 0; d < 10; ++d) preds["d" + std::to_string(d)] = (rng() % 2) ? +1 : -1;
        EnsembleMember pos = EnsembleMember::make("p", 0.7, preds);
        EnsembleMember neg = EnsembleMember::make("n", 0.3, preds);
        LabelEncoding enc;
        for (const auto& [id, p] : preds) {
            CHECK(combine({pos}, id).label == enc.decode(p));
            CHECK(combine({neg}, id).label == enc.decode(-p));
        }
    }
}

TEST_CASE("prediction file parsing and writing") {
    std::istringstream in(
        "name=spacy_s1 acc=0.57\n"
        "doc1\tF\n"
        "doc2\tM\n"
        "doc3\t+1\n");
    EnsembleMember m = parse_predictions(in);
    CHECK(m.name == "spacy_s1");
    CHECK(m.weight == Catch::Approx(0.07).margin(1e-12));
    REQUIRE(m.predictions.size() == 3);
    CHECK(m.predictions.at("doc1") == +1);
    CHECK(m.predictions.at("doc2") == -1);
    CHECK(m.predictions.at("doc3") == +1);

    std::ostringstream out;
    save_predictions(out, m);
    std::istringstream back_in(out.str());
    EnsembleMember back = parse_predictions(back_in);
    CHECK(back.predictions == m.predictions);
    CHECK(back.validation_accuracy == m.validation_accuracy);

    std::istringstream bad_header("naam=s acc=0.5\nd\tF\n");
    CHECK_THROWS_AS(parse_predictions(bad_header), MalformedHeader);
    std::istringstream bad_acc("name=s acc=1.2\nd\tF\n");
    CHECK_THROWS_AS(parse_predictions(bad_acc), OutOfRange);
    std::istringstream bad_label("name=s acc=0.5\nd\tQ\n");
    CHECK_THROWS_AS(parse_predictions(bad_label), UnknownLabel);
    std::istringstream dupe("name=s acc=0.5\nd\tF\nd\tM\n");
    CHECK_THROWS_AS(parse_predictions(dupe), DuplicateDocId);
}

TEST_CASE("combine_all produces a member covering the same documents") {
    EnsembleMember a = EnsembleMember::make("a", 0.60, {{"x", +1}, {"y", -1}});
    EnsembleMember b = EnsembleMember::make("b", 0.55, {{"x", -1}, {"y", -1}});
    EnsembleMember ens = combine_all({a, b}, "ens", 0.6);
    REQUIRE(ens.predictions.size() == 2);
    CHECK(ens.predictions.at("x") == +1);  // 0.10 - 0.05 > 0
    CHECK(ens.predictions.at("y") == -1);
}
