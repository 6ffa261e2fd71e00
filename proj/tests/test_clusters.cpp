#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "xgenre/clusters.hpp"

using namespace xgenre;

namespace {

EmbeddingTable planted_pairs() {
    // three well-separated 2-d pairs
    EmbeddingTable t;
    t.dimension = 2;
    auto add = [&](const std::string& w, double x, double y) {
        t.words.push_back(w);
        t.vectors.push_back({x, y});
    };
    add("aa", 0.0, 0.0);
    add("ab", 0.1, 0.0);
    add("ba", 10.0, 10.0);
    add("bb", 10.1, 10.0);
    add("ca", -10.0, 5.0);
    add("cb", -10.1, 5.0);
    return t;
}

}  // namespace

TEST_CASE("embedding parser") {
    std::istringstream in("2 3\nhond 1.0 2.0 3.0\nkat 0.5 -1 2e-1\n");
    EmbeddingTable t = parse_embeddings(in);
    REQUIRE(t.size() == 2);
    CHECK(t.dimension == 3);
    CHECK(t.vectors[1][2] == Catch::Approx(0.2));

    std::istringstream bad_count("3 2\nhond 1 2\n");
    CHECK_THROWS_AS(parse_embeddings(bad_count), MalformedEmbedding);
    std::istringstream bad_dim("1 3\nhond 1 2\n");
    CHECK_THROWS_AS(parse_embeddings(bad_dim), MalformedEmbedding);
    std::istringstream bad_val("1 2\nhond nan 2\n");
    CHECK_THROWS_AS(parse_embeddings(bad_val), NonFiniteEmbedding);
}

TEST_CASE("planted pairs recover as three clusters") {
    EmbeddingTable t = planted_pairs();
    ClusterMap cm = build_clusters(t, 3, 500, 1234);
    REQUIRE(cm.assignment.size() == 6);  // all survive: every cluster has size 2
    CHECK(cm.sizes.size() == 3);
    CHECK(cm.assignment.at("aa") == cm.assignment.at("ab"));
    CHECK(cm.assignment.at("ba") == cm.assignment.at("bb"));
    CHECK(cm.assignment.at("ca") == cm.assignment.at("cb"));
    CHECK(cm.assignment.at("aa") != cm.assignment.at("ba"));
    CHECK(cm.assignment.at("aa") != cm.assignment.at("ca"));
}

TEST_CASE("k equal to vocabulary size leaves only singletons, hence nothing") {
    EmbeddingTable t = planted_pairs();
    ClusterMap cm = build_clusters(t, 6, 500, 7);
    CHECK(cm.assignment.empty());
    CHECK(cm.sizes.empty());
}

TEST_CASE("size filter drops singletons and oversized clusters") {
    // one tight blob of 60 points, one pair, one isolated point; max_size 50
    EmbeddingTable t;
    t.dimension = 2;
    std::mt19937_64 rng(99);
    auto jitter = [&]() { return 1e-3 * static_cast<double>(rng() % 1000); };
    for (int i = 0; i < 60; ++i) {
        t.words.push_back("blob" + std::to_string(i));
        t.vectors.push_back({0.0 + jitter(), 0.0 + jitter()});
    }
    t.words.push_back("p1");
    t.vectors.push_back({50.0, 50.0});
    t.words.push_back("p2");
    t.vectors.push_back({50.2, 50.0});
    t.words.push_back("lone");
    t.vectors.push_back({-80.0, 30.0});

    ClusterMap cm = build_clusters(t, 3, 50, 5);
    // the blob cluster (size 60 > 50) and the singleton disappear
    CHECK(cm.assignment.count("p1") == 1);
    CHECK(cm.assignment.count("p2") == 1);
    CHECK(cm.assignment.count("lone") == 0);
    CHECK(cm.assignment.count("blob0") == 0);
    for (const auto& [id, size] : cm.sizes) {
        CHECK(size >= 2);
        CHECK(size <= 50);
    }
}

TEST_CASE("size filter boundary: exactly max_size survives, max_size+1 does not") {
    EmbeddingTable t;
    t.dimension = 2;
    std::mt19937_64 rng(17);
    auto jitter = [&]() { return 1e-4 * static_cast<double>(rng() % 1000); };
    auto blob = [&](const std::string& stem, int count, double cx, double cy) {
        for (int i = 0; i < count; ++i) {
            t.words.push_back(stem + std::to_string(i));
            t.vectors.push_back({cx + jitter(), cy + jitter()});
        }
    };
    blob("keep", 500, 0.0, 0.0);
    blob("drop", 501, 1000.0, 1000.0);
    blob("pair", 2, -1000.0, 500.0);

    ClusterMap cm = build_clusters(t, 3, 500, 11);
    CHECK(cm.assignment.count("keep0") == 1);
    CHECK(cm.assignment.count("drop0") == 0);
    CHECK(cm.assignment.count("pair0") == 1);
    REQUIRE(cm.sizes.size() == 2);
    std::vector<std::size_t> sizes;
    for (const auto& [id, size] : cm.sizes) sizes.push_back(size);
    std::sort(sizes.begin(), sizes.end());
    CHECK(sizes == std::vector<std::size_t>{2, 500});
}

TEST_CASE("cluster filter invariant and determinism over random inputs") {
    std::mt19937_64 rng(41);
    for (int iter = 0; iter < 25; ++iter) {
        EmbeddingTable t;
        t.dimension = 3;
        std::size_t n = 12 + rng() % 60;
        for (std::size_t i = 0; i < n; ++i) {
            t.words.push_back("w" + std::to_string(i));
            t.vectors.push_back({static_cast<double>(rng() % 1000) / 100.0,
                                 static_cast<double>(rng() % 1000) / 100.0,
                                 static_cast<double>(rng() % 1000) / 100.0});
        }
        std::size_t k = 2 + rng() % 10;
        std::size_t max_size = 2 + rng() % 20;
        uint64_t seed = rng();
        ClusterMap cm = build_clusters(t, k, max_size, seed);
        for (const auto& [id, size] : cm.sizes) {
            REQUIRE(size >= 2);
            REQUIRE(size <= max_size);
        }
        std::map<uint32_t, std::size_t> recount;
        for (const auto& [word, id] : cm.assignment) ++recount[id];
        CHECK(recount == cm.sizes);

        ClusterMap cm2 = build_clusters(t, k, max_size, seed);
        CHECK(cm2.assignment == cm.assignment);
    }
}

TEST_CASE("build_clusters error paths") {
    EmbeddingTable t = planted_pairs();
    CHECK_THROWS_AS(build_clusters(t, 10, 500, 0), TooFewWords);
    t.vectors[2][0] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(build_clusters(t, 2, 500, 0), NonFiniteEmbedding);
}

TEST_CASE("cluster map persistence round-trips") {
    EmbeddingTable t = planted_pairs();
    ClusterMap cm = build_clusters(t, 3, 500, 1234);
    std::ostringstream out;
    save_cluster_map(out, cm);
    std::istringstream in(out.str());
    ClusterMap back = parse_cluster_map(in);
    CHECK(back.assignment == cm.assignment);
    CHECK(back.sizes == cm.sizes);

    std::istringstream corrupt("hond\tx7\n");
    CHECK_THROWS_AS(parse_cluster_map(corrupt), CorruptModelFile);
    std::istringstream dupe("hond\t1\nhond\t2\n");
    CHECK_THROWS_AS(parse_cluster_map(dupe), CorruptModelFile);
}
