#include "revdict/embedding.hpp"

#include <gtest/gtest.h>

#include <random>

#include "testutil.hpp"

using namespace revdict;

namespace {

EmbeddingTable table_from(const std::string& content) {
    testutil::TempDir tmp;
    testutil::write_file(tmp.file("vec.txt"), content);
    return EmbeddingTable::load(tmp.file("vec.txt"));
}

Eigen::VectorXf vec(std::initializer_list<float> values) {
    Eigen::VectorXf v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (float x : values) v(i++) = x;
    return v;
}

}  // namespace

TEST(LoadVectors, TwoRowsWithoutHeader) {
    const auto t = table_from("alpha 1 0 0\nbeta 0 1 0\n");
    EXPECT_EQ(t.size(), 2u);
    EXPECT_EQ(t.dim, 3);
    ASSERT_TRUE(t.lookup("alpha").has_value());
    EXPECT_EQ(t.vector_of(*t.lookup("beta")), vec({0, 1, 0}));
    EXPECT_FALSE(t.lookup("gamma").has_value());
}

TEST(LoadVectors, HeaderLineIsRecognized) {
    const auto t = table_from("2 3\nalpha 1 0 0\nbeta 0 1 0\n");
    EXPECT_EQ(t.size(), 2u);
    EXPECT_EQ(t.dim, 3);
}

TEST(LoadVectors, VocabFilter) {
    testutil::TempDir tmp;
    testutil::write_file(tmp.file("vec.txt"), "alpha 1 0\nbeta 0 1\n");
    const std::unordered_set<std::string> keep = {"beta"};
    const auto t = EmbeddingTable::load(tmp.file("vec.txt"), &keep);
    EXPECT_EQ(t.size(), 1u);
    EXPECT_TRUE(t.lookup("beta").has_value());
}

TEST(LoadVectors, InconsistentDimensionReportsLine) {
    testutil::TempDir tmp;
    testutil::write_file(tmp.file("vec.txt"), "alpha 1 0 0\nbeta 0 1\n");
    try {
        EmbeddingTable::load(tmp.file("vec.txt"));
        FAIL() << "expected dimension error";
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
    }
}

TEST(LoadVectors, ZeroVectorNamesTheWord) {
    testutil::TempDir tmp;
    testutil::write_file(tmp.file("vec.txt"), "alpha 0 0 0\n");
    try {
        EmbeddingTable::load(tmp.file("vec.txt"));
        FAIL() << "expected zero-vector error";
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("alpha"), std::string::npos) << e.what();
    }
}

TEST(LoadVectors, SaveLoadRoundTrip) {
    testutil::TempDir tmp;
    const auto t = table_from("alpha 0.25 -1.5\nbeta 3.125 0.0625\n");
    t.save(tmp.file("copy.txt"));
    const auto u = EmbeddingTable::load(tmp.file("copy.txt"));
    EXPECT_EQ(u.vocab, t.vocab);
    EXPECT_EQ(u.matrix, t.matrix);
}

TEST(CosineSimilarity, KnownValues) {
    EXPECT_DOUBLE_EQ(cosine_similarity<double>(Vec<double>{{1, 0}}, Vec<double>{{1, 0}}), 1.0);
    EXPECT_DOUBLE_EQ(cosine_similarity<double>(Vec<double>{{1, 0}}, Vec<double>{{0, 1}}), 0.0);
    EXPECT_NEAR(cosine_similarity<double>(Vec<double>{{1, 1}}, Vec<double>{{1, 0}}), 1.0 / std::sqrt(2.0),
                1e-15);
}

TEST(CosineSimilarity, ZeroNormIsAnError) {
    EXPECT_THROW(cosine_similarity<double>(Vec<double>{{0, 0}}, Vec<double>{{1, 0}}), std::invalid_argument);
    EXPECT_THROW(cosine_similarity<double>(Vec<double>{{1, 0}}, Vec<double>{{0, 0}}), std::invalid_argument);
}

TEST(RankCandidates, ExactMatchWinsAndKLimits) {
    const auto t = table_from("w1 1 0\nw2 0 1\nw3 -1 0\n");
    const auto r = rank_candidates(vec({1, 0}), t, {"w1", "w2", "w3"}, 2);
    ASSERT_EQ(r.suggestions.size(), 2u);
    EXPECT_EQ(r.suggestions[0].first, "w1");
    EXPECT_DOUBLE_EQ(r.suggestions[0].second, 1.0);
    EXPECT_EQ(r.suggestions[1].first, "w2");

    const auto full = rank_candidates(vec({1, 0}), t, {"w1", "w2", "w3"}, 10);
    ASSERT_EQ(full.suggestions.size(), 3u);
    EXPECT_EQ(full.suggestions[2].first, "w3");
}

TEST(RankCandidates, MatchesBruteForceOracle) {
    std::mt19937 rng(23);
    std::uniform_real_distribution<float> coord(-1.0f, 1.0f);
    for (int trial = 0; trial < 40; ++trial) {
        const int d = 1 + trial % 4;
        EmbeddingTable t;
        std::vector<std::string> candidates;
        for (int w = 0; w < 5; ++w) {
            Eigen::VectorXf v(d);
            do {
                for (int i = 0; i < d; ++i) v(i) = coord(rng);
            } while (v.norm() == 0.0f);
            const auto name = "w" + std::to_string(w);
            t.add(name, v);
            candidates.push_back(name);
        }
        Eigen::VectorXf q(d);
        do {
            for (int i = 0; i < d; ++i) q(i) = coord(rng);
        } while (q.norm() == 0.0f);

        const auto r = rank_candidates(q, t, candidates, 5);

        // Oracle: exhaustive pairwise comparison, stable under ties.
        std::vector<std::pair<double, std::size_t>> sims;
        const Eigen::VectorXd qd = q.cast<double>();
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            const Eigen::VectorXd w = t.matrix.row(static_cast<Eigen::Index>(i)).transpose().cast<double>();
            sims.emplace_back(qd.dot(w) / (qd.norm() * w.norm()), i);
        }
        std::stable_sort(sims.begin(), sims.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });
        ASSERT_EQ(r.suggestions.size(), 5u);
        for (std::size_t i = 0; i < 5; ++i) {
            EXPECT_EQ(r.suggestions[i].first, candidates[sims[i].second]);
            EXPECT_DOUBLE_EQ(r.suggestions[i].second, sims[i].first);
        }
    }
}

TEST(RankCandidates, SimilaritiesNonIncreasing) {
    std::mt19937 rng(29);
    std::uniform_real_distribution<float> coord(-2.0f, 2.0f);
    for (int trial = 0; trial < 20; ++trial) {
        EmbeddingTable t;
        std::vector<std::string> candidates;
        for (int w = 0; w < 12; ++w) {
            Eigen::VectorXf v(3);
            do {
                for (int i = 0; i < 3; ++i) v(i) = coord(rng);
            } while (v.norm() == 0.0f);
            t.add("w" + std::to_string(w), v);
            candidates.push_back("w" + std::to_string(w));
        }
        const auto r = rank_candidates(vec({1, 2, 3}), t, candidates, 12);
        for (std::size_t i = 1; i < r.suggestions.size(); ++i)
            EXPECT_GE(r.suggestions[i - 1].second, r.suggestions[i].second);
    }
}

TEST(RankCandidates, TiesKeepCandidateOrder) {
    // w_a and w_b are identical vectors: the earlier candidate must win.
    const auto t = table_from("late 1 1\nearly 1 1\nother -1 0\n");
    const auto r = rank_candidates(vec({1, 1}), t, {"early", "late", "other"}, 3);
    EXPECT_EQ(r.suggestions[0].first, "early");
    EXPECT_EQ(r.suggestions[1].first, "late");
}

TEST(RankCandidates, ScaleInvariantInQuery) {
    const auto t = table_from("w1 2 1\nw2 -1 3\nw3 0.5 0.5\nw4 -2 -2\n");
    const std::vector<std::string> candidates = {"w1", "w2", "w3", "w4"};
    const auto base = rank_candidates(vec({0.3f, -0.7f}), t, candidates, 4);
    for (float c : {0.001f, 0.5f, 7.0f, 1234.0f}) {
        const auto scaled = rank_candidates(vec({0.3f * c, -0.7f * c}), t, candidates, 4);
        for (std::size_t i = 0; i < 4; ++i)
            EXPECT_EQ(scaled.suggestions[i].first, base.suggestions[i].first) << "scale " << c;
    }
}

TEST(RankCandidates, Errors) {
    const auto t = table_from("w1 1 0\n");
    EXPECT_THROW(rank_candidates(vec({1, 0}), t, {}, 1), std::invalid_argument);
    EXPECT_THROW(rank_candidates(vec({1, 0}), t, {"w1"}, 0), std::invalid_argument);
    EXPECT_THROW(rank_candidates(vec({1, 0}), t, {"missing"}, 1), std::runtime_error);
    EXPECT_THROW(rank_candidates(vec({0, 0}), t, {"w1"}, 1), std::invalid_argument);
}
