#include "revdict/kappa.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "testutil.hpp"

using namespace revdict;

namespace {

// Independent route: integer contingency counts and unnormalized |i-j|
// weights (the 1/(K-1) factor cancels in the ratio).
double kappa_oracle(const std::vector<int>& a, const std::vector<int>& b) {
    const int K = 5;
    const double n = static_cast<double>(a.size());
    long O[K][K] = {};
    long ra[K] = {}, rb[K] = {};
    for (std::size_t i = 0; i < a.size(); ++i) {
        ++O[a[i] - 1][b[i] - 1];
        ++ra[a[i] - 1];
        ++rb[b[i] - 1];
    }
    double num = 0, den = 0;
    for (int i = 0; i < K; ++i) {
        for (int j = 0; j < K; ++j) {
            const double w = std::abs(i - j);
            num += w * static_cast<double>(O[i][j]) * n;
            den += w * static_cast<double>(ra[i]) * static_cast<double>(rb[j]);
        }
    }
    return 1.0 - num / den;
}

RatingMatrix matrix_from(std::vector<std::string> raters, std::vector<std::string> items,
                         std::vector<std::vector<int>> scores) {
    RatingMatrix m;
    m.raters = std::move(raters);
    m.items = std::move(items);
    m.scores = std::move(scores);
    return m;
}

}  // namespace

TEST(LinearWeightedKappa, PerfectAgreementIsOne) {
    EXPECT_DOUBLE_EQ(linear_weighted_kappa({1, 2, 3, 4, 5}, {1, 2, 3, 4, 5}), 1.0);
    EXPECT_DOUBLE_EQ(linear_weighted_kappa({1, 1, 2, 2}, {1, 1, 2, 2}), 1.0);
}

TEST(LinearWeightedKappa, ReversedScoresMatchOracleAndAreNegative) {
    const std::vector<int> a = {1, 2, 3, 4, 5}, b = {5, 4, 3, 2, 1};
    const double k = linear_weighted_kappa(a, b);
    EXPECT_NEAR(k, kappa_oracle(a, b), 1e-12);
    EXPECT_LT(k, 0.0);
}

TEST(LinearWeightedKappa, SymmetricAndSelfAgreeing) {
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> score(1, 5);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<int> a(6), b(6);
        for (int i = 0; i < 6; ++i) {
            a[i] = score(rng);
            b[i] = score(rng);
        }
        const bool a_const = std::all_of(a.begin(), a.end(), [&](int x) { return x == a[0]; });
        const bool b_const = std::all_of(b.begin(), b.end(), [&](int x) { return x == b[0]; });
        if (a_const || b_const) continue;
        EXPECT_DOUBLE_EQ(linear_weighted_kappa(a, b), linear_weighted_kappa(b, a));
        EXPECT_DOUBLE_EQ(linear_weighted_kappa(a, a), 1.0);
    }
}

TEST(LinearWeightedKappa, MatchesOracleOnSmallRandomInstances) {
    std::mt19937 rng(9);
    std::uniform_int_distribution<int> score(1, 5);
    std::uniform_int_distribution<int> len(1, 6);
    int checked = 0;
    while (checked < 200) {
        const int n = len(rng);
        std::vector<int> a(n), b(n);
        for (int i = 0; i < n; ++i) {
            a[i] = score(rng);
            b[i] = score(rng);
        }
        // Skip instances the oracle's denominator cannot handle.
        const bool a_const = std::all_of(a.begin(), a.end(), [&](int x) { return x == a[0]; });
        const bool b_const = std::all_of(b.begin(), b.end(), [&](int x) { return x == b[0]; });
        if (a_const && b_const) continue;
        EXPECT_NEAR(linear_weighted_kappa(a, b), kappa_oracle(a, b), 1e-12);
        ++checked;
    }
}

TEST(LinearWeightedKappa, DegenerateCases) {
    // Both raters constant and identical: 1 by convention.
    EXPECT_DOUBLE_EQ(linear_weighted_kappa({3, 3, 3}, {3, 3, 3}), 1.0);
    // Constant but different: undefined.
    EXPECT_THROW(linear_weighted_kappa({2, 2}, {4, 4}), std::runtime_error);
}

TEST(LinearWeightedKappa, InputValidation) {
    EXPECT_THROW(linear_weighted_kappa({1, 2}, {1}), std::invalid_argument);
    EXPECT_THROW(linear_weighted_kappa({}, {}), std::invalid_argument);
    EXPECT_THROW(linear_weighted_kappa({0, 2}, {1, 2}), std::invalid_argument);
    EXPECT_THROW(linear_weighted_kappa({1, 6}, {1, 2}), std::invalid_argument);
}

TEST(RaterAgreement, IdenticalRatersAgreePerfectly) {
    const auto m = matrix_from({"r1", "r2", "r3"}, {"i1", "i2", "i3"},
                               {{1, 3, 5}, {1, 3, 5}, {1, 3, 5}});
    for (std::size_t r = 0; r < 3; ++r) EXPECT_DOUBLE_EQ(rater_agreement(r, m), 1.0);
}

TEST(RaterAgreement, TwoRatersReduceToPairwiseKappa) {
    const std::vector<int> a = {1, 2, 5, 4}, b = {2, 2, 4, 5};
    const auto m = matrix_from({"r1", "r2"}, {"i1", "i2", "i3", "i4"}, {a, b});
    EXPECT_DOUBLE_EQ(rater_agreement(0, m), linear_weighted_kappa(a, b));
    EXPECT_DOUBLE_EQ(rater_agreement(1, m), linear_weighted_kappa(b, a));
}

TEST(RaterAgreement, ThreeRatersAverageTheOracleKappas) {
    const std::vector<int> r1 = {1, 2, 3, 4, 5, 1}, r2 = {2, 2, 3, 5, 5, 1}, r3 = {5, 4, 3, 2, 1, 2};
    const auto m = matrix_from({"r1", "r2", "r3"}, {"a", "b", "c", "d", "e", "f"}, {r1, r2, r3});
    EXPECT_NEAR(rater_agreement(0, m), (kappa_oracle(r1, r2) + kappa_oracle(r1, r3)) / 2.0, 1e-12);
}

TEST(RaterAgreement, PairsWithoutSharedItemsAreExcluded) {
    // r3 shares items only with r1 (0 marks missing cells).
    const auto m = matrix_from({"r1", "r2", "r3"}, {"i1", "i2", "i3", "i4"},
                               {{1, 2, 3, 4}, {1, 2, 0, 0}, {0, 0, 3, 5}});
    const std::vector<int> r1_shared_r3 = {3, 4}, r3_shared_r1 = {3, 5};
    EXPECT_DOUBLE_EQ(rater_agreement(2, m), linear_weighted_kappa(r3_shared_r1, r1_shared_r3));
}

TEST(RaterAgreement, NoSharedItemsAtAllIsAnError) {
    const auto m = matrix_from({"r1", "r2"}, {"i1", "i2"}, {{1, 0}, {0, 2}});
    EXPECT_THROW(rater_agreement(0, m), std::runtime_error);
}

TEST(FilterValidRaters, IdenticalRatersAllSurvive) {
    const auto m = matrix_from({"r1", "r2", "r3"}, {"i1", "i2"}, {{2, 4}, {2, 4}, {2, 4}});
    EXPECT_EQ(filter_valid_raters(m).rater_count(), 3u);
}

TEST(FilterValidRaters, AdversarialRaterAmongClonesIsDropped) {
    // Five clones and one reversed rater; oracle kappas confirm the clones'
    // agreements stay above threshold while the adversary's falls below.
    const std::vector<int> clone = {1, 2, 3, 4, 5, 2, 4};
    std::vector<int> reversed(clone.size());
    std::transform(clone.begin(), clone.end(), reversed.begin(), [](int s) { return 6 - s; });
    std::vector<std::vector<int>> scores(5, clone);
    scores.push_back(reversed);
    const auto m = matrix_from({"c1", "c2", "c3", "c4", "c5", "adv"},
                               {"i1", "i2", "i3", "i4", "i5", "i6", "i7"}, scores);

    const double adv_agreement = kappa_oracle(reversed, clone);  // same against every clone
    ASSERT_LT(adv_agreement, kValidRaterThreshold);
    const double clone_agreement = (4.0 * 1.0 + kappa_oracle(clone, reversed)) / 5.0;
    ASSERT_GE(clone_agreement, kValidRaterThreshold);

    const auto filtered = filter_valid_raters(m);
    ASSERT_EQ(filtered.rater_count(), 5u);
    for (const auto& r : filtered.raters) EXPECT_NE(r, "adv");
}

TEST(FilterValidRaters, VeryLowThresholdKeepsEveryone) {
    const std::vector<int> clone = {1, 2, 3, 4};
    std::vector<int> reversed = {5, 4, 2, 1};
    const auto m = matrix_from({"a", "b"}, {"i1", "i2", "i3", "i4"}, {clone, reversed});
    const auto filtered = filter_valid_raters(m, -1e9);
    EXPECT_EQ(filtered.rater_count(), 2u);
}

TEST(FilterValidRaters, SurvivorSetInvariantUnderRelabeling) {
    const std::vector<int> clone = {1, 2, 3, 4, 5, 2, 4};
    std::vector<int> adv(clone.size());
    std::transform(clone.begin(), clone.end(), adv.begin(), [](int s) { return 6 - s; });
    const std::vector<std::string> items = {"1", "2", "3", "4", "5", "6", "7"};

    auto base = matrix_from({"c1", "c2", "c3", "c4", "c5", "adv"}, items,
                            {clone, clone, clone, clone, clone, adv});
    const auto survivors = filter_valid_raters(base);

    // Move the adversary to the front; the surviving id set must not change.
    auto relabeled = matrix_from({"adv", "c1", "c2", "c3", "c4", "c5"}, items,
                                 {adv, clone, clone, clone, clone, clone});
    const auto survivors2 = filter_valid_raters(relabeled);
    auto ids1 = survivors.raters, ids2 = survivors2.raters;
    std::sort(ids1.begin(), ids1.end());
    std::sort(ids2.begin(), ids2.end());
    EXPECT_EQ(ids1, ids2);
    EXPECT_EQ(ids1, (std::vector<std::string>{"c1", "c2", "c3", "c4", "c5"}));
}

TEST(FilterValidRaters, Errors) {
    const auto one = matrix_from({"r1"}, {"i1"}, {{3}});
    EXPECT_THROW(filter_valid_raters(one), std::invalid_argument);
    const auto hostile =
        matrix_from({"a", "b"}, {"1", "2", "3", "4", "5"}, {{1, 2, 3, 4, 5}, {5, 4, 3, 2, 1}});
    EXPECT_THROW(filter_valid_raters(hostile, 0.99), std::runtime_error);
}

TEST(MeanOpinionScore, Basics) {
    const auto m = matrix_from({"r1", "r2"}, {"i1", "i2", "i3"}, {{4, 1, 0}, {0, 5, 0}});
    EXPECT_DOUBLE_EQ(mean_opinion_score(m, 0), 4.0);
    EXPECT_DOUBLE_EQ(mean_opinion_score(m, 1), 3.0);
    EXPECT_THROW(mean_opinion_score(m, 2), std::runtime_error);
}

TEST(MeanOpinionScore, AlwaysInsideScoreRange) {
    std::mt19937 rng(13);
    std::uniform_int_distribution<int> score(1, 5);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::vector<int>> scores(3, std::vector<int>(4, 0));
        for (auto& row : scores)
            for (auto& cell : row) cell = score(rng);
        const auto m = matrix_from({"a", "b", "c"}, {"1", "2", "3", "4"}, scores);
        for (std::size_t i = 0; i < 4; ++i) {
            const double mos = mean_opinion_score(m, i);
            EXPECT_GE(mos, 1.0);
            EXPECT_LE(mos, 5.0);
        }
    }
}

TEST(SuggestionQuality, GroupMeans) {
    const auto m = matrix_from({"r1", "r2"}, {"i1", "i2", "i3"}, {{2, 3, 4}, {2, 3, 2}});
    // MOS: i1 = 2.0, i2 = 3.0, i3 = 3.0
    const auto q = suggestion_quality(m, {{"single", {"i1"}}, {"pair", {"i1", "i2"}}});
    EXPECT_DOUBLE_EQ(q.at("single"), 2.0);
    EXPECT_DOUBLE_EQ(q.at("pair"), 2.5);
    EXPECT_THROW(suggestion_quality(m, {{"empty", {}}}), std::invalid_argument);
}

TEST(RatingMatrixCsv, ParsesAndValidates) {
    testutil::TempDir tmp;
    testutil::write_file(tmp.file("r.csv"),
                         "rater_id,item_id,score\n"
                         "r1,i1,4\n"
                         "r1,i2,2\n"
                         "r2,i1,5\n");
    const auto m = RatingMatrix::from_csv(tmp.file("r.csv"));
    EXPECT_EQ(m.rater_count(), 2u);
    EXPECT_EQ(m.item_count(), 2u);
    EXPECT_EQ(m.score(0, 0), 4);
    EXPECT_EQ(m.score(1, 1), 0);  // missing

    testutil::write_file(tmp.file("dup.csv"), "rater_id,item_id,score\nr1,i1,4\nr1,i1,5\n");
    EXPECT_THROW(RatingMatrix::from_csv(tmp.file("dup.csv")), std::runtime_error);

    testutil::write_file(tmp.file("bad.csv"), "rater_id,item_id,score\nr1,i1,9\n");
    EXPECT_THROW(RatingMatrix::from_csv(tmp.file("bad.csv")), std::runtime_error);

    EXPECT_THROW(RatingMatrix::from_csv(tmp.file("missing.csv")), std::runtime_error);
}
