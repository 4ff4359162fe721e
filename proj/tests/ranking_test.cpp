#include "revdict/ranking.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "testutil.hpp"

using namespace revdict;

namespace {

FrequencyRanking rank_of(const std::vector<std::string>& streams) {
    std::vector<std::istringstream> ss;
    for (const auto& s : streams) ss.emplace_back(s);
    std::vector<std::istream*> ptrs;
    for (auto& s : ss) ptrs.push_back(&s);
    return build_ranking(ptrs, testutil::ascii_table());
}

std::string random_corpus(std::mt19937& rng, std::size_t max_tokens) {
    static const char* words[] = {"ab", "cd", "ef", "gh", "ij", "kl", "mn", "op"};
    std::uniform_int_distribution<std::size_t> len(1, max_tokens);
    std::uniform_int_distribution<std::size_t> pick(0, 7);
    std::string out;
    const auto n = len(rng);
    for (std::size_t i = 0; i < n; ++i) {
        if (i) out.push_back(' ');
        out += words[pick(rng)];
    }
    return out;
}

}  // namespace

TEST(BuildRanking, CountsSingleStream) {
    const auto r = rank_of({"a b a"});
    ASSERT_EQ(r.size(), 2u);
    EXPECT_EQ(r.entries[0].word, "a");
    EXPECT_EQ(r.entries[0].count, 2u);
    EXPECT_EQ(r.entries[1].word, "b");
    EXPECT_EQ(r.entries[1].count, 1u);
    EXPECT_EQ(r.rank("a"), 1u);
    EXPECT_EQ(r.rank("b"), 2u);
    EXPECT_FALSE(r.rank("c").has_value());
}

TEST(BuildRanking, ConcatenatesStreams) {
    const auto r = rank_of({"a", "a b"});
    ASSERT_EQ(r.size(), 2u);
    EXPECT_EQ(r.entries[0].word, "a");
    EXPECT_EQ(r.entries[0].count, 2u);
}

TEST(BuildRanking, TiesBreakLexicographically) {
    // Counting oracle: both words occur twice; 'a' sorts first.
    const auto r = rank_of({"b a b a"});
    ASSERT_EQ(r.size(), 2u);
    EXPECT_EQ(r.entries[0].word, "a");
    EXPECT_EQ(r.entries[1].word, "b");
    EXPECT_EQ(r.entries[0].count, 2u);
    EXPECT_EQ(r.entries[1].count, 2u);
}

TEST(BuildRanking, EmptyCorpusIsAnError) {
    EXPECT_THROW(rank_of({""}), std::runtime_error);
    EXPECT_THROW(rank_of({"!!! ???"}), std::runtime_error);  // nothing survives normalization
}

TEST(BuildRanking, FrequenciesSumToTokenCount) {
    std::mt19937 rng(3);
    const auto table = testutil::ascii_table();
    for (int i = 0; i < 50; ++i) {
        const auto corpus = random_corpus(rng, 60);
        const auto tokens = tokenize(normalize_text(corpus, table));
        const auto r = rank_of({corpus});
        std::uint64_t sum = 0;
        std::uint64_t prev = UINT64_MAX;
        for (const auto& e : r.entries) {
            sum += e.count;
            EXPECT_LE(e.count, prev);  // non-increasing
            prev = e.count;
        }
        EXPECT_EQ(sum, tokens.size());
    }
}

TEST(PruneRanking, DropsStopwordsAndNonLexicon) {
    const auto r = rank_of({"a a a b b c"});
    StopwordList stops;
    stops.words = {"b"};
    const auto pruned = prune_ranking(r, stops, {"a", "b", "c"});
    ASSERT_EQ(pruned.size(), 2u);
    EXPECT_EQ(pruned.entries[0].word, "a");
    EXPECT_EQ(pruned.entries[1].word, "c");
    EXPECT_EQ(pruned.rank("a"), 1u);
    EXPECT_EQ(pruned.rank("c"), 2u);
}

TEST(PruneRanking, EmptyLexiconEmptiesRanking) {
    const auto r = rank_of({"a b"});
    EXPECT_EQ(prune_ranking(r, StopwordList{}, {}).size(), 0u);
}

TEST(PruneRanking, IdentityWhenNothingApplies) {
    const auto r = rank_of({"a a b c"});
    const auto pruned = prune_ranking(r, StopwordList{}, {"a", "b", "c"});
    ASSERT_EQ(pruned.size(), r.size());
    for (std::size_t i = 0; i < r.size(); ++i) EXPECT_EQ(pruned.entries[i].word, r.entries[i].word);
}

TEST(PruneRanking, PreservesRelativeOrder) {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const auto r = rank_of({random_corpus(rng, 80)});
        StopwordList stops;
        stops.words = {"ab", "ij"};
        std::unordered_set<std::string> lexicon = {"cd", "ef", "gh", "kl", "mn"};
        const auto pruned = prune_ranking(r, stops, lexicon);
        // subsequence of the original entry order
        std::size_t pos = 0;
        for (const auto& e : pruned.entries) {
            while (pos < r.size() && r.entries[pos].word != e.word) ++pos;
            ASSERT_LT(pos, r.size());
            ++pos;
        }
    }
}

TEST(RankingIo, SaveLoadRoundTrip) {
    testutil::TempDir tmp;
    const auto r = rank_of({"a a a b b c"});
    r.save(tmp.file("ranking.tsv"));
    const auto loaded = FrequencyRanking::load(tmp.file("ranking.tsv"));
    ASSERT_EQ(loaded.size(), r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        EXPECT_EQ(loaded.entries[i].word, r.entries[i].word);
        EXPECT_EQ(loaded.entries[i].count, r.entries[i].count);
    }
}

TEST(RankingIo, RejectsIncreasingCounts) {
    testutil::TempDir tmp;
    testutil::write_file(tmp.file("bad.tsv"), "a\t1\nb\t2\n");
    EXPECT_THROW(FrequencyRanking::load(tmp.file("bad.tsv")), std::runtime_error);
}

TEST(MeasureCoverage, ToyValueIsTwoThirds) {
    const auto r = rank_of({"a a b"});
    std::istringstream corpus("a a b");
    const auto report = measure_coverage(r, corpus, 1);
    EXPECT_EQ(report.n, 1u);
    EXPECT_DOUBLE_EQ(report.covered_fraction, 2.0 / 3.0);
}

TEST(MeasureCoverage, FullCoverageAtFullRanking) {
    const auto r = rank_of({"a a b"});
    std::istringstream corpus("a b a b");
    EXPECT_DOUBLE_EQ(measure_coverage(r, corpus, 2).covered_fraction, 1.0);
    std::istringstream corpus2("a b");
    EXPECT_DOUBLE_EQ(measure_coverage(r, corpus2, 99).covered_fraction, 1.0);
}

TEST(MeasureCoverage, MonotoneInN) {
    std::mt19937 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const auto corpus_text = random_corpus(rng, 100);
        const auto r = rank_of({corpus_text});
        double prev = 0.0;
        for (std::size_t n = 1; n <= r.size() + 2; ++n) {
            std::istringstream corpus(corpus_text);
            const double f = measure_coverage(r, corpus, n).covered_fraction;
            EXPECT_GE(f, prev - 1e-15);
            prev = f;
        }
        EXPECT_DOUBLE_EQ(prev, 1.0);  // ranking built from the same corpus covers it fully
    }
}

TEST(MeasureCoverage, ErrorsOnEmptyCorpusOrBadN) {
    const auto r = rank_of({"a"});
    std::istringstream empty("");
    EXPECT_THROW(measure_coverage(r, empty, 1), std::runtime_error);
    std::istringstream corpus("a");
    EXPECT_THROW(measure_coverage(r, corpus, 0), std::invalid_argument);
}

TEST(MeasureCoverage, LemmatizerMapsSurfaceForms) {
    const auto r = rank_of({"go go stop"});
    testutil::TempDir tmp;
    testutil::write_file(tmp.file("lemmas.tsv"), "went\tgo\ngoes\tgo\n");
    const auto lemmatizer = load_lemma_map(tmp.file("lemmas.tsv"));
    std::istringstream corpus("went goes go stop");
    // 3 of 4 occurrences lemmatize to "go", which is rank 1.
    EXPECT_DOUBLE_EQ(measure_coverage(r, corpus, 1, lemmatizer).covered_fraction, 0.75);
}
