// Frequency-sorted word ranking over normalized corpora, plus the
// lemma-coverage measurement used to pick the output vocabulary size.
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "revdict/normalize.hpp"

namespace revdict {

// Words ordered by descending frequency; ties broken lexicographically (by
// UTF-8 byte order, which equals codepoint order) so ranks are reproducible.
struct FrequencyRanking {
    struct Entry {
        std::string word;
        std::uint64_t count;
    };

    std::vector<Entry> entries;
    std::unordered_map<std::string, std::size_t> rank_index;  // word -> 1-based rank

    // 1-based rank, or nullopt for unranked words.
    std::optional<std::size_t> rank(const std::string& word) const {
        const auto it = rank_index.find(word);
        if (it == rank_index.end()) return std::nullopt;
        return it->second;
    }

    std::size_t size() const { return entries.size(); }

    static FrequencyRanking from_counts(const std::unordered_map<std::string, std::uint64_t>& counts) {
        FrequencyRanking r;
        r.entries.reserve(counts.size());
        for (const auto& [word, count] : counts) r.entries.push_back({word, count});
        std::sort(r.entries.begin(), r.entries.end(), [](const Entry& a, const Entry& b) {
            if (a.count != b.count) return a.count > b.count;
            return a.word < b.word;
        });
        r.rebuild_index();
        return r;
    }

    void rebuild_index() {
        rank_index.clear();
        rank_index.reserve(entries.size());
        for (std::size_t i = 0; i < entries.size(); ++i) {
            if (!rank_index.emplace(entries[i].word, i + 1).second)
                throw std::invalid_argument("ranking contains duplicate word: " + entries[i].word);
        }
    }

    // `word<TAB>count` per line, descending.
    void save(const std::filesystem::path& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write ranking: " + path.string());
        for (const auto& e : entries) out << e.word << '\t' << e.count << '\n';
    }

    static FrequencyRanking load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open ranking: " + path.string());
        FrequencyRanking r;
        std::string line;
        std::size_t line_no = 0;
        std::uint64_t prev = UINT64_MAX;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            const auto tab = line.find('\t');
            if (tab == std::string::npos)
                throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected word<TAB>count");
            Entry e;
            e.word = line.substr(0, tab);
            try {
                e.count = std::stoull(line.substr(tab + 1));
            } catch (const std::exception&) {
                throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": bad count");
            }
            if (e.count > prev)
                throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                         ": counts must be non-increasing");
            prev = e.count;
            r.entries.push_back(std::move(e));
        }
        r.rebuild_index();
        return r;
    }
};

// Counts normalized, tokenized text from all streams into one ranking.
// Counting is streaming (line by line); per-stream maps merge by addition.
inline FrequencyRanking build_ranking(const std::vector<std::istream*>& corpus_streams,
                                      const NormalizationTable& table) {
    std::unordered_map<std::string, std::uint64_t> counts;
    for (std::istream* stream : corpus_streams) {
        std::string line;
        while (std::getline(*stream, line)) {
            for (auto& tok : tokenize(normalize_text(line, table))) ++counts[std::move(tok)];
        }
    }
    if (counts.empty()) throw std::runtime_error("build_ranking: corpus produced no tokens");
    return FrequencyRanking::from_counts(counts);
}

// Drops stopwords and words missing from the lexicon; relative order kept.
inline FrequencyRanking prune_ranking(const FrequencyRanking& r, const StopwordList& stops,
                                      const std::unordered_set<std::string>& lexicon) {
    FrequencyRanking out;
    for (const auto& e : r.entries) {
        if (stops.contains(e.word)) continue;
        if (!lexicon.count(e.word)) continue;
        out.entries.push_back(e);
    }
    out.rebuild_index();
    return out;
}

struct CoverageReport {
    std::size_t n;
    double covered_fraction;
};

using Lemmatizer = std::function<std::string(const std::string&)>;

inline Lemmatizer identity_lemmatizer() {
    return [](const std::string& w) { return w; };
}

// Lemma map file: `surface<TAB>lemma` per line; unknown surfaces lemmatize to
// themselves.
inline Lemmatizer load_lemma_map(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open lemma map: " + path.string());
    auto map = std::make_shared<std::unordered_map<std::string, std::string>>();
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected surface<TAB>lemma");
        (*map)[line.substr(0, tab)] = line.substr(tab + 1);
    }
    return [map](const std::string& w) {
        const auto it = map->find(w);
        return it == map->end() ? w : it->second;
    };
}

// Lemma-occurrence counts of a corpus that has already been normalized and
// stopword-stripped by the caller.
inline std::unordered_map<std::string, std::uint64_t> count_lemmas(std::istream& corpus,
                                                                   const Lemmatizer& lemmatizer) {
    std::unordered_map<std::string, std::uint64_t> counts;
    std::string line;
    while (std::getline(corpus, line)) {
        for (const auto& tok : tokenize(line)) ++counts[lemmatizer(tok)];
    }
    return counts;
}

// Frequency-weighted fraction of corpus lemma occurrences whose lemma is one
// of the top-n ranking words.
inline CoverageReport measure_coverage(const FrequencyRanking& r,
                                       const std::unordered_map<std::string, std::uint64_t>& lemma_counts,
                                       std::size_t n) {
    if (n < 1) throw std::invalid_argument("measure_coverage: n must be >= 1");
    std::unordered_set<std::string> top;
    const std::size_t limit = std::min(n, r.entries.size());
    top.reserve(limit);
    for (std::size_t i = 0; i < limit; ++i) top.insert(r.entries[i].word);

    std::uint64_t covered = 0, total = 0;
    for (const auto& [lemma, count] : lemma_counts) {
        total += count;
        if (top.count(lemma)) covered += count;
    }
    if (total == 0) throw std::runtime_error("measure_coverage: corpus has no surviving tokens");
    return CoverageReport{n, static_cast<double>(covered) / static_cast<double>(total)};
}

inline CoverageReport measure_coverage(const FrequencyRanking& r, std::istream& corpus, std::size_t n,
                                       const Lemmatizer& lemmatizer = identity_lemmatizer()) {
    return measure_coverage(r, count_lemmas(corpus, lemmatizer), n);
}

}  // namespace revdict
