// Lexical-entry ingestion and the preparation pipeline that turns raw
// dictionary entries into (phrase, word) tuples: normalization, filtering,
// token-vocabulary capping, 8:1:1 splitting, synonym-set construction and
// rank-stratified sampling.
#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "revdict/normalize.hpp"
#include "revdict/ranking.hpp"
#include "revdict/rng.hpp"
#include "revdict/utf8.hpp"

namespace revdict {

enum class Source { Amid, Dehkhoda, Moin, Wikipedia, Farsnet, SynonymDictionary, Other };

inline Source parse_source(const std::string& s) {
    if (s == "Amid") return Source::Amid;
    if (s == "Dehkhoda") return Source::Dehkhoda;
    if (s == "Moin" || s == "Moein") return Source::Moin;
    if (s == "Wikipedia") return Source::Wikipedia;
    if (s == "Farsnet") return Source::Farsnet;
    if (s == "SynonymDictionary") return Source::SynonymDictionary;
    return Source::Other;
}

inline const char* to_string(Source s) {
    switch (s) {
        case Source::Amid: return "Amid";
        case Source::Dehkhoda: return "Dehkhoda";
        case Source::Moin: return "Moin";
        case Source::Wikipedia: return "Wikipedia";
        case Source::Farsnet: return "Farsnet";
        case Source::SynonymDictionary: return "SynonymDictionary";
        case Source::Other: return "Other";
    }
    return "Other";
}

// Dictionary tuples are randomly split 8:1:1; encyclopedic/wordnet tuples are
// appended to the training side instead.
inline bool is_dictionary_source(Source s) {
    return s != Source::Wikipedia && s != Source::Farsnet;
}

struct LexicalEntry {
    std::string word;
    std::vector<std::string> phrases;
    Source source = Source::Other;

    bool operator==(const LexicalEntry&) const = default;
};

struct DefinitionTuple {
    TokenSequence phrase;
    std::string word;
    Source source = Source::Other;

    bool operator==(const DefinitionTuple&) const = default;
};

struct DatasetSplit {
    std::vector<DefinitionTuple> train, dev, test;
    std::uint64_t seed = 0;
};

class SynonymSet {
public:
    // Directional: w2 -> {synonyms of w2}. Never stores (w, w).
    void add(const std::string& word, const std::string& synonym) {
        if (word == synonym) return;
        map_[word].insert(synonym);
    }

    const std::set<std::string>* find(const std::string& word) const {
        const auto it = map_.find(word);
        return it == map_.end() ? nullptr : &it->second;
    }

    bool is_synonym(const std::string& word, const std::string& candidate) const {
        const auto* syns = find(word);
        return syns && syns->count(candidate);
    }

    std::size_t word_count() const { return map_.size(); }
    std::size_t pair_count() const {
        std::size_t total = 0;
        for (const auto& [w, syns] : map_) total += syns.size();
        return total;
    }

    const std::map<std::string, std::set<std::string>>& entries() const { return map_; }

    void save(const std::filesystem::path& path) const {
        nlohmann::json j = nlohmann::json::object();
        for (const auto& [word, syns] : map_) j[word] = syns;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write synonym set: " + path.string());
        out << j.dump() << '\n';
    }

    static SynonymSet load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open synonym set: " + path.string());
        nlohmann::json j;
        in >> j;
        SynonymSet s;
        for (const auto& [word, arr] : j.items())
            for (const auto& syn : arr) s.add(word, syn.get<std::string>());
        return s;
    }

private:
    std::map<std::string, std::set<std::string>> map_;
};

struct StratifiedSample {
    std::vector<DefinitionTuple> tuples;
    std::size_t bucket_count = 0;
    std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// Ingestion

struct LoadCounts {
    std::size_t lines = 0;
    std::size_t dropped_empty = 0;
    std::size_t dropped_duplicate = 0;
    std::size_t entries = 0;
};

// JSON Lines, keys: word (string), phrases (array of strings), source
// (string; unknown names map to Other). Empty and duplicate-content objects
// are dropped.
inline std::vector<LexicalEntry> load_entries(const std::filesystem::path& path,
                                              LoadCounts* counts_out = nullptr) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open entries file: " + path.string());
    std::vector<LexicalEntry> entries;
    std::unordered_set<std::string> seen;
    LoadCounts counts;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++counts.lines;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": malformed JSON: " + e.what());
        }
        for (const char* key : {"word", "phrases", "source"}) {
            if (!j.contains(key))
                throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                         ": missing key '" + key + "'");
        }
        LexicalEntry e;
        try {
            e.word = j["word"].get<std::string>();
            for (const auto& p : j["phrases"]) {
                auto phrase = p.get<std::string>();
                if (!phrase.empty()) e.phrases.push_back(std::move(phrase));
            }
            e.source = parse_source(j["source"].get<std::string>());
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": bad field type: " + e.what());
        }
        if (e.word.empty() || e.phrases.empty()) {
            ++counts.dropped_empty;
            continue;
        }
        std::string fingerprint = e.word;
        fingerprint.push_back('\x1F');
        fingerprint += to_string(e.source);
        for (const auto& p : e.phrases) {
            fingerprint.push_back('\x1E');
            fingerprint += p;
        }
        if (!seen.insert(std::move(fingerprint)).second) {
            ++counts.dropped_duplicate;
            continue;
        }
        entries.push_back(std::move(e));
    }
    counts.entries = entries.size();
    if (counts_out) *counts_out = counts;
    return entries;
}

// ---------------------------------------------------------------------------
// Preprocessing

// Character normalization plus pseudo-space replacement inside phrases.
// Output phrases are still plain strings; this is the stage the integral
// synonym expansion reads (a one-word phrase is its trigger).
inline std::vector<LexicalEntry> normalize_entries(const std::vector<LexicalEntry>& entries,
                                                   const NormalizationTable& table) {
    std::vector<LexicalEntry> out;
    out.reserve(entries.size());
    for (const auto& e : entries) {
        LexicalEntry n;
        n.word = normalize_text(e.word, table);
        n.source = e.source;
        n.phrases.reserve(e.phrases.size());
        for (const auto& p : e.phrases) n.phrases.push_back(replace_pseudo_spaces(normalize_text(p, table)));
        out.push_back(std::move(n));
    }
    return out;
}

struct PreprocessCounts {
    std::size_t entries_in = 0;
    std::size_t phrases_in = 0;
    std::size_t self_definition_tokens_removed = 0;
    std::size_t stopword_entries_dropped = 0;
    std::size_t stopword_tokens_removed = 0;
    std::size_t short_phrases_dropped = 0;
    std::size_t short_word_entries_dropped = 0;
    std::size_t token_vocab_size = 0;
    std::size_t oov_tokens_removed = 0;
    std::size_t short_phrases_dropped_after_oov = 0;
    std::size_t empty_entries_dropped = 0;
    std::size_t entries_out = 0;
    std::size_t phrases_out = 0;
};

struct PreprocessResult {
    std::vector<LexicalEntry> entries;  // phrases are single-space-joined tokens
    std::vector<FrequencyRanking::Entry> token_vocab;  // recognized tokens, by frequency
    PreprocessCounts counts;
};

constexpr std::size_t kDefaultTokenVocabSize = 100000;
constexpr std::size_t kMinPhraseTokens = 3;
constexpr std::size_t kMinWordChars = 3;

// The full phrase-preparation pipeline, in order: character normalization,
// pseudo-space replacement, self-definition removal, stopword-headword
// removal, stopword filtering, short-phrase removal, short-word removal,
// token-vocabulary capping with out-of-vocabulary token removal, and a final
// short-phrase sweep. Total and idempotent: feeding its output back through
// changes nothing.
inline PreprocessResult preprocess_entries(const std::vector<LexicalEntry>& raw_entries,
                                           const NormalizationTable& table, const StopwordList& stops,
                                           std::size_t token_vocab_size = kDefaultTokenVocabSize) {
    struct Work {
        std::string word;
        std::vector<TokenSequence> phrases;
        Source source;
    };

    PreprocessResult result;
    auto& counts = result.counts;
    counts.entries_in = raw_entries.size();

    const auto normalized = normalize_entries(raw_entries, table);

    std::vector<Work> work;
    work.reserve(normalized.size());
    for (const auto& e : normalized) {
        counts.phrases_in += e.phrases.size();
        Work w{e.word, {}, e.source};
        w.phrases.reserve(e.phrases.size());
        for (const auto& p : e.phrases) w.phrases.push_back(tokenize(p));
        work.push_back(std::move(w));
    }

    // Self-definitions: a word never appears inside its own phrases.
    for (auto& w : work) {
        for (auto& phrase : w.phrases) {
            const auto before = phrase.size();
            std::erase_if(phrase, [&](const std::string& tok) { return tok == w.word; });
            counts.self_definition_tokens_removed += before - phrase.size();
        }
    }

    // Entries defining a stopword are dropped entirely.
    std::erase_if(work, [&](const Work& w) {
        if (stops.contains(w.word)) {
            ++counts.stopword_entries_dropped;
            return true;
        }
        return false;
    });

    // Stopwords inside phrases.
    for (auto& w : work) {
        for (auto& phrase : w.phrases) {
            const auto before = phrase.size();
            std::erase_if(phrase, [&](const std::string& tok) { return stops.contains(tok); });
            counts.stopword_tokens_removed += before - phrase.size();
        }
    }

    // Short phrases, then short words.
    for (auto& w : work) {
        const auto before = w.phrases.size();
        std::erase_if(w.phrases, [](const TokenSequence& p) { return p.size() < kMinPhraseTokens; });
        counts.short_phrases_dropped += before - w.phrases.size();
    }
    std::erase_if(work, [&](const Work& w) {
        if (utf8_length(w.word) < kMinWordChars) {
            ++counts.short_word_entries_dropped;
            return true;
        }
        return false;
    });

    // Recognized tokens: the most frequent `token_vocab_size` phrase tokens.
    std::unordered_map<std::string, std::uint64_t> token_counts;
    for (const auto& w : work)
        for (const auto& phrase : w.phrases)
            for (const auto& tok : phrase) ++token_counts[tok];
    auto token_ranking = token_counts.empty()
                             ? FrequencyRanking{}
                             : FrequencyRanking::from_counts(token_counts);
    if (token_ranking.entries.size() > token_vocab_size)
        token_ranking.entries.resize(token_vocab_size);
    std::unordered_set<std::string> recognized;
    recognized.reserve(token_ranking.entries.size());
    for (const auto& e : token_ranking.entries) recognized.insert(e.word);
    counts.token_vocab_size = token_ranking.entries.size();
    result.token_vocab = token_ranking.entries;

    for (auto& w : work) {
        for (auto& phrase : w.phrases) {
            const auto before = phrase.size();
            std::erase_if(phrase, [&](const std::string& tok) { return !recognized.count(tok); });
            counts.oov_tokens_removed += before - phrase.size();
        }
        const auto before = w.phrases.size();
        std::erase_if(w.phrases, [](const TokenSequence& p) { return p.size() < kMinPhraseTokens; });
        counts.short_phrases_dropped_after_oov += before - w.phrases.size();
    }

    std::erase_if(work, [&](const Work& w) {
        if (w.phrases.empty()) {
            ++counts.empty_entries_dropped;
            return true;
        }
        return false;
    });

    result.entries.reserve(work.size());
    for (auto& w : work) {
        LexicalEntry e;
        e.word = std::move(w.word);
        e.source = w.source;
        e.phrases.reserve(w.phrases.size());
        for (const auto& phrase : w.phrases) {
            std::string joined;
            for (std::size_t i = 0; i < phrase.size(); ++i) {
                if (i) joined.push_back(' ');
                joined += phrase[i];
            }
            e.phrases.push_back(std::move(joined));
        }
        counts.phrases_out += e.phrases.size();
        result.entries.push_back(std::move(e));
    }
    counts.entries_out = result.entries.size();
    return result;
}

// ---------------------------------------------------------------------------
// Preparation

// One tuple per (phrase, word) pair, entry-major order.
inline std::vector<DefinitionTuple> entries_to_tuples(const std::vector<LexicalEntry>& entries) {
    std::vector<DefinitionTuple> tuples;
    for (const auto& e : entries)
        for (const auto& p : e.phrases) tuples.push_back({tokenize(p), e.word, e.source});
    return tuples;
}

// Splits the dictionary-source tuples 8:1:1 (|dev| = |test| = floor(N/10),
// remainder to train), then appends Wikipedia and Farsnet tuples to train.
// The shuffled order assigns dev first, then test, then train.
inline DatasetSplit split_811(const std::vector<DefinitionTuple>& tuples, std::uint64_t seed) {
    std::vector<DefinitionTuple> dict, extra;
    for (const auto& t : tuples) (is_dictionary_source(t.source) ? dict : extra).push_back(t);

    const std::size_t n = dict.size();
    if (n < 10)
        throw std::runtime_error("split_811: need at least 10 dictionary tuples, have " + std::to_string(n));

    auto rng = make_rng(seed);
    deterministic_shuffle(dict, rng);

    const std::size_t n_dev = n / 10;
    const std::size_t n_test = n / 10;
    DatasetSplit split;
    split.seed = seed;
    split.dev.assign(dict.begin(), dict.begin() + n_dev);
    split.test.assign(dict.begin() + n_dev, dict.begin() + n_dev + n_test);
    split.train.assign(dict.begin() + n_dev + n_test, dict.end());
    split.train.insert(split.train.end(), extra.begin(), extra.end());
    return split;
}

// Keeps only tuples whose word ranks in the top n. Applied after splitting,
// so the resulting proportions need not stay 8:1:1.
inline DatasetSplit restrict_to_top_words(const DatasetSplit& split, const FrequencyRanking& ranking,
                                          std::size_t n) {
    auto keep = [&](const DefinitionTuple& t) {
        const auto r = ranking.rank(t.word);
        return r.has_value() && *r <= n;
    };
    DatasetSplit out;
    out.seed = split.seed;
    for (const auto& t : split.train)
        if (keep(t)) out.train.push_back(t);
    for (const auto& t : split.dev)
        if (keep(t)) out.dev.push_back(t);
    for (const auto& t : split.test)
        if (keep(t)) out.test.push_back(t);
    return out;
}

// Dictionary synonyms plus the expansion rule: a phrase consisting of exactly
// one word w1 makes w1 a synonym of the entry's headword. Directional, no
// self-pairs. `entries` must be the normalized, pre-tokenization entries.
inline SynonymSet build_integral_synonyms(const SynonymSet& dictionary_synonyms,
                                          const std::vector<LexicalEntry>& entries) {
    SynonymSet out;
    for (const auto& [word, syns] : dictionary_synonyms.entries())
        for (const auto& s : syns) out.add(word, s);
    for (const auto& e : entries) {
        for (const auto& p : e.phrases) {
            const auto tokens = tokenize(p);
            if (tokens.size() == 1) out.add(e.word, tokens[0]);
        }
    }
    return out;
}

// Bucket of a 1-based rank r within [1, n] split into s intervals whose upper
// boundaries are floor(i*n/s): the smallest i with r <= floor(i*n/s).
inline std::size_t stratum_of_rank(std::size_t rank, std::size_t n, std::size_t s) {
    return (rank * s + n - 1) / n;  // ceil(rank*s/n)
}

// Draws one uniformly random tuple per nonempty rank bucket, visiting buckets
// low to high. Empty buckets contribute nothing, so the sample can be
// smaller than s.
inline StratifiedSample stratified_sample(const std::vector<DefinitionTuple>& tuples,
                                          const FrequencyRanking& ranking, std::size_t s, std::size_t n,
                                          std::uint64_t seed) {
    if (s < 1) throw std::invalid_argument("stratified_sample: s must be >= 1");
    if (n < 1) throw std::invalid_argument("stratified_sample: n must be >= 1");

    std::vector<std::vector<std::size_t>> buckets(s);
    for (std::size_t i = 0; i < tuples.size(); ++i) {
        const auto r = ranking.rank(tuples[i].word);
        if (!r || *r > n)
            throw std::runtime_error("stratified_sample: word '" + tuples[i].word +
                                     "' is not among the top " + std::to_string(n) + " ranked words");
        buckets[stratum_of_rank(*r, n, s) - 1].push_back(i);
    }

    auto rng = make_rng(seed);
    StratifiedSample sample;
    sample.bucket_count = s;
    sample.seed = seed;
    for (const auto& bucket : buckets) {
        if (bucket.empty()) continue;
        sample.tuples.push_back(tuples[bucket[uniform_index(rng, bucket.size())]]);
    }
    return sample;
}

// ---------------------------------------------------------------------------
// Tuple persistence: JSON Lines {"phrase": [tokens], "word": ..., "source": ...}

inline void save_tuples(const std::filesystem::path& path, const std::vector<DefinitionTuple>& tuples) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write tuples: " + path.string());
    for (const auto& t : tuples) {
        nlohmann::json j;
        j["phrase"] = t.phrase;
        j["word"] = t.word;
        j["source"] = to_string(t.source);
        out << j.dump() << '\n';
    }
}

inline std::vector<DefinitionTuple> load_tuples(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open tuples file: " + path.string());
    std::vector<DefinitionTuple> tuples;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            DefinitionTuple t;
            t.phrase = j.at("phrase").get<TokenSequence>();
            t.word = j.at("word").get<std::string>();
            t.source = parse_source(j.at("source").get<std::string>());
            tuples.push_back(std::move(t));
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": bad tuple: " + e.what());
        }
    }
    return tuples;
}

}  // namespace revdict
