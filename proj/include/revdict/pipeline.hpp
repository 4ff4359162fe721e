// End-to-end orchestration behind the CLI subcommands: prepare writes the
// split/synonym/vocabulary artifacts with a per-stage manifest, train and
// eval consume them. Tests drive these directly.
#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "revdict/checkpoint.hpp"
#include "revdict/dataset.hpp"
#include "revdict/embedding.hpp"
#include "revdict/metrics.hpp"
#include "revdict/model.hpp"
#include "revdict/normalize.hpp"
#include "revdict/ranking.hpp"
#include "revdict/train.hpp"

namespace revdict {

namespace artifact {
constexpr const char* kTrainTuples = "train.jsonl";
constexpr const char* kDevTuples = "dev.jsonl";
constexpr const char* kTestTuples = "test.jsonl";
constexpr const char* kSynonyms = "synonyms.json";
constexpr const char* kTokenVocab = "token_vocab.tsv";
constexpr const char* kCandidates = "candidates.tsv";
constexpr const char* kManifest = "manifest.json";
constexpr const char* kTrainReport = "train_report.jsonl";
constexpr const char* kMetrics = "metrics.json";
}  // namespace artifact

inline NormalizationTable load_table_or_default(const std::optional<std::filesystem::path>& path) {
    return path ? NormalizationTable::load(*path) : NormalizationTable::persian_default();
}

inline StopwordList load_stopwords_or_default(const std::optional<std::filesystem::path>& path,
                                              const NormalizationTable& table) {
    return path ? StopwordList::load(*path, table) : StopwordList::persian_default();
}

// Normalizes every key and value of a synonym dictionary with the pipeline's
// table; pairs that normalize away vanish.
inline SynonymSet normalize_synonyms(const SynonymSet& raw, const NormalizationTable& table) {
    SynonymSet out;
    for (const auto& [word, syns] : raw.entries()) {
        const auto w = normalize_text(word, table);
        if (w.empty()) continue;
        for (const auto& s : syns) {
            const auto v = normalize_text(s, table);
            if (!v.empty()) out.add(w, v);
        }
    }
    return out;
}

inline void save_token_vocab(const std::filesystem::path& path,
                             const std::vector<FrequencyRanking::Entry>& vocab) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write token vocabulary: " + path.string());
    for (const auto& e : vocab) out << e.word << '\t' << e.count << '\n';
}

struct PrepareInputs {
    std::filesystem::path entries_path;
    std::filesystem::path ranking_path;
    std::filesystem::path output_dir;
    std::optional<std::filesystem::path> normtable_path;
    std::optional<std::filesystem::path> stopwords_path;
    std::optional<std::filesystem::path> synonyms_dict_path;
    std::size_t n = 3000;
    std::size_t token_vocab_size = kDefaultTokenVocabSize;
    std::uint64_t seed = 1;
};

// normalize -> preprocess -> tuples -> split -> restrict, plus the integral
// synonym set and the recognized-token vocabulary. Returns the manifest.
inline nlohmann::json run_prepare(const PrepareInputs& in) {
    auto stage = [](const char* name, auto&& fn) {
        try {
            return fn();
        } catch (const std::exception& e) {
            throw std::runtime_error(std::string("prepare[") + name + "]: " + e.what());
        }
    };

    const auto table = stage("normalization_table", [&] { return load_table_or_default(in.normtable_path); });
    const auto stops = stage("stopwords", [&] { return load_stopwords_or_default(in.stopwords_path, table); });

    LoadCounts load_counts;
    const auto entries = stage("load_entries", [&] { return load_entries(in.entries_path, &load_counts); });
    const auto normalized = stage("normalize", [&] { return normalize_entries(entries, table); });
    const auto pre = stage("preprocess",
                           [&] { return preprocess_entries(entries, table, stops, in.token_vocab_size); });
    const auto tuples = stage("tuples", [&] { return entries_to_tuples(pre.entries); });
    const auto split = stage("split", [&] { return split_811(tuples, in.seed); });
    const auto ranking = stage("ranking", [&] { return FrequencyRanking::load(in.ranking_path); });
    const auto restricted = stage("restrict", [&] { return restrict_to_top_words(split, ranking, in.n); });

    const auto synonyms = stage("synonyms", [&] {
        SynonymSet dict;
        if (in.synonyms_dict_path) dict = normalize_synonyms(SynonymSet::load(*in.synonyms_dict_path), table);
        return build_integral_synonyms(dict, normalized);
    });

    stage("write_artifacts", [&] {
        std::filesystem::create_directories(in.output_dir);
        save_tuples(in.output_dir / artifact::kTrainTuples, restricted.train);
        save_tuples(in.output_dir / artifact::kDevTuples, restricted.dev);
        save_tuples(in.output_dir / artifact::kTestTuples, restricted.test);
        synonyms.save(in.output_dir / artifact::kSynonyms);
        save_token_vocab(in.output_dir / artifact::kTokenVocab, pre.token_vocab);
        FrequencyRanking candidates;
        candidates.entries.assign(ranking.entries.begin(),
                                  ranking.entries.begin() +
                                      static_cast<std::ptrdiff_t>(std::min(in.n, ranking.entries.size())));
        candidates.save(in.output_dir / artifact::kCandidates);
        return 0;
    });

    nlohmann::json manifest;
    manifest["load"] = {{"lines", load_counts.lines},
                        {"dropped_empty", load_counts.dropped_empty},
                        {"dropped_duplicate", load_counts.dropped_duplicate},
                        {"entries", load_counts.entries}};
    const auto& c = pre.counts;
    manifest["preprocess"] = {{"entries_in", c.entries_in},
                              {"phrases_in", c.phrases_in},
                              {"self_definition_tokens_removed", c.self_definition_tokens_removed},
                              {"stopword_entries_dropped", c.stopword_entries_dropped},
                              {"stopword_tokens_removed", c.stopword_tokens_removed},
                              {"short_phrases_dropped", c.short_phrases_dropped},
                              {"short_word_entries_dropped", c.short_word_entries_dropped},
                              {"token_vocab_size", c.token_vocab_size},
                              {"oov_tokens_removed", c.oov_tokens_removed},
                              {"short_phrases_dropped_after_oov", c.short_phrases_dropped_after_oov},
                              {"empty_entries_dropped", c.empty_entries_dropped},
                              {"entries_out", c.entries_out},
                              {"phrases_out", c.phrases_out}};
    manifest["tuples"] = tuples.size();
    manifest["split"] = {{"train", split.train.size()},
                         {"dev", split.dev.size()},
                         {"test", split.test.size()},
                         {"seed", in.seed}};
    manifest["restricted"] = {{"train", restricted.train.size()},
                              {"dev", restricted.dev.size()},
                              {"test", restricted.test.size()},
                              {"n", in.n}};
    manifest["synonyms"] = {{"words", synonyms.word_count()}, {"pairs", synonyms.pair_count()}};

    std::ofstream mf(in.output_dir / artifact::kManifest, std::ios::binary);
    if (!mf) throw std::runtime_error("prepare[write_artifacts]: cannot write manifest");
    mf << manifest.dump(2) << '\n';
    return manifest;
}

inline nlohmann::json load_manifest(const std::filesystem::path& workdir) {
    std::ifstream in(workdir / artifact::kManifest);
    if (!in)
        throw std::runtime_error("cannot open manifest (did prepare run?): " +
                                 (workdir / artifact::kManifest).string());
    nlohmann::json j;
    in >> j;
    return j;
}

inline std::unordered_set<std::string> load_token_vocab_words(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open token vocabulary: " + path.string());
    std::unordered_set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        words.insert(tab == std::string::npos ? line : line.substr(0, tab));
    }
    return words;
}

struct TrainInputs {
    std::filesystem::path workdir;
    std::filesystem::path embeddings_path;
    std::filesystem::path checkpoint_path;
    ModelConfig model_config;
    TrainConfig train_config;
    bool resume = false;
};

// Trains on the prepared artifacts and writes the checkpoint plus
// train_report.jsonl (one {"epoch", "train_loss", "dev_loss"} object per
// line).
inline TrainReport run_train(const TrainInputs& in) {
    DatasetSplit split;
    split.train = load_tuples(in.workdir / artifact::kTrainTuples);
    split.dev = load_tuples(in.workdir / artifact::kDevTuples);
    split.test = load_tuples(in.workdir / artifact::kTestTuples);

    const auto manifest = load_manifest(in.workdir);
    const std::size_t n = manifest["restricted"]["n"].get<std::size_t>();
    ModelConfig model_config = in.model_config;
    model_config.output_word_count = n;

    const auto token_words = load_token_vocab_words(in.workdir / artifact::kTokenVocab);
    auto input_table = EmbeddingTable::load(in.embeddings_path, &token_words);

    const auto candidates = FrequencyRanking::load(in.workdir / artifact::kCandidates);
    std::unordered_set<std::string> candidate_words;
    for (const auto& e : candidates.entries) candidate_words.insert(e.word);
    auto targets = EmbeddingTable::load(in.embeddings_path, &candidate_words);
    targets.frozen = true;

    std::optional<ModelParams<float>> resume_params;
    if (in.resume) {
        auto loaded = load_checkpoint(in.checkpoint_path);
        resume_params = std::move(loaded.params);
        input_table = std::move(loaded.input_table);
    }
    if (input_table.size() == 0) throw std::runtime_error("train: no recognized token has a pretrained vector");
    if (input_table.dim != model_config.dim)
        throw std::runtime_error("train: embedding dimension " + std::to_string(input_table.dim) +
                                 " does not match model dimension " + std::to_string(model_config.dim));
    model_config.input_vocab_size = input_table.size();

    const auto trained = train_model(model_config, in.train_config, split, input_table, targets,
                                     in.checkpoint_path, resume_params);

    std::ofstream report(in.workdir / artifact::kTrainReport, std::ios::binary);
    if (!report) throw std::runtime_error("train: cannot write train report");
    for (const auto& e : trained.report.epochs) {
        nlohmann::json j;
        j["epoch"] = e.epoch;
        j["train_loss"] = e.train_loss;
        j["dev_loss"] = e.dev_loss;
        report << j.dump() << '\n';
    }
    return trained.report;
}

struct EvalInputs {
    std::filesystem::path workdir;
    std::filesystem::path embeddings_path;
    std::filesystem::path checkpoint_path;
    std::size_t sample_buckets = 500;  // s
    std::uint64_t seed = 1;
};

struct EvalOutcome {
    MetricReport seen;
    MetricReport unseen;
};

// Draws stratified samples (s buckets; the training sample uses `seed`, the
// testing sample `seed + 1`) and computes accuracy@10/100,
// synonym-accuracy@10/100 and mean cosine loss for each; writes metrics.json.
inline EvalOutcome run_eval(const EvalInputs& in) {
    auto loaded = load_checkpoint(in.checkpoint_path);
    const auto& params = loaded.params;
    const auto& input_table = loaded.input_table;

    const auto manifest = load_manifest(in.workdir);
    const std::size_t n = manifest["restricted"]["n"].get<std::size_t>();
    if (params.config.output_word_count != n)
        throw std::runtime_error("eval: checkpoint was trained for n=" +
                                 std::to_string(params.config.output_word_count) +
                                 " but the prepared data uses n=" + std::to_string(n));

    const auto candidates = FrequencyRanking::load(in.workdir / artifact::kCandidates);
    std::vector<std::string> candidate_words;
    std::unordered_set<std::string> candidate_set;
    candidate_words.reserve(candidates.entries.size());
    for (const auto& e : candidates.entries) {
        candidate_words.push_back(e.word);
        candidate_set.insert(e.word);
    }

    auto targets = EmbeddingTable::load(in.embeddings_path, &candidate_set);
    targets.frozen = true;
    for (const auto& w : candidate_words)
        if (!targets.lookup(w))
            throw std::runtime_error("eval: candidate word '" + w + "' has no pretrained vector");

    const auto synonyms = SynonymSet::load(in.workdir / artifact::kSynonyms);

    auto evaluate_split = [&](const std::filesystem::path& tuples_path, const std::string& tag,
                              std::uint64_t seed) {
        auto tuples = load_tuples(tuples_path);
        std::erase_if(tuples,
                      [&](const DefinitionTuple& t) { return tuple_inputs(t, input_table).empty(); });
        if (tuples.empty())
            throw std::runtime_error("eval: no usable tuples in " + tuples_path.string());
        const auto sample = stratified_sample(tuples, candidates, in.sample_buckets, n, seed);
        if (sample.tuples.empty()) throw std::runtime_error("eval: empty stratified sample (" + tag + ")");

        std::vector<Ranking> rankings;
        std::vector<std::string> originals;
        rankings.reserve(sample.tuples.size());
        for (const auto& t : sample.tuples) {
            const auto inputs = tuple_inputs(t, input_table);
            const auto trace = model_forward(params, inputs);
            rankings.push_back(rank_candidates(trace.output, targets, candidate_words, 100));
            originals.push_back(t.word);
        }

        MetricReport r;
        r.acc10 = accuracy_at_k(rankings, originals, 10, candidate_set);
        r.acc100 = accuracy_at_k(rankings, originals, 100, candidate_set);
        r.syn_acc10 = synonym_accuracy_at_k(rankings, originals, synonyms, 10, candidate_set);
        r.syn_acc100 = synonym_accuracy_at_k(rankings, originals, synonyms, 100, candidate_set);
        r.cosine_loss = dataset_loss(params, input_table, sample.tuples, targets);
        r.sample_size = sample.tuples.size();
        r.split = tag;
        r.n = n;
        return r;
    };

    EvalOutcome out;
    out.seen = evaluate_split(in.workdir / artifact::kTrainTuples, "seen", in.seed);
    out.unseen = evaluate_split(in.workdir / artifact::kTestTuples, "unseen", in.seed + 1);

    nlohmann::json j;
    j["seen"] = out.seen.to_json();
    j["unseen"] = out.unseen.to_json();
    std::ofstream mf(in.workdir / artifact::kMetrics, std::ios::binary);
    if (!mf) throw std::runtime_error("eval: cannot write metrics file");
    mf << j.dump(2) << '\n';
    return out;
}

struct QueryResult {
    Ranking ranking;
    std::vector<std::string> used_tokens;
    std::vector<std::string> dropped_tokens;
};

// Normalizes and tokenizes one phrase, drops out-of-vocabulary tokens, runs
// the encoder and ranks the candidate words. Throws if nothing survives.
inline QueryResult run_query(const ModelParams<float>& params, const EmbeddingTable& input_table,
                             const EmbeddingTable& targets, const std::vector<std::string>& candidate_words,
                             const NormalizationTable& table, const StopwordList& stops,
                             const std::string& phrase, std::size_t k) {
    const auto tokens = remove_stopwords(tokenize(replace_pseudo_spaces(normalize_text(phrase, table))), stops);
    if (tokens.empty()) throw std::runtime_error("query: phrase is empty after normalization");

    QueryResult result;
    std::vector<Vec<float>> inputs;
    for (const auto& tok : tokens) {
        if (const auto row = input_table.lookup(tok)) {
            inputs.push_back(input_table.vector_of(*row));
            result.used_tokens.push_back(tok);
        } else {
            result.dropped_tokens.push_back(tok);
        }
    }
    if (inputs.empty()) throw std::runtime_error("query: every token is out of vocabulary");

    const auto trace = model_forward(params, inputs);
    result.ranking = rank_candidates(trace.output, targets, candidate_words, k);
    return result;
}

}  // namespace revdict
