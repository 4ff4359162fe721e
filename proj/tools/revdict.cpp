// revdict: a neural reverse dictionary for Persian. Subcommands cover the
// whole pipeline: rank, coverage, prepare, train, eval, query, mos.
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "revdict/kappa.hpp"
#include "revdict/pipeline.hpp"

namespace fs = std::filesystem;
using namespace revdict;

namespace {

struct RunConfig {
    std::string entries, embeddings, stopwords, normtable, synonyms_dict, ranking, lemma_map;
    std::string workdir = "out";
    std::string checkpoint;
    std::string corpus;  // comma-separated paths
    std::string arch = "lstm-att";
    std::string score_reduce = "sum";
    int d = 300;
    std::size_t n = 3000;
    std::size_t k = 10;
    std::size_t s = 500;
    std::uint64_t seed = 1;
    std::size_t token_vocab_size = kDefaultTokenVocabSize;
    double lr = 1.0;
    std::size_t batch_size = 16;
    std::size_t patience = 3;
    double min_delta = 1e-4;
    std::size_t max_epochs = 100;
    double clip_norm = 0.0;
    std::string coverage_ns = "3000,5000,10000,20000";
    double mos_threshold = kValidRaterThreshold;
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur), cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

// Key/value config file: `key = value` per line, '#' starts a comment.
// Command-line flags override anything set here.
void apply_config_file(RunConfig& cfg, const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path.string());
    const std::map<std::string, std::function<void(const std::string&)>> setters = {
        {"entries", [&](const std::string& v) { cfg.entries = v; }},
        {"embeddings", [&](const std::string& v) { cfg.embeddings = v; }},
        {"stopwords", [&](const std::string& v) { cfg.stopwords = v; }},
        {"normtable", [&](const std::string& v) { cfg.normtable = v; }},
        {"synonyms_dict", [&](const std::string& v) { cfg.synonyms_dict = v; }},
        {"ranking", [&](const std::string& v) { cfg.ranking = v; }},
        {"lemma_map", [&](const std::string& v) { cfg.lemma_map = v; }},
        {"workdir", [&](const std::string& v) { cfg.workdir = v; }},
        {"checkpoint", [&](const std::string& v) { cfg.checkpoint = v; }},
        {"corpus", [&](const std::string& v) { cfg.corpus = v; }},
        {"arch", [&](const std::string& v) { cfg.arch = v; }},
        {"score_reduce", [&](const std::string& v) { cfg.score_reduce = v; }},
        {"d", [&](const std::string& v) { cfg.d = std::stoi(v); }},
        {"n", [&](const std::string& v) { cfg.n = std::stoull(v); }},
        {"k", [&](const std::string& v) { cfg.k = std::stoull(v); }},
        {"s", [&](const std::string& v) { cfg.s = std::stoull(v); }},
        {"seed", [&](const std::string& v) { cfg.seed = std::stoull(v); }},
        {"token_vocab_size", [&](const std::string& v) { cfg.token_vocab_size = std::stoull(v); }},
        {"lr", [&](const std::string& v) { cfg.lr = std::stod(v); }},
        {"batch_size", [&](const std::string& v) { cfg.batch_size = std::stoull(v); }},
        {"patience", [&](const std::string& v) { cfg.patience = std::stoull(v); }},
        {"min_delta", [&](const std::string& v) { cfg.min_delta = std::stod(v); }},
        {"max_epochs", [&](const std::string& v) { cfg.max_epochs = std::stoull(v); }},
        {"clip_norm", [&](const std::string& v) { cfg.clip_norm = std::stod(v); }},
        {"coverage_ns", [&](const std::string& v) { cfg.coverage_ns = v; }},
        {"mos_threshold", [&](const std::string& v) { cfg.mos_threshold = std::stod(v); }},
    };
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        const auto eq = line.find('=');
        if (trim(line).empty()) continue;
        if (eq == std::string::npos)
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        const auto it = setters.find(key);
        if (it == setters.end())
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
        it->second(value);
    }
}

std::optional<fs::path> optional_path(const std::string& s) {
    if (s.empty()) return std::nullopt;
    if (!fs::exists(s)) throw std::runtime_error("path does not exist: " + s);
    return fs::path(s);
}

fs::path required_path(const std::string& s, const char* what) {
    if (s.empty()) throw std::runtime_error(std::string("missing required path: ") + what);
    if (!fs::exists(s)) throw std::runtime_error(std::string(what) + " does not exist: " + s);
    return fs::path(s);
}

ModelConfig make_model_config(const RunConfig& cfg) {
    ModelConfig mc;
    mc.architecture = parse_architecture(cfg.arch);
    mc.dim = cfg.d;
    mc.output_word_count = cfg.n;
    if (cfg.score_reduce == "sum") mc.score_reduce = ScoreReduce::Sum;
    else if (cfg.score_reduce == "mean") mc.score_reduce = ScoreReduce::Mean;
    else throw std::runtime_error("unknown score_reduce: " + cfg.score_reduce + " (expected sum|mean)");
    return mc;
}

TrainConfig make_train_config(const RunConfig& cfg) {
    TrainConfig tc;
    tc.learning_rate = cfg.lr;
    tc.batch_size = cfg.batch_size;
    tc.patience = cfg.patience;
    tc.min_delta = cfg.min_delta;
    tc.max_epochs = cfg.max_epochs;
    tc.seed = cfg.seed;
    tc.clip_norm = cfg.clip_norm;
    return tc;
}

int cmd_rank(const RunConfig& cfg) {
    const auto table = load_table_or_default(optional_path(cfg.normtable));
    const auto paths = split_list(cfg.corpus);
    if (paths.empty()) throw std::runtime_error("rank: no corpus files configured");
    std::vector<std::ifstream> files;
    std::vector<std::istream*> streams;
    for (const auto& p : paths) {
        files.emplace_back(required_path(p, "corpus file"));
        streams.push_back(&files.back());
    }
    auto ranking = build_ranking(streams, table);
    std::size_t raw_size = ranking.size();

    if (!cfg.entries.empty()) {
        const auto stops = load_stopwords_or_default(optional_path(cfg.stopwords), table);
        const auto entries = load_entries(required_path(cfg.entries, "entries file"));
        std::unordered_set<std::string> lexicon;
        for (const auto& e : entries) {
            const auto w = normalize_text(e.word, table);
            if (!w.empty()) lexicon.insert(w);
        }
        ranking = prune_ranking(ranking, stops, lexicon);
    }

    const fs::path out = cfg.ranking.empty() ? fs::path(cfg.workdir) / "ranking.tsv" : fs::path(cfg.ranking);
    fs::create_directories(out.parent_path().empty() ? "." : out.parent_path());
    ranking.save(out);
    std::cerr << "ranked " << raw_size << " words";
    if (!cfg.entries.empty()) std::cerr << ", " << ranking.size() << " after pruning";
    std::cerr << " -> " << out.string() << "\n";
    return 0;
}

int cmd_coverage(const RunConfig& cfg) {
    const auto table = load_table_or_default(optional_path(cfg.normtable));
    const auto stops = load_stopwords_or_default(optional_path(cfg.stopwords), table);
    const auto ranking = FrequencyRanking::load(required_path(cfg.ranking, "ranking file"));
    const auto lemmatizer =
        cfg.lemma_map.empty() ? identity_lemmatizer() : load_lemma_map(required_path(cfg.lemma_map, "lemma map"));

    const auto paths = split_list(cfg.corpus);
    if (paths.empty()) throw std::runtime_error("coverage: no corpus files configured");
    std::unordered_map<std::string, std::uint64_t> lemma_counts;
    for (const auto& p : paths) {
        std::ifstream in(required_path(p, "corpus file"));
        std::string line;
        while (std::getline(in, line)) {
            for (const auto& tok : remove_stopwords(tokenize(normalize_text(line, table)), stops))
                ++lemma_counts[lemmatizer(tok)];
        }
    }

    for (const auto& ns : split_list(cfg.coverage_ns)) {
        const auto report = measure_coverage(ranking, lemma_counts, std::stoull(ns));
        nlohmann::json j;
        j["n"] = report.n;
        j["covered_fraction"] = report.covered_fraction;
        std::cout << j.dump() << "\n";
    }
    return 0;
}

int cmd_prepare(const RunConfig& cfg) {
    PrepareInputs in;
    in.entries_path = required_path(cfg.entries, "entries file");
    in.ranking_path = required_path(cfg.ranking, "ranking file");
    in.output_dir = cfg.workdir;
    in.normtable_path = optional_path(cfg.normtable);
    in.stopwords_path = optional_path(cfg.stopwords);
    in.synonyms_dict_path = optional_path(cfg.synonyms_dict);
    in.n = cfg.n;
    in.token_vocab_size = cfg.token_vocab_size;
    in.seed = cfg.seed;
    const auto manifest = run_prepare(in);
    std::cout << manifest.dump(2) << "\n";
    return 0;
}

int cmd_train(const RunConfig& cfg, bool resume) {
    TrainInputs in;
    in.workdir = required_path(cfg.workdir, "workdir");
    in.embeddings_path = required_path(cfg.embeddings, "embeddings file");
    in.checkpoint_path = cfg.checkpoint.empty() ? in.workdir / "model.ckpt" : fs::path(cfg.checkpoint);
    in.model_config = make_model_config(cfg);
    in.train_config = make_train_config(cfg);
    in.resume = resume;
    if (resume && !fs::exists(in.checkpoint_path))
        throw std::runtime_error("train --resume: checkpoint does not exist: " + in.checkpoint_path.string());

    const auto report = run_train(in);
    for (const auto& e : report.epochs) {
        nlohmann::json j;
        j["epoch"] = e.epoch;
        j["train_loss"] = e.train_loss;
        j["dev_loss"] = e.dev_loss;
        std::cout << j.dump() << "\n";
    }
    std::cerr << "best epoch " << report.best_epoch << " (dev loss " << report.best_dev_loss << "), "
              << report.stopping_reason << "; checkpoint -> " << in.checkpoint_path.string() << "\n";
    if (report.skipped_train_tuples || report.skipped_dev_tuples)
        std::cerr << "skipped tuples without in-vocabulary tokens: train " << report.skipped_train_tuples
                  << ", dev " << report.skipped_dev_tuples << "\n";
    return 0;
}

int cmd_eval(const RunConfig& cfg, bool table_output) {
    EvalInputs in;
    in.workdir = required_path(cfg.workdir, "workdir");
    in.embeddings_path = required_path(cfg.embeddings, "embeddings file");
    in.checkpoint_path =
        cfg.checkpoint.empty() ? in.workdir / "model.ckpt" : required_path(cfg.checkpoint, "checkpoint");
    in.sample_buckets = cfg.s;
    in.seed = cfg.seed;
    const auto outcome = run_eval(in);
    if (table_output) {
        std::cout << "n = " << outcome.seen.n << "\n"
                  << render_metric_table({outcome.seen, outcome.unseen});
    } else {
        std::cout << outcome.seen.to_json().dump() << "\n" << outcome.unseen.to_json().dump() << "\n";
    }
    return 0;
}

int cmd_query(const RunConfig& cfg, const std::vector<std::string>& phrase_words) {
    const fs::path workdir = required_path(cfg.workdir, "workdir");
    const auto checkpoint_path =
        cfg.checkpoint.empty() ? workdir / "model.ckpt" : required_path(cfg.checkpoint, "checkpoint");
    auto loaded = load_checkpoint(checkpoint_path);
    const auto table = load_table_or_default(optional_path(cfg.normtable));
    const auto stops = load_stopwords_or_default(optional_path(cfg.stopwords), table);

    const auto candidates = FrequencyRanking::load(workdir / artifact::kCandidates);
    std::vector<std::string> candidate_words;
    std::unordered_set<std::string> candidate_set;
    for (const auto& e : candidates.entries) {
        candidate_words.push_back(e.word);
        candidate_set.insert(e.word);
    }
    auto targets = EmbeddingTable::load(required_path(cfg.embeddings, "embeddings file"), &candidate_set);
    targets.frozen = true;

    auto answer = [&](const std::string& phrase) {
        const auto result =
            run_query(loaded.params, loaded.input_table, targets, candidate_words, table, stops, phrase, cfg.k);
        for (const auto& tok : result.dropped_tokens)
            std::cerr << "warning: token '" << tok << "' is out of vocabulary\n";
        std::cout << std::setprecision(6) << std::fixed;
        for (std::size_t i = 0; i < result.ranking.suggestions.size(); ++i) {
            const auto& [word, sim] = result.ranking.suggestions[i];
            std::cout << (i + 1) << '\t' << word << '\t' << sim << "\n";
        }
    };

    if (!phrase_words.empty()) {
        std::string phrase;
        for (const auto& w : phrase_words) {
            if (!phrase.empty()) phrase.push_back(' ');
            phrase += w;
        }
        answer(phrase);
        return 0;
    }

    // REPL: one phrase per line until end of input; errors do not end the loop.
    std::string line;
    while (std::getline(std::cin, line)) {
        if (tokenize(line).empty()) continue;
        try {
            answer(line);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
        }
    }
    return 0;
}

int cmd_mos(const std::string& ratings_path, const std::string& manifest_path, double threshold,
            bool json_output) {
    const auto matrix = RatingMatrix::from_csv(required_path(ratings_path, "ratings file"));
    const auto valid = filter_valid_raters(matrix, threshold);

    struct Item {
        std::string kind, source;
    };
    std::unordered_map<std::string, Item> items;
    std::vector<std::string> source_order;
    {
        std::ifstream in(required_path(manifest_path, "item manifest"));
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw std::runtime_error(manifest_path + ":" + std::to_string(line_no) + ": " + e.what());
            }
            Item item;
            item.kind = j.at("kind").get<std::string>();
            item.source = j.value("source", "all");
            if (item.kind != "original" && item.kind != "suggestion_1" && item.kind != "suggestion_2" &&
                item.kind != "suggestion_3")
                throw std::runtime_error(manifest_path + ":" + std::to_string(line_no) + ": unknown kind '" +
                                         item.kind + "'");
            const auto id = j.at("item_id").get<std::string>();
            if (std::find(source_order.begin(), source_order.end(), item.source) == source_order.end())
                source_order.push_back(item.source);
            items.emplace(id, std::move(item));
        }
    }

    // Group rated items by (source, kind); items never rated are ignored.
    std::map<std::string, std::vector<std::string>> groups;
    for (const auto& id : valid.items) {
        const auto it = items.find(id);
        if (it == items.end()) throw std::runtime_error("rated item '" + id + "' is not in the manifest");
        groups[it->second.source + "\x1F" + it->second.kind].push_back(id);
    }
    const auto quality = suggestion_quality(valid, groups);

    static const std::vector<std::pair<std::string, std::string>> kColumns = {
        {"original", "q_t"}, {"suggestion_1", "q_1"}, {"suggestion_2", "q_2"}, {"suggestion_3", "q_3"}};

    if (json_output) {
        nlohmann::json out;
        out["valid_raters"] = valid.rater_count();
        out["total_raters"] = matrix.rater_count();
        for (const auto& source : source_order) {
            nlohmann::json row;
            for (const auto& [kind, label] : kColumns) {
                const auto it = quality.find(source + "\x1F" + kind);
                if (it != quality.end()) row[label] = it->second;
            }
            out["quality"][source] = row;
        }
        std::cout << out.dump(2) << "\n";
        return 0;
    }

    std::cout << "valid raters: " << valid.rater_count() << " of " << matrix.rater_count() << "\n";
    std::cout << std::left << std::setw(20) << "source";
    for (const auto& [kind, label] : kColumns) std::cout << std::right << std::setw(8) << label;
    std::cout << "\n" << std::fixed << std::setprecision(2);
    for (const auto& source : source_order) {
        std::cout << std::left << std::setw(20) << source;
        for (const auto& [kind, label] : kColumns) {
            const auto it = quality.find(source + "\x1F" + kind);
            if (it == quality.end())
                std::cout << std::right << std::setw(8) << "-";
            else
                std::cout << std::right << std::setw(8) << it->second;
        }
        std::cout << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"neural reverse dictionary for Persian"};
    app.require_subcommand(1);

    RunConfig cfg;

    // The config file is applied before flag parsing so flags win.
    try {
        for (int i = 1; i + 1 < argc; ++i) {
            if (std::string(argv[i]) == "--config") apply_config_file(cfg, argv[i + 1]);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    std::string config_path;
    bool resume = false, table_output = false, json_output = false;
    std::vector<std::string> phrase_words;
    std::string ratings_path, manifest_path;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "key = value configuration file");
        sub->add_option("--seed", cfg.seed, "random seed");
        sub->add_option("--workdir", cfg.workdir, "artifact directory");
        sub->add_option("--normtable", cfg.normtable, "normalization table file");
        sub->add_option("--stopwords", cfg.stopwords, "stopword file");
    };

    auto* rank = app.add_subcommand("rank", "build the frequency word ranking from corpora");
    add_common(rank);
    rank->add_option("--corpus", cfg.corpus, "comma-separated corpus text files");
    rank->add_option("--entries", cfg.entries, "lexical entries (enables pruning)");
    rank->add_option("--output", cfg.ranking, "output ranking path");

    auto* coverage = app.add_subcommand("coverage", "measure lemma coverage of top-n ranking words");
    add_common(coverage);
    coverage->add_option("--corpus", cfg.corpus, "comma-separated corpus text files");
    coverage->add_option("--ranking", cfg.ranking, "pruned ranking file");
    coverage->add_option("--ns", cfg.coverage_ns, "comma-separated n values");
    coverage->add_option("--lemma-map", cfg.lemma_map, "surface<TAB>lemma file");

    auto* prepare = app.add_subcommand("prepare", "run the preprocessing/preparation pipeline");
    add_common(prepare);
    prepare->add_option("--entries", cfg.entries, "lexical entries JSONL");
    prepare->add_option("--ranking", cfg.ranking, "pruned ranking file");
    prepare->add_option("--synonyms-dict", cfg.synonyms_dict, "synonym dictionary JSON");
    prepare->add_option("--n", cfg.n, "output vocabulary size");
    prepare->add_option("--token-vocab-size", cfg.token_vocab_size, "recognized token count");

    auto* train = app.add_subcommand("train", "train an architecture on prepared data");
    add_common(train);
    train->add_option("--embeddings", cfg.embeddings, "pretrained word vectors");
    train->add_option("--checkpoint", cfg.checkpoint, "checkpoint path");
    train->add_option("--arch", cfg.arch, "bow|rnn|lstm-att|bilstm-att");
    train->add_option("--d", cfg.d, "embedding dimension");
    train->add_option("--lr", cfg.lr, "Adam learning rate");
    train->add_option("--batch-size", cfg.batch_size, "mini-batch size");
    train->add_option("--patience", cfg.patience, "early-stopping patience (epochs)");
    train->add_option("--min-delta", cfg.min_delta, "early-stopping improvement threshold");
    train->add_option("--max-epochs", cfg.max_epochs, "epoch limit");
    train->add_option("--clip-norm", cfg.clip_norm, "global gradient norm clip (0 = off)");
    train->add_flag("--resume", resume, "continue from the checkpoint");

    auto* eval = app.add_subcommand("eval", "stratified-sample evaluation of a checkpoint");
    add_common(eval);
    eval->add_option("--embeddings", cfg.embeddings, "pretrained word vectors");
    eval->add_option("--checkpoint", cfg.checkpoint, "checkpoint path");
    eval->add_option("--s", cfg.s, "stratified sample bucket count");
    eval->add_flag("--table", table_output, "print an aligned table instead of JSON");

    auto* query = app.add_subcommand("query", "rank candidate words for a phrase (REPL without args)");
    add_common(query);
    query->add_option("--embeddings", cfg.embeddings, "pretrained word vectors");
    query->add_option("--checkpoint", cfg.checkpoint, "checkpoint path");
    query->add_option("--k", cfg.k, "suggestions to print");
    query->add_option("phrase", phrase_words, "descriptive phrase");

    auto* mos = app.add_subcommand("mos", "mean opinion scores with rater validation");
    mos->add_option("--ratings", ratings_path, "CSV rater_id,item_id,score")->required();
    mos->add_option("--manifest", manifest_path, "item manifest JSONL")->required();
    mos->add_option("--threshold", cfg.mos_threshold, "valid-rater agreement threshold");
    mos->add_flag("--json", json_output, "emit JSON instead of a table");

    CLI11_PARSE(app, argc, argv);

    try {
        if (rank->parsed()) return cmd_rank(cfg);
        if (coverage->parsed()) return cmd_coverage(cfg);
        if (prepare->parsed()) return cmd_prepare(cfg);
        if (train->parsed()) return cmd_train(cfg, resume);
        if (eval->parsed()) return cmd_eval(cfg, table_output);
        if (query->parsed()) return cmd_query(cfg, phrase_words);
        if (mos->parsed()) return cmd_mos(ratings_path, manifest_path, cfg.mos_threshold, json_output);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
