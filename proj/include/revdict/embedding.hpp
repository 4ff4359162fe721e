// Pretrained word-vector tables (trainable input copy, frozen target copy),
// cosine similarity, and exhaustive top-k candidate ranking.
#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace revdict {

template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

struct EmbeddingTable {
    int dim = 0;
    bool frozen = false;
    std::vector<std::string> vocab;
    std::unordered_map<std::string, int> index;
    Eigen::MatrixXf matrix;  // |vocab| x dim, one row per word

    std::optional<int> lookup(const std::string& word) const {
        const auto it = index.find(word);
        if (it == index.end()) return std::nullopt;
        return it->second;
    }

    Eigen::VectorXf vector_of(int row) const { return matrix.row(row).transpose(); }

    std::size_t size() const { return vocab.size(); }

    void add(const std::string& word, const Eigen::VectorXf& v) {
        if (index.count(word)) throw std::invalid_argument("embedding table already contains: " + word);
        if (dim == 0) dim = static_cast<int>(v.size());
        if (v.size() != dim) throw std::invalid_argument("embedding dimension mismatch for: " + word);
        if (v.norm() == 0.0f) throw std::invalid_argument("zero vector for word: " + word);
        index.emplace(word, static_cast<int>(vocab.size()));
        vocab.push_back(word);
        matrix.conservativeResize(static_cast<Eigen::Index>(vocab.size()), dim);
        matrix.row(static_cast<Eigen::Index>(vocab.size()) - 1) = v.transpose();
    }

    static EmbeddingTable load(const std::filesystem::path& path,
                               const std::unordered_set<std::string>* vocab_filter = nullptr);
    void save(const std::filesystem::path& path) const;
};

// Word-vector text format: optional `COUNT DIM` header, then one line per
// word: `word v1 v2 ... vd`, space-separated. Duplicate words keep their
// first occurrence.
inline EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path,
                                           const std::unordered_set<std::string>* vocab_filter) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open vector file: " + path.string());

    EmbeddingTable table;
    std::vector<float> values;
    std::vector<std::string> words;
    std::string line;
    std::size_t line_no = 0;
    int dim = 0;
    bool first_content_line = true;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        std::istringstream ss(line);
        std::string word;
        ss >> word;

        if (first_content_line) {
            first_content_line = false;
            // `COUNT DIM` header: two integer fields and nothing else.
            long long count_field, dim_field;
            char extra;
            std::istringstream probe(line);
            if (probe >> count_field >> dim_field && !(probe >> extra) && count_field >= 0 && dim_field > 0) {
                dim = static_cast<int>(dim_field);
                continue;
            }
        }

        std::vector<float> row;
        double v;
        while (ss >> v) row.push_back(static_cast<float>(v));
        if (!ss.eof())
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": non-numeric vector value");
        if (row.empty())
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": no vector values");
        if (dim == 0) dim = static_cast<int>(row.size());
        if (static_cast<int>(row.size()) != dim)
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected " +
                                     std::to_string(dim) + " values, got " + std::to_string(row.size()));
        if (vocab_filter && !vocab_filter->count(word)) continue;
        if (table.index.count(word)) continue;

        float norm_sq = 0.0f;
        for (float x : row) norm_sq += x * x;
        if (norm_sq == 0.0f)
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": zero vector for word '" +
                                     word + "'");

        table.index.emplace(word, static_cast<int>(words.size()));
        words.push_back(word);
        values.insert(values.end(), row.begin(), row.end());
    }

    table.dim = dim;
    table.vocab = std::move(words);
    table.matrix.resize(static_cast<Eigen::Index>(table.vocab.size()), dim);
    for (std::size_t r = 0; r < table.vocab.size(); ++r)
        for (int c = 0; c < dim; ++c) table.matrix(static_cast<Eigen::Index>(r), c) = values[r * dim + c];
    return table;
}

inline void EmbeddingTable::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write vector file: " + path.string());
    out << vocab.size() << ' ' << dim << '\n';
    out.precision(9);
    for (std::size_t r = 0; r < vocab.size(); ++r) {
        out << vocab[r];
        for (int c = 0; c < dim; ++c) out << ' ' << matrix(static_cast<Eigen::Index>(r), c);
        out << '\n';
    }
}

template <class S>
S cosine_similarity(const Vec<S>& a, const Vec<S>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("cosine_similarity: dimension mismatch");
    const S na = a.norm(), nb = b.norm();
    if (na == S(0) || nb == S(0)) throw std::invalid_argument("cosine_similarity: zero-norm vector");
    return a.dot(b) / (na * nb);
}

struct Ranking {
    std::vector<std::pair<std::string, double>> suggestions;  // non-increasing similarity
    Eigen::VectorXf query_vector;
};

// Exhaustive scan over the candidate words; ties keep candidate order (the
// frequency rank the caller passed them in). Similarities use double
// arithmetic over the frozen float table.
inline Ranking rank_candidates(const Eigen::VectorXf& v_o, const EmbeddingTable& frozen,
                               const std::vector<std::string>& candidates, std::size_t k) {
    if (candidates.empty()) throw std::invalid_argument("rank_candidates: empty candidate set");
    if (k < 1) throw std::invalid_argument("rank_candidates: k must be >= 1");

    const Eigen::VectorXd q = v_o.cast<double>();
    const double qn = q.norm();
    if (qn == 0.0) throw std::invalid_argument("rank_candidates: zero-norm query vector");

    std::vector<double> sims(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto row = frozen.lookup(candidates[i]);
        if (!row) throw std::runtime_error("rank_candidates: candidate '" + candidates[i] + "' has no embedding");
        const Eigen::VectorXd w = frozen.matrix.row(*row).transpose().cast<double>();
        sims[i] = q.dot(w) / (qn * w.norm());
    }

    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return sims[a] > sims[b]; });

    Ranking r;
    r.query_vector = v_o;
    const std::size_t take = std::min(k, candidates.size());
    r.suggestions.reserve(take);
    for (std::size_t i = 0; i < take; ++i) r.suggestions.emplace_back(candidates[order[i]], sims[order[i]]);
    return r;
}

}  // namespace revdict
