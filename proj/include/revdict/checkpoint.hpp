// Checkpoints: a versioned binary container of named float32 tensors
// (row-major, little-endian) plus the model configuration and the input
// vocabulary. Save/load round-trips are bit-exact.
#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "revdict/embedding.hpp"
#include "revdict/model.hpp"

namespace revdict {

namespace ckpt_detail {

constexpr char kMagic[8] = {'R', 'V', 'D', 'C', 'K', 'P', 'T', '\x01'};

inline void write_u32(std::ostream& out, std::uint32_t v) {
    char b[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                 static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
    out.write(b, 4);
}

inline void write_u64(std::ostream& out, std::uint64_t v) {
    write_u32(out, static_cast<std::uint32_t>(v & 0xFFFFFFFFu));
    write_u32(out, static_cast<std::uint32_t>(v >> 32));
}

inline void write_f32(std::ostream& out, float f) {
    std::uint32_t v;
    std::memcpy(&v, &f, 4);
    write_u32(out, v);
}

inline void write_string(std::ostream& out, const std::string& s) {
    write_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw std::runtime_error("checkpoint: truncated file");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline std::uint64_t read_u64(std::istream& in) {
    const std::uint64_t lo = read_u32(in);
    const std::uint64_t hi = read_u32(in);
    return lo | (hi << 32);
}

inline float read_f32(std::istream& in) {
    const std::uint32_t v = read_u32(in);
    float f;
    std::memcpy(&f, &v, 4);
    return f;
}

inline std::string read_string(std::istream& in) {
    const auto len = read_u32(in);
    std::string s(len, '\0');
    in.read(s.data(), len);
    if (!in) throw std::runtime_error("checkpoint: truncated string");
    return s;
}

inline void write_tensor(std::ostream& out, const std::string& name, const float* data,
                         Eigen::Index rows, Eigen::Index cols) {
    write_string(out, name);
    write_u64(out, static_cast<std::uint64_t>(rows));
    write_u64(out, static_cast<std::uint64_t>(cols));
    // Values go out row-major regardless of in-memory layout.
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) write_f32(out, data[c * rows + r]);
}

}  // namespace ckpt_detail

inline void save_checkpoint(const std::filesystem::path& path, const ModelParams<float>& params,
                            const EmbeddingTable& input_table) {
    namespace d = ckpt_detail;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path.string());
    out.write(d::kMagic, sizeof(d::kMagic));

    const auto& cfg = params.config;
    d::write_u32(out, static_cast<std::uint32_t>(cfg.architecture));
    d::write_u32(out, static_cast<std::uint32_t>(cfg.score_reduce));
    d::write_u32(out, static_cast<std::uint32_t>(cfg.dim));
    d::write_u64(out, cfg.input_vocab_size);
    d::write_u64(out, cfg.output_word_count);

    std::uint32_t count = 1;  // input_embeddings
    visit_tensors(params, [&](const std::string&, const auto&, bool) { ++count; });
    d::write_u32(out, count);

    visit_tensors(params, [&](const std::string& name, const auto& t, bool) {
        d::write_tensor(out, name, t.data(), t.rows(), t.cols());
    });
    d::write_tensor(out, "input_embeddings", input_table.matrix.data(), input_table.matrix.rows(),
                    input_table.matrix.cols());

    d::write_u64(out, input_table.vocab.size());
    for (const auto& w : input_table.vocab) d::write_string(out, w);
    if (!out) throw std::runtime_error("checkpoint write failed: " + path.string());
}

struct LoadedCheckpoint {
    ModelParams<float> params;
    EmbeddingTable input_table;
};

inline LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
    namespace d = ckpt_detail;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, d::kMagic, 8) != 0)
        throw std::runtime_error("not a checkpoint file (bad magic/version): " + path.string());

    ModelConfig cfg;
    cfg.architecture = static_cast<Architecture>(d::read_u32(in));
    cfg.score_reduce = static_cast<ScoreReduce>(d::read_u32(in));
    cfg.dim = static_cast<int>(d::read_u32(in));
    cfg.input_vocab_size = d::read_u64(in);
    cfg.output_word_count = d::read_u64(in);
    if (cfg.dim <= 0) throw std::runtime_error("checkpoint: invalid dimension");

    struct RawTensor {
        std::uint64_t rows, cols;
        std::vector<float> values;  // row-major
    };
    std::map<std::string, RawTensor> raw;
    const auto count = d::read_u32(in);
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto name = d::read_string(in);
        RawTensor t;
        t.rows = d::read_u64(in);
        t.cols = d::read_u64(in);
        t.values.resize(t.rows * t.cols);
        for (auto& v : t.values) v = d::read_f32(in);
        if (!raw.emplace(name, std::move(t)).second)
            throw std::runtime_error("checkpoint: duplicate tensor '" + name + "'");
    }

    LoadedCheckpoint result;
    result.params = ModelParams<float>::zeros(cfg);
    std::size_t consumed = 0;
    visit_tensors(result.params, [&](const std::string& name, auto& t, bool) {
        const auto it = raw.find(name);
        if (it == raw.end()) throw std::runtime_error("checkpoint: missing tensor '" + name + "'");
        const auto& rt = it->second;
        if (rt.rows != static_cast<std::uint64_t>(t.rows()) ||
            rt.cols != static_cast<std::uint64_t>(t.cols()))
            throw std::runtime_error("checkpoint: shape mismatch for tensor '" + name + "'");
        for (Eigen::Index r = 0; r < t.rows(); ++r)
            for (Eigen::Index c = 0; c < t.cols(); ++c)
                t.data()[c * t.rows() + r] = rt.values[static_cast<std::size_t>(r) * rt.cols + c];
        ++consumed;
    });

    const auto emb = raw.find("input_embeddings");
    if (emb == raw.end()) throw std::runtime_error("checkpoint: missing tensor 'input_embeddings'");
    ++consumed;
    if (consumed != raw.size()) throw std::runtime_error("checkpoint: unexpected extra tensors");

    auto& table = result.input_table;
    table.dim = static_cast<int>(emb->second.cols);
    table.frozen = false;
    table.matrix.resize(static_cast<Eigen::Index>(emb->second.rows), static_cast<Eigen::Index>(emb->second.cols));
    for (std::uint64_t r = 0; r < emb->second.rows; ++r)
        for (std::uint64_t c = 0; c < emb->second.cols; ++c)
            table.matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                emb->second.values[r * emb->second.cols + c];

    const auto vocab_count = d::read_u64(in);
    if (vocab_count != emb->second.rows)
        throw std::runtime_error("checkpoint: vocabulary size does not match input_embeddings rows");
    table.vocab.reserve(vocab_count);
    for (std::uint64_t i = 0; i < vocab_count; ++i) {
        auto word = d::read_string(in);
        if (!table.index.emplace(word, static_cast<int>(i)).second)
            throw std::runtime_error("checkpoint: duplicate vocabulary word '" + word + "'");
        table.vocab.push_back(std::move(word));
    }
    return result;
}

}  // namespace revdict
