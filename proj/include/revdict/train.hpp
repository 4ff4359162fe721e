// Cosine-loss training: Glorot initialization, seeded mini-batch shuffling,
// Adam updates over the model weights and the trainable input embedding
// table, early stopping on development loss with best-epoch restore.
#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "revdict/adam.hpp"
#include "revdict/checkpoint.hpp"
#include "revdict/dataset.hpp"
#include "revdict/embedding.hpp"
#include "revdict/model.hpp"
#include "revdict/rng.hpp"

namespace revdict {

struct TrainConfig {
    double learning_rate = 1.0;  // the published setting; toy problems want ~1e-3
    std::size_t batch_size = 16;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::size_t patience = 3;
    double min_delta = 1e-4;
    std::size_t max_epochs = 100;
    std::uint64_t seed = 1;
    double clip_norm = 0.0;  // 0 disables global-norm clipping

    void validate() const {
        if (learning_rate <= 0) throw std::invalid_argument("train config: learning_rate must be > 0");
        if (batch_size < 1) throw std::invalid_argument("train config: batch_size must be >= 1");
        if (patience < 1) throw std::invalid_argument("train config: patience must be >= 1");
        if (max_epochs < 1) throw std::invalid_argument("train config: max_epochs must be >= 1");
    }
};

struct EpochStats {
    std::size_t epoch;
    double train_loss;
    double dev_loss;
};

struct TrainReport {
    std::vector<EpochStats> epochs;
    std::size_t best_epoch = 0;
    double best_dev_loss = std::numeric_limits<double>::infinity();
    std::string stopping_reason;  // "early_stop" or "max_epochs"
    std::size_t skipped_train_tuples = 0;
    std::size_t skipped_dev_tuples = 0;
};

// 1 - cosine similarity; in [0, 2].
template <class S>
S cosine_loss(const Vec<S>& v_o, const Vec<S>& v_w) {
    return S(1) - cosine_similarity(v_o, v_w);
}

// d/dv_o of cosine_loss(v_o, target).
template <class S>
Vec<S> cosine_loss_grad(const Vec<S>& v_o, const Vec<S>& target) {
    const S no = v_o.norm(), nt = target.norm();
    if (no == S(0) || nt == S(0)) throw std::invalid_argument("cosine_loss_grad: zero-norm vector");
    const S dot = v_o.dot(target);
    return (dot / (no * no * no * nt)) * v_o - target / (no * nt);
}

// Uniform on [-L, L] with L = sqrt(6 / (fan_in + fan_out)). For matrices
// fan_in = cols and fan_out = rows; a column vector uses fan_in = fan_out =
// rows. Elements are drawn in column-major storage order from
// mt19937_64(seed), each as (2u - 1) * L with u = unit_real.
template <class S>
Mat<S> glorot_uniform(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    if (rows <= 0 || cols <= 0) throw std::invalid_argument("glorot_uniform: zero-sized shape");
    const double fan_in = cols == 1 ? static_cast<double>(rows) : static_cast<double>(cols);
    const double fan_out = static_cast<double>(rows);
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    auto rng = make_rng(seed);
    Mat<S> m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i)
        m.data()[i] = static_cast<S>((2.0 * unit_real(rng) - 1.0) * limit);
    return m;
}

// Glorot-uniform weight matrices, zero biases. Tensor i (in visit_tensors
// order) draws from seed + i.
template <class S>
ModelParams<S> init_params(const ModelConfig& config, std::uint64_t seed) {
    auto params = ModelParams<S>::zeros(config);
    std::uint64_t ordinal = 0;
    visit_tensors(params, [&](const std::string&, auto& t, bool is_bias) {
        const std::uint64_t tensor_seed = seed + ordinal++;
        if (!is_bias) t = glorot_uniform<S>(t.rows(), t.cols(), tensor_seed);
    });
    return params;
}

// Embedding rows for a tuple's phrase tokens; out-of-table tokens are
// dropped (the models recognize a fixed token vocabulary).
inline std::vector<Vec<float>> tuple_inputs(const DefinitionTuple& tuple, const EmbeddingTable& table) {
    std::vector<Vec<float>> inputs;
    inputs.reserve(tuple.phrase.size());
    for (const auto& tok : tuple.phrase) {
        if (const auto row = table.lookup(tok)) inputs.push_back(table.vector_of(*row));
    }
    return inputs;
}

// Mean per-tuple cosine loss in evaluation mode (no mutation anywhere).
inline double dataset_loss(const ModelParams<float>& params, const EmbeddingTable& input_table,
                           const std::vector<DefinitionTuple>& tuples, const EmbeddingTable& frozen_targets) {
    if (tuples.empty()) throw std::invalid_argument("dataset_loss: empty tuple list");
    double total = 0.0;
    for (const auto& t : tuples) {
        const auto target_row = frozen_targets.lookup(t.word);
        if (!target_row) throw std::runtime_error("dataset_loss: word '" + t.word + "' has no target embedding");
        const auto inputs = tuple_inputs(t, input_table);
        if (inputs.empty())
            throw std::runtime_error("dataset_loss: tuple for '" + t.word + "' has no in-vocabulary tokens");
        const auto trace = model_forward(params, inputs);
        total += static_cast<double>(cosine_loss<float>(trace.output, frozen_targets.vector_of(*target_row)));
    }
    return total / static_cast<double>(tuples.size());
}

struct TrainedModel {
    ModelParams<float> params;
    EmbeddingTable input_table;
    TrainReport report;
};

// The caller provides the split (already restricted to recognized output
// words), the pretrained input table (copied; becomes trainable) and the
// frozen target table (read-only). Tuples whose tokens are all missing from
// the input table are skipped and counted.
inline TrainedModel train_model(const ModelConfig& model_config, const TrainConfig& train_config,
                                const DatasetSplit& split, const EmbeddingTable& pretrained_inputs,
                                const EmbeddingTable& frozen_targets,
                                const std::optional<std::filesystem::path>& checkpoint_path = std::nullopt,
                                const std::optional<ModelParams<float>>& resume_from = std::nullopt) {
    train_config.validate();
    if (split.train.empty()) throw std::runtime_error("train: empty training set");
    if (split.dev.empty()) throw std::runtime_error("train: empty development set");
    if (pretrained_inputs.dim != model_config.dim || frozen_targets.dim != model_config.dim)
        throw std::runtime_error("train: embedding dimension does not match model dimension");

    TrainedModel result;
    result.input_table = pretrained_inputs;
    result.input_table.frozen = false;
    auto& table = result.input_table;
    auto& report = result.report;

    // Resolve token rows and target rows once; drop all-OOV tuples.
    struct Resolved {
        std::vector<int> token_rows;
        int target_row;
    };
    auto resolve = [&](const std::vector<DefinitionTuple>& tuples, std::size_t& skipped) {
        std::vector<Resolved> out;
        out.reserve(tuples.size());
        for (const auto& t : tuples) {
            Resolved r;
            for (const auto& tok : t.phrase)
                if (const auto row = table.lookup(tok)) r.token_rows.push_back(*row);
            if (r.token_rows.empty()) {
                ++skipped;
                continue;
            }
            const auto target = frozen_targets.lookup(t.word);
            if (!target) throw std::runtime_error("train: word '" + t.word + "' has no target embedding");
            r.target_row = *target;
            out.push_back(std::move(r));
        }
        return out;
    };
    const auto train_set = resolve(split.train, report.skipped_train_tuples);
    const auto dev_set = resolve(split.dev, report.skipped_dev_tuples);
    if (train_set.empty()) throw std::runtime_error("train: no training tuple has in-vocabulary tokens");
    if (dev_set.empty()) throw std::runtime_error("train: no development tuple has in-vocabulary tokens");

    if (resume_from && (resume_from->config.dim != model_config.dim ||
                        resume_from->config.architecture != model_config.architecture))
        throw std::runtime_error("train: resume checkpoint does not match the model configuration");
    auto params = resume_from ? *resume_from : init_params<float>(model_config, train_config.seed);

    AdamOptimizer<float> optimizer(train_config.learning_rate, train_config.beta1, train_config.beta2,
                                   train_config.epsilon);
    auto grads = ModelParams<float>::zeros(model_config);
    Eigen::MatrixXf emb_grad = Eigen::MatrixXf::Zero(table.matrix.rows(), table.matrix.cols());

    auto forward_loss = [&](const Resolved& r, std::vector<Vec<float>>& inputs) {
        inputs.clear();
        inputs.reserve(r.token_rows.size());
        for (int row : r.token_rows) inputs.push_back(table.vector_of(row));
        return model_forward(params, inputs);
    };

    auto eval_loss = [&](const std::vector<Resolved>& set) {
        double total = 0.0;
        std::vector<Vec<float>> inputs;
        for (const auto& r : set) {
            const auto trace = forward_loss(r, inputs);
            total += static_cast<double>(
                cosine_loss<float>(trace.output, frozen_targets.vector_of(r.target_row)));
        }
        return total / static_cast<double>(set.size());
    };

    auto bind_tensors = [&]() {
        std::vector<TensorBinding<float>> bindings;
        std::vector<float*> pslots;
        visit_tensors(params, [&](const std::string&, auto& t, bool) { pslots.push_back(t.data()); });
        std::size_t i = 0;
        visit_tensors(grads, [&](const std::string& name, auto& t, bool) {
            bindings.push_back({name, pslots[i++], t.data(), t.size()});
        });
        bindings.push_back({"input_embeddings", table.matrix.data(), emb_grad.data(),
                            table.matrix.size()});
        return bindings;
    };

    auto rng = make_rng(train_config.seed);
    std::vector<std::size_t> order(train_set.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    ModelParams<float> best_params = params;
    Eigen::MatrixXf best_embeddings = table.matrix;
    std::size_t epochs_without_improvement = 0;
    report.stopping_reason = "max_epochs";

    std::vector<Vec<float>> inputs;
    for (std::size_t epoch = 1; epoch <= train_config.max_epochs; ++epoch) {
        deterministic_shuffle(order, rng);
        double epoch_loss_sum = 0.0;

        for (std::size_t start = 0; start < order.size(); start += train_config.batch_size) {
            const std::size_t end = std::min(start + train_config.batch_size, order.size());
            const float inv_batch = 1.0f / static_cast<float>(end - start);

            visit_tensors(grads, [&](const std::string&, auto& t, bool) { t.setZero(); });
            emb_grad.setZero();

            for (std::size_t bi = start; bi < end; ++bi) {
                const auto& r = train_set[order[bi]];
                const auto trace = forward_loss(r, inputs);
                const Vec<float> target = frozen_targets.vector_of(r.target_row);
                epoch_loss_sum += static_cast<double>(cosine_loss<float>(trace.output, target));
                const Vec<float> d_out = inv_batch * cosine_loss_grad<float>(trace.output, target);
                const auto g = model_backward(params, trace, d_out);

                accumulate(grads, g.params);
                for (std::size_t pos = 0; pos < r.token_rows.size(); ++pos)
                    emb_grad.row(r.token_rows[pos]) += g.inputs[pos].transpose();
            }

            if (train_config.clip_norm > 0.0) {
                double norm_sq = static_cast<double>(emb_grad.squaredNorm());
                visit_tensors(grads, [&](const std::string&, auto& t, bool) {
                    norm_sq += static_cast<double>(t.squaredNorm());
                });
                const double norm = std::sqrt(norm_sq);
                if (norm > train_config.clip_norm) {
                    const float scale = static_cast<float>(train_config.clip_norm / norm);
                    visit_tensors(grads, [&](const std::string&, auto& t, bool) { t *= scale; });
                    emb_grad *= scale;
                }
            }

            optimizer.step(bind_tensors());
        }

        const double train_loss = epoch_loss_sum / static_cast<double>(train_set.size());
        const double dev_loss = eval_loss(dev_set);
        report.epochs.push_back({epoch, train_loss, dev_loss});

        if (dev_loss < report.best_dev_loss - train_config.min_delta) {
            report.best_dev_loss = dev_loss;
            report.best_epoch = epoch;
            best_params = params;
            best_embeddings = table.matrix;
            epochs_without_improvement = 0;
        } else {
            ++epochs_without_improvement;
            if (epochs_without_improvement >= train_config.patience) {
                report.stopping_reason = "early_stop";
                break;
            }
        }
    }

    result.params = std::move(best_params);
    table.matrix = std::move(best_embeddings);

    if (checkpoint_path) save_checkpoint(*checkpoint_path, result.params, result.input_table);
    return result;
}

}  // namespace revdict
