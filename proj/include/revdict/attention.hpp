// Additive attention: score each value against the query with
// tanh(value + query) reduced to a scalar, softmax the scores, and combine
// the values by the resulting weights. Forward and exact backward.
#pragma once

#include <stdexcept>
#include <vector>

#include "revdict/embedding.hpp"

namespace revdict {

// How the d-vector tanh(u_i + q) collapses to the scalar score e_i. All
// strategies coincide at d = 1.
enum class ScoreReduce { Sum, Mean };

template <class S>
Vec<S> softmax(const Vec<S>& e) {
    if (e.size() == 0) throw std::invalid_argument("softmax: empty input");
    const S m = e.maxCoeff();
    Vec<S> w = (e.array() - m).exp();
    return w / w.sum();
}

// d_scores[i] = alpha_i * (d_weights[i] - dot(alpha, d_weights)); rows sum to
// zero along the softmax axis.
template <class S>
Vec<S> softmax_backward(const Vec<S>& weights, const Vec<S>& d_weights) {
    const S mix = weights.dot(d_weights);
    return weights.array() * (d_weights.array() - mix);
}

template <class S>
struct AttentionTrace {
    std::vector<Vec<S>> values;
    Vec<S> query;
    std::vector<Vec<S>> tanh_vq;  // tanh(value_i + query)
    Vec<S> scores;                // e
    Vec<S> weights;               // alpha, on the simplex
    Vec<S> context;               // sum_i alpha_i * value_i
    ScoreReduce reduce = ScoreReduce::Sum;
};

template <class S>
AttentionTrace<S> additive_attention(const Vec<S>& query, const std::vector<Vec<S>>& values,
                                     ScoreReduce reduce = ScoreReduce::Sum) {
    if (values.empty()) throw std::invalid_argument("additive_attention: no values");
    const Eigen::Index d = query.size();
    for (const auto& v : values)
        if (v.size() != d) throw std::invalid_argument("additive_attention: dimension mismatch");

    AttentionTrace<S> t;
    t.reduce = reduce;
    t.values = values;
    t.query = query;
    t.tanh_vq.reserve(values.size());
    t.scores.resize(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) {
        Vec<S> tv = (values[i] + query).array().tanh();
        S e = tv.sum();
        if (reduce == ScoreReduce::Mean) e /= static_cast<S>(d);
        t.scores(static_cast<Eigen::Index>(i)) = e;
        t.tanh_vq.push_back(std::move(tv));
    }
    t.weights = softmax(t.scores);
    t.context = Vec<S>::Zero(d);
    for (std::size_t i = 0; i < values.size(); ++i)
        t.context += t.weights(static_cast<Eigen::Index>(i)) * values[i];
    return t;
}

template <class S>
struct AttentionGrads {
    std::vector<Vec<S>> d_values;
    Vec<S> d_query;
    Vec<S> d_scores;  // kept for inspection; sums to zero
};

template <class S>
AttentionGrads<S> additive_attention_backward(const AttentionTrace<S>& t, const Vec<S>& d_context) {
    const Eigen::Index d = t.query.size();
    const std::size_t n = t.values.size();

    AttentionGrads<S> g;
    g.d_query = Vec<S>::Zero(d);
    g.d_values.assign(n, Vec<S>::Zero(d));

    // context = sum alpha_i * value_i
    Vec<S> d_weights(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        d_weights(static_cast<Eigen::Index>(i)) = t.values[i].dot(d_context);
        g.d_values[i] += t.weights(static_cast<Eigen::Index>(i)) * d_context;
    }

    g.d_scores = softmax_backward(t.weights, d_weights);

    // e_i = reduce(tanh(value_i + query))
    const S factor = t.reduce == ScoreReduce::Mean ? S(1) / static_cast<S>(d) : S(1);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec<S> dt = g.d_scores(static_cast<Eigen::Index>(i)) * factor *
                          (S(1) - t.tanh_vq[i].array().square()).matrix();
        g.d_values[i] += dt;
        g.d_query += dt;
    }
    return g;
}

}  // namespace revdict
