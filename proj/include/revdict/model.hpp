// The four phrase encoders. Each maps a sequence of d-dimensional word
// vectors to an output vector v_o in R^d:
//
//   BOW        v_o = W (sum_i v_i)
//   RNN        v_o = tanh(W h_k + b) over the final LSTM hidden state
//   LSTM+att   p_t = W h_t + b;  q = W' h_k + b';  a = attention(q, p_1..p_k);
//              v_o = tanh(W'' a + b'')
//   BiLSTM+att the same head over c_t = concat(h_t, h'_t) with W, W' in
//              R^{d x 2d}
//
// Forward passes record a full trace; backward produces exact analytic
// gradients for every parameter and every input vector.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "revdict/attention.hpp"
#include "revdict/lstm.hpp"

namespace revdict {

enum class Architecture { Bow, Rnn, LstmAtt, BilstmAtt };

inline const char* to_string(Architecture a) {
    switch (a) {
        case Architecture::Bow: return "bow";
        case Architecture::Rnn: return "rnn";
        case Architecture::LstmAtt: return "lstm-att";
        case Architecture::BilstmAtt: return "bilstm-att";
    }
    return "bow";
}

inline Architecture parse_architecture(const std::string& s) {
    if (s == "bow") return Architecture::Bow;
    if (s == "rnn") return Architecture::Rnn;
    if (s == "lstm-att") return Architecture::LstmAtt;
    if (s == "bilstm-att") return Architecture::BilstmAtt;
    throw std::invalid_argument("unknown architecture: " + s +
                                " (expected bow|rnn|lstm-att|bilstm-att)");
}

struct ModelConfig {
    Architecture architecture = Architecture::LstmAtt;
    int dim = 300;
    std::size_t input_vocab_size = 100000;  // recognized phrase tokens
    std::size_t output_word_count = 3000;   // recognized output words (n)
    ScoreReduce score_reduce = ScoreReduce::Sum;

    bool uses_lstm() const { return architecture != Architecture::Bow; }
    bool uses_attention() const {
        return architecture == Architecture::LstmAtt || architecture == Architecture::BilstmAtt;
    }
    bool bidirectional() const { return architecture == Architecture::BilstmAtt; }
};

template <class S>
struct AttentionHeadWeights {
    Mat<S> proj_w;   // W:   d x d (or d x 2d)
    Vec<S> proj_b;   // b
    Mat<S> query_w;  // W':  d x d (or d x 2d)
    Vec<S> query_b;  // b'
    Mat<S> out_w;    // W'': d x d
    Vec<S> out_b;    // b''
};

template <class S>
struct ModelParams {
    ModelConfig config;
    LstmWeights<S> lstm;               // forward direction (rnn, lstm-att, bilstm-att)
    LstmWeights<S> lstm_rev;           // backward direction (bilstm-att)
    AttentionHeadWeights<S> head;      // lstm-att, bilstm-att
    Mat<S> bow_w;                      // bow
    Mat<S> rnn_w;                      // rnn output head
    Vec<S> rnn_b;

    static ModelParams zeros(const ModelConfig& config) {
        ModelParams p;
        p.config = config;
        const Eigen::Index d = config.dim;
        const Eigen::Index cdim = config.bidirectional() ? 2 * d : d;
        switch (config.architecture) {
            case Architecture::Bow:
                p.bow_w = Mat<S>::Zero(d, d);
                break;
            case Architecture::Rnn:
                p.lstm = LstmWeights<S>::zeros(d);
                p.rnn_w = Mat<S>::Zero(d, d);
                p.rnn_b = Vec<S>::Zero(d);
                break;
            case Architecture::BilstmAtt:
                p.lstm_rev = LstmWeights<S>::zeros(d);
                [[fallthrough]];
            case Architecture::LstmAtt:
                p.lstm = LstmWeights<S>::zeros(d);
                p.head.proj_w = Mat<S>::Zero(d, cdim);
                p.head.proj_b = Vec<S>::Zero(d);
                p.head.query_w = Mat<S>::Zero(d, cdim);
                p.head.query_b = Vec<S>::Zero(d);
                p.head.out_w = Mat<S>::Zero(d, d);
                p.head.out_b = Vec<S>::Zero(d);
                break;
        }
        return p;
    }
};

// Visits every trainable tensor of the active architecture in a fixed,
// documented order: f(name, tensor, is_bias) where tensor is a (possibly
// const) Mat<S>& or Vec<S>&. Checkpoints, the optimizer and the gradient
// checker all rely on this order being stable.
template <class Params, class F>
void visit_tensors(Params& p, F&& f) {
    auto lstm = [&](const std::string& prefix, auto& w) {
        f(prefix + ".wx_i", w.wx_i, false);
        f(prefix + ".wx_f", w.wx_f, false);
        f(prefix + ".wx_g", w.wx_g, false);
        f(prefix + ".wx_o", w.wx_o, false);
        f(prefix + ".wh_i", w.wh_i, false);
        f(prefix + ".wh_f", w.wh_f, false);
        f(prefix + ".wh_g", w.wh_g, false);
        f(prefix + ".wh_o", w.wh_o, false);
        f(prefix + ".b_i", w.b_i, true);
        f(prefix + ".b_f", w.b_f, true);
        f(prefix + ".b_g", w.b_g, true);
        f(prefix + ".b_o", w.b_o, true);
    };

    switch (p.config.architecture) {
        case Architecture::Bow:
            f(std::string("bow.w"), p.bow_w, false);
            break;
        case Architecture::Rnn:
            lstm("lstm", p.lstm);
            f(std::string("rnn.out_w"), p.rnn_w, false);
            f(std::string("rnn.out_b"), p.rnn_b, true);
            break;
        case Architecture::BilstmAtt:
        case Architecture::LstmAtt:
            lstm("lstm", p.lstm);
            if (p.config.bidirectional()) lstm("lstm_rev", p.lstm_rev);
            f(std::string("attn.proj_w"), p.head.proj_w, false);
            f(std::string("attn.proj_b"), p.head.proj_b, true);
            f(std::string("attn.query_w"), p.head.query_w, false);
            f(std::string("attn.query_b"), p.head.query_b, true);
            f(std::string("attn.out_w"), p.head.out_w, false);
            f(std::string("attn.out_b"), p.head.out_b, true);
            break;
    }
}

// dst += src over every active tensor; both sides must share a config.
template <class S>
void accumulate(ModelParams<S>& dst, const ModelParams<S>& src) {
    if (dst.config.architecture != src.config.architecture || dst.config.dim != src.config.dim)
        throw std::invalid_argument("accumulate: parameter configs differ");
    std::vector<S*> slots;
    std::vector<Eigen::Index> sizes;
    visit_tensors(dst, [&](const std::string&, auto& t, bool) {
        slots.push_back(t.data());
        sizes.push_back(t.size());
    });
    std::size_t i = 0;
    visit_tensors(src, [&](const std::string&, const auto& t, bool) {
        Eigen::Map<Vec<S>>(slots[i], sizes[i]) += Eigen::Map<const Vec<S>>(t.data(), t.size());
        ++i;
    });
}

template <class S>
struct ForwardTrace {
    Architecture architecture = Architecture::Bow;
    int dim = 0;
    std::vector<Vec<S>> inputs;

    LstmTrace<S> lstm;      // forward direction
    LstmTrace<S> lstm_rev;  // backward direction, in its own processing order
    std::vector<Vec<S>> concat;  // c_t (bilstm); position order

    std::vector<Vec<S>> proj;  // p_t
    Vec<S> query;              // p'_k
    AttentionTrace<S> attn;

    Vec<S> input_sum;  // bow
    Vec<S> output;     // v_o
};

template <class S>
ForwardTrace<S> model_forward(const ModelParams<S>& p, const std::vector<Vec<S>>& inputs) {
    if (inputs.empty()) throw std::invalid_argument("model_forward: empty input sequence");
    const Eigen::Index d = p.config.dim;
    for (const auto& v : inputs)
        if (v.size() != d) throw std::invalid_argument("model_forward: input dimension mismatch");

    ForwardTrace<S> t;
    t.architecture = p.config.architecture;
    t.dim = p.config.dim;
    t.inputs = inputs;
    const std::size_t k = inputs.size();

    switch (p.config.architecture) {
        case Architecture::Bow: {
            t.input_sum = Vec<S>::Zero(d);
            for (const auto& v : inputs) t.input_sum += v;
            t.output = p.bow_w * t.input_sum;
            return t;
        }
        case Architecture::Rnn: {
            t.lstm = lstm_forward(p.lstm, inputs);
            t.output = (p.rnn_w * t.lstm.h.back() + p.rnn_b).array().tanh();
            return t;
        }
        case Architecture::LstmAtt:
        case Architecture::BilstmAtt: {
            t.lstm = lstm_forward(p.lstm, inputs);
            std::vector<Vec<S>> states;  // h_t, or concat(h_t, h'_t)
            states.reserve(k);
            if (p.config.bidirectional()) {
                std::vector<Vec<S>> reversed(inputs.rbegin(), inputs.rend());
                t.lstm_rev = lstm_forward(p.lstm_rev, reversed);
                for (std::size_t i = 0; i < k; ++i) {
                    Vec<S> c(2 * d);
                    c.head(d) = t.lstm.h[i];
                    c.tail(d) = t.lstm_rev.h[k - 1 - i];
                    states.push_back(std::move(c));
                }
                t.concat = states;
            } else {
                states = t.lstm.h;
            }
            t.proj.reserve(k);
            for (const auto& s : states) t.proj.push_back(p.head.proj_w * s + p.head.proj_b);
            t.query = p.head.query_w * states.back() + p.head.query_b;
            t.attn = additive_attention(t.query, t.proj, p.config.score_reduce);
            t.output = (p.head.out_w * t.attn.context + p.head.out_b).array().tanh();
            return t;
        }
    }
    throw std::logic_error("model_forward: unreachable");
}

template <class S>
struct ModelGrads {
    ModelParams<S> params;
    std::vector<Vec<S>> inputs;
};

template <class S>
ModelGrads<S> model_backward(const ModelParams<S>& p, const ForwardTrace<S>& t, const Vec<S>& d_output) {
    if (t.architecture != p.config.architecture || t.dim != p.config.dim)
        throw std::invalid_argument("model_backward: trace does not match parameters");
    if (d_output.size() != p.config.dim)
        throw std::invalid_argument("model_backward: upstream gradient dimension mismatch");

    const Eigen::Index d = p.config.dim;
    const std::size_t k = t.inputs.size();
    ModelGrads<S> g;
    g.params = ModelParams<S>::zeros(p.config);
    g.inputs.assign(k, Vec<S>::Zero(d));

    switch (p.config.architecture) {
        case Architecture::Bow: {
            g.params.bow_w = d_output * t.input_sum.transpose();
            const Vec<S> d_sum = p.bow_w.transpose() * d_output;
            for (std::size_t i = 0; i < k; ++i) g.inputs[i] = d_sum;
            return g;
        }
        case Architecture::Rnn: {
            const Vec<S> dz =
                d_output.cwiseProduct((S(1) - t.output.array().square()).matrix());
            g.params.rnn_w = dz * t.lstm.h.back().transpose();
            g.params.rnn_b = dz;
            std::vector<Vec<S>> d_h(k, Vec<S>::Zero(d));
            d_h.back() = p.rnn_w.transpose() * dz;
            auto lg = lstm_backward(p.lstm, t.lstm, d_h);
            g.params.lstm = std::move(lg.w);
            g.inputs = std::move(lg.d_inputs);
            return g;
        }
        case Architecture::LstmAtt:
        case Architecture::BilstmAtt: {
            const bool bidi = p.config.bidirectional();
            const Eigen::Index cdim = bidi ? 2 * d : d;
            const auto& states = bidi ? t.concat : t.lstm.h;

            // v_o = tanh(W'' a + b'')
            const Vec<S> dz =
                d_output.cwiseProduct((S(1) - t.output.array().square()).matrix());
            g.params.head.out_w = dz * t.attn.context.transpose();
            g.params.head.out_b = dz;
            const Vec<S> d_context = p.head.out_w.transpose() * dz;

            const auto ag = additive_attention_backward(t.attn, d_context);

            std::vector<Vec<S>> d_states(k, Vec<S>::Zero(cdim));
            // q = W' s_k + b'
            g.params.head.query_w = ag.d_query * states.back().transpose();
            g.params.head.query_b = ag.d_query;
            d_states[k - 1] += p.head.query_w.transpose() * ag.d_query;
            // p_t = W s_t + b
            for (std::size_t i = 0; i < k; ++i) {
                g.params.head.proj_w += ag.d_values[i] * states[i].transpose();
                g.params.head.proj_b += ag.d_values[i];
                d_states[i] += p.head.proj_w.transpose() * ag.d_values[i];
            }

            if (!bidi) {
                auto lg = lstm_backward(p.lstm, t.lstm, d_states);
                g.params.lstm = std::move(lg.w);
                g.inputs = std::move(lg.d_inputs);
                return g;
            }

            std::vector<Vec<S>> d_h_fwd(k), d_h_rev(k);
            for (std::size_t i = 0; i < k; ++i) {
                d_h_fwd[i] = d_states[i].head(d);
                // Position i is step k-1-i of the reversed pass.
                d_h_rev[k - 1 - i] = d_states[i].tail(d);
            }
            auto lf = lstm_backward(p.lstm, t.lstm, d_h_fwd);
            auto lr = lstm_backward(p.lstm_rev, t.lstm_rev, d_h_rev);
            g.params.lstm = std::move(lf.w);
            g.params.lstm_rev = std::move(lr.w);
            for (std::size_t i = 0; i < k; ++i)
                g.inputs[i] = lf.d_inputs[i] + lr.d_inputs[k - 1 - i];
            return g;
        }
    }
    throw std::logic_error("model_backward: unreachable");
}

}  // namespace revdict
