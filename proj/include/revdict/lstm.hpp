// A from-scratch LSTM: sigmoid input/forget/output gates, tanh cell update
// and cell output, zero initial state, hidden size equal to the input
// dimension. The trace captures every intermediate needed for exact
// backpropagation through time.
#pragma once

#include <stdexcept>
#include <vector>

#include "revdict/embedding.hpp"

namespace revdict {

template <class S>
struct LstmWeights {
    // Gate order everywhere: input, forget, cell candidate, output.
    Mat<S> wx_i, wx_f, wx_g, wx_o;  // input projections, d x d
    Mat<S> wh_i, wh_f, wh_g, wh_o;  // recurrent projections, d x d
    Vec<S> b_i, b_f, b_g, b_o;      // biases, d

    static LstmWeights zeros(Eigen::Index d) {
        LstmWeights w;
        for (Mat<S>* m : {&w.wx_i, &w.wx_f, &w.wx_g, &w.wx_o, &w.wh_i, &w.wh_f, &w.wh_g, &w.wh_o})
            *m = Mat<S>::Zero(d, d);
        for (Vec<S>* v : {&w.b_i, &w.b_f, &w.b_g, &w.b_o}) *v = Vec<S>::Zero(d);
        return w;
    }

    Eigen::Index dim() const { return b_i.size(); }
};

template <class S>
Vec<S> sigmoid(const Vec<S>& x) {
    return (S(1) / (S(1) + (-x.array()).exp())).matrix();
}

template <class S>
struct LstmTrace {
    std::vector<Vec<S>> x;       // inputs
    std::vector<Vec<S>> gi, gf, gg, go;  // gate activations
    std::vector<Vec<S>> c, tanh_c, h;

    std::size_t steps() const { return h.size(); }
};

template <class S>
LstmTrace<S> lstm_forward(const LstmWeights<S>& w, const std::vector<Vec<S>>& inputs) {
    if (inputs.empty()) throw std::invalid_argument("lstm_forward: empty input sequence");
    const Eigen::Index d = w.dim();
    for (const auto& v : inputs)
        if (v.size() != d) throw std::invalid_argument("lstm_forward: input dimension mismatch");

    LstmTrace<S> t;
    t.x = inputs;
    Vec<S> h_prev = Vec<S>::Zero(d);
    Vec<S> c_prev = Vec<S>::Zero(d);
    for (const auto& x : inputs) {
        Vec<S> gi = sigmoid<S>(w.wx_i * x + w.wh_i * h_prev + w.b_i);
        Vec<S> gf = sigmoid<S>(w.wx_f * x + w.wh_f * h_prev + w.b_f);
        Vec<S> gg = (w.wx_g * x + w.wh_g * h_prev + w.b_g).array().tanh();
        Vec<S> go = sigmoid<S>(w.wx_o * x + w.wh_o * h_prev + w.b_o);
        Vec<S> c = gf.cwiseProduct(c_prev) + gi.cwiseProduct(gg);
        Vec<S> tc = c.array().tanh();
        Vec<S> h = go.cwiseProduct(tc);
        c_prev = c;
        h_prev = h;
        t.gi.push_back(std::move(gi));
        t.gf.push_back(std::move(gf));
        t.gg.push_back(std::move(gg));
        t.go.push_back(std::move(go));
        t.c.push_back(std::move(c));
        t.tanh_c.push_back(std::move(tc));
        t.h.push_back(std::move(h));
    }
    return t;
}

template <class S>
struct LstmGrads {
    LstmWeights<S> w;
    std::vector<Vec<S>> d_inputs;
};

// Backpropagation through time given the loss gradient flowing into each
// hidden state.
template <class S>
LstmGrads<S> lstm_backward(const LstmWeights<S>& w, const LstmTrace<S>& t,
                           const std::vector<Vec<S>>& d_h) {
    const std::size_t k = t.steps();
    if (d_h.size() != k) throw std::invalid_argument("lstm_backward: gradient count mismatch");
    const Eigen::Index d = w.dim();

    LstmGrads<S> g;
    g.w = LstmWeights<S>::zeros(d);
    g.d_inputs.assign(k, Vec<S>::Zero(d));

    Vec<S> dh_carry = Vec<S>::Zero(d);
    Vec<S> dc_carry = Vec<S>::Zero(d);
    for (std::size_t step = k; step-- > 0;) {
        const Vec<S> dh = d_h[step] + dh_carry;
        const Vec<S>& tc = t.tanh_c[step];
        const Vec<S> dgo = dh.cwiseProduct(tc);
        const Vec<S> dc =
            dc_carry + dh.cwiseProduct(t.go[step]).cwiseProduct((S(1) - tc.array().square()).matrix());

        const Vec<S> dgi = dc.cwiseProduct(t.gg[step]);
        const Vec<S> dgg = dc.cwiseProduct(t.gi[step]);
        const Vec<S> c_prev = step == 0 ? Vec<S>(Vec<S>::Zero(d)) : t.c[step - 1];
        const Vec<S> dgf = dc.cwiseProduct(c_prev);
        dc_carry = dc.cwiseProduct(t.gf[step]);

        // Pre-activation gradients.
        const Vec<S> dai = dgi.cwiseProduct(t.gi[step]).cwiseProduct((S(1) - t.gi[step].array()).matrix());
        const Vec<S> daf = dgf.cwiseProduct(t.gf[step]).cwiseProduct((S(1) - t.gf[step].array()).matrix());
        const Vec<S> dag = dgg.cwiseProduct((S(1) - t.gg[step].array().square()).matrix());
        const Vec<S> dao = dgo.cwiseProduct(t.go[step]).cwiseProduct((S(1) - t.go[step].array()).matrix());

        const Vec<S>& x = t.x[step];
        const Vec<S> h_prev = step == 0 ? Vec<S>(Vec<S>::Zero(d)) : t.h[step - 1];

        g.w.wx_i += dai * x.transpose();
        g.w.wx_f += daf * x.transpose();
        g.w.wx_g += dag * x.transpose();
        g.w.wx_o += dao * x.transpose();
        g.w.wh_i += dai * h_prev.transpose();
        g.w.wh_f += daf * h_prev.transpose();
        g.w.wh_g += dag * h_prev.transpose();
        g.w.wh_o += dao * h_prev.transpose();
        g.w.b_i += dai;
        g.w.b_f += daf;
        g.w.b_g += dag;
        g.w.b_o += dao;

        g.d_inputs[step] = w.wx_i.transpose() * dai + w.wx_f.transpose() * daf +
                           w.wx_g.transpose() * dag + w.wx_o.transpose() * dao;
        dh_carry = w.wh_i.transpose() * dai + w.wh_f.transpose() * daf + w.wh_g.transpose() * dag +
                   w.wh_o.transpose() * dao;
    }
    return g;
}

}  // namespace revdict
