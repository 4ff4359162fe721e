// Adam with standard bias correction. The optimizer owns the first/second
// moment state; callers bind the same tensors in the same order every step.
#pragma once

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace revdict {

template <class S>
struct TensorBinding {
    std::string name;
    S* param;
    const S* grad;
    Eigen::Index size;
};

template <class S>
class AdamOptimizer {
public:
    AdamOptimizer(double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8)
        : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {
        if (learning_rate <= 0) throw std::invalid_argument("adam: learning rate must be positive");
    }

    long step_count() const { return t_; }

    // One update over all bound tensors; the step counter increments once per
    // call. Zero gradients leave parameters exactly unchanged.
    void step(const std::vector<TensorBinding<S>>& tensors) {
        if (t_ == 0) {
            m_.reserve(tensors.size());
            v_.reserve(tensors.size());
            for (const auto& b : tensors) {
                m_.push_back(Eigen::Matrix<S, Eigen::Dynamic, 1>::Zero(b.size));
                v_.push_back(Eigen::Matrix<S, Eigen::Dynamic, 1>::Zero(b.size));
            }
        } else if (tensors.size() != m_.size()) {
            throw std::invalid_argument("adam: tensor count changed between steps");
        }

        ++t_;
        const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));

        for (std::size_t i = 0; i < tensors.size(); ++i) {
            const auto& b = tensors[i];
            if (m_[i].size() != b.size) throw std::invalid_argument("adam: tensor '" + b.name + "' changed size");
            Eigen::Map<const Eigen::Matrix<S, Eigen::Dynamic, 1>> g(b.grad, b.size);
            if (!g.allFinite())
                throw std::runtime_error("adam: non-finite gradient for tensor '" + b.name + "'");
            Eigen::Map<Eigen::Matrix<S, Eigen::Dynamic, 1>> p(b.param, b.size);

            m_[i] = S(beta1_) * m_[i] + S(1.0 - beta1_) * g;
            v_[i] = S(beta2_) * v_[i] + S(1.0 - beta2_) * g.cwiseProduct(g);
            p.array() -= S(lr_) * (m_[i].array() / S(bc1)) /
                         ((v_[i].array() / S(bc2)).sqrt() + S(eps_));
        }
    }

private:
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
    std::vector<Eigen::Matrix<S, Eigen::Dynamic, 1>> m_, v_;
};

}  // namespace revdict
