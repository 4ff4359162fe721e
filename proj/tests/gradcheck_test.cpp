// Central-difference verification of every analytic gradient: all four
// architectures, every parameter tensor and every input vector, in double
// precision.
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "model_testutil.hpp"
#include "revdict/model.hpp"
#include "revdict/train.hpp"

using namespace revdict;

namespace {

constexpr double kStep = 1e-5;
constexpr double kTolerance = 1e-4;

double rel_err(double analytic, double numeric) {
    return std::abs(analytic - numeric) / std::max({1.0, std::abs(analytic), std::abs(numeric)});
}

struct CheckResult {
    double max_rel_err = 0.0;
    std::string worst;
};

// F(theta) = g . v_o; perturbs every scalar in turn.
CheckResult check_gradients(Architecture arch, std::uint64_t seed) {
    std::mt19937 rng(static_cast<unsigned>(seed));
    const int d = 1 + static_cast<int>(rng() % 4);
    const int k = 1 + static_cast<int>(rng() % 3);

    ModelConfig cfg;
    cfg.architecture = arch;
    cfg.dim = d;
    auto params = ModelParams<double>::zeros(cfg);
    testutil::fill_random(params, rng, 0.6);
    auto inputs = testutil::random_inputs<double>(rng, d, k, 0.9);
    const auto upstream = testutil::random_inputs<double>(rng, d, 1, 1.0)[0];

    const auto analytic = model_backward(params, model_forward(params, inputs), upstream);

    const auto objective = [&]() { return upstream.dot(model_forward(params, inputs).output); };

    CheckResult result;
    auto record = [&](const std::string& name, double a, double n) {
        const double e = rel_err(a, n);
        if (e > result.max_rel_err) {
            result.max_rel_err = e;
            result.worst = name;
        }
    };

    std::vector<std::pair<std::string, double*>> param_slots;
    std::vector<Eigen::Index> sizes;
    visit_tensors(params, [&](const std::string& name, auto& t, bool) {
        param_slots.emplace_back(name, t.data());
        sizes.push_back(t.size());
    });
    std::vector<const double*> grad_slots;
    visit_tensors(analytic.params, [&](const std::string&, const auto& t, bool) {
        grad_slots.push_back(t.data());
    });

    for (std::size_t ti = 0; ti < param_slots.size(); ++ti) {
        for (Eigen::Index i = 0; i < sizes[ti]; ++i) {
            double& x = param_slots[ti].second[i];
            const double saved = x;
            x = saved + kStep;
            const double fp = objective();
            x = saved - kStep;
            const double fm = objective();
            x = saved;
            record(param_slots[ti].first, grad_slots[ti][i], (fp - fm) / (2.0 * kStep));
        }
    }

    for (int pos = 0; pos < k; ++pos) {
        for (int i = 0; i < d; ++i) {
            double& x = inputs[static_cast<std::size_t>(pos)](i);
            const double saved = x;
            x = saved + kStep;
            const double fp = objective();
            x = saved - kStep;
            const double fm = objective();
            x = saved;
            record("input[" + std::to_string(pos) + "]", analytic.inputs[static_cast<std::size_t>(pos)](i),
                   (fp - fm) / (2.0 * kStep));
        }
    }
    return result;
}

}  // namespace

TEST(GradCheck, AllArchitecturesMatchCentralDifferences) {
    for (auto arch :
         {Architecture::Bow, Architecture::Rnn, Architecture::LstmAtt, Architecture::BilstmAtt}) {
        for (std::uint64_t seed = 1; seed <= 25; ++seed) {
            const auto r = check_gradients(arch, seed);
            EXPECT_LT(r.max_rel_err, kTolerance)
                << to_string(arch) << " seed " << seed << " worst tensor " << r.worst;
        }
    }
}

TEST(GradCheck, MeanScoreReduceAlsoMatches) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        std::mt19937 rng(static_cast<unsigned>(seed));
        ModelConfig cfg;
        cfg.architecture = Architecture::LstmAtt;
        cfg.dim = 3;
        cfg.score_reduce = ScoreReduce::Mean;
        auto params = ModelParams<double>::zeros(cfg);
        testutil::fill_random(params, rng, 0.6);
        auto inputs = testutil::random_inputs<double>(rng, 3, 2, 0.9);
        const auto upstream = testutil::random_inputs<double>(rng, 3, 1)[0];
        const auto analytic = model_backward(params, model_forward(params, inputs), upstream);

        double max_err = 0.0;
        for (int pos = 0; pos < 2; ++pos) {
            for (int i = 0; i < 3; ++i) {
                double& x = inputs[static_cast<std::size_t>(pos)](i);
                const double saved = x;
                x = saved + kStep;
                const double fp = upstream.dot(model_forward(params, inputs).output);
                x = saved - kStep;
                const double fm = upstream.dot(model_forward(params, inputs).output);
                x = saved;
                max_err = std::max(max_err, rel_err(analytic.inputs[static_cast<std::size_t>(pos)](i),
                                                    (fp - fm) / (2.0 * kStep)));
            }
        }
        EXPECT_LT(max_err, kTolerance);
    }
}

TEST(GradCheck, ZeroUpstreamGradientGivesAllZeroGradients) {
    std::mt19937 rng(99);
    for (auto arch :
         {Architecture::Bow, Architecture::Rnn, Architecture::LstmAtt, Architecture::BilstmAtt}) {
        ModelConfig cfg;
        cfg.architecture = arch;
        cfg.dim = 3;
        auto params = ModelParams<double>::zeros(cfg);
        testutil::fill_random(params, rng, 0.8);
        const auto inputs = testutil::random_inputs<double>(rng, 3, 3);
        const auto g = model_backward(params, model_forward(params, inputs), Vec<double>(Vec<double>::Zero(3)));
        visit_tensors(g.params, [&](const std::string& name, const auto& t, bool) {
            EXPECT_DOUBLE_EQ(t.norm(), 0.0) << name;
        });
        for (const auto& di : g.inputs) EXPECT_DOUBLE_EQ(di.norm(), 0.0);
    }
}

TEST(GradCheck, AttentionScoreGradientsSumToZero) {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        const int d = 1 + trial % 4;
        const int n = 2 + trial % 4;
        const auto values = testutil::random_inputs<double>(rng, d, n, 1.5);
        const auto query = testutil::random_inputs<double>(rng, d, 1, 1.5)[0];
        const auto d_context = testutil::random_inputs<double>(rng, d, 1, 1.0)[0];
        const auto t = additive_attention(query, values);
        const auto g = additive_attention_backward(t, d_context);
        EXPECT_NEAR(g.d_scores.sum(), 0.0, 1e-12);
    }
}

TEST(GradCheck, TraceParamsMismatchThrows) {
    std::mt19937 rng(3);
    ModelConfig a;
    a.architecture = Architecture::LstmAtt;
    a.dim = 2;
    auto pa = ModelParams<double>::zeros(a);
    testutil::fill_random(pa, rng, 0.5);
    const auto trace = model_forward(pa, testutil::random_inputs<double>(rng, 2, 2));

    ModelConfig b = a;
    b.architecture = Architecture::Rnn;
    auto pb = ModelParams<double>::zeros(b);
    EXPECT_THROW(model_backward(pb, trace, Vec<double>(Vec<double>::Zero(2))), std::invalid_argument);

    ModelConfig c = a;
    c.dim = 3;
    auto pc = ModelParams<double>::zeros(c);
    EXPECT_THROW(model_backward(pc, trace, Vec<double>(Vec<double>::Zero(3))), std::invalid_argument);
}

TEST(GradCheck, CosineLossGradientMatchesCentralDifferences) {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const int d = 2 + trial % 4;
        Vec<double> o(d), w(d);
        do {
            for (int i = 0; i < d; ++i) o(i) = dist(rng);
        } while (o.norm() < 0.1);
        do {
            for (int i = 0; i < d; ++i) w(i) = dist(rng);
        } while (w.norm() < 0.1);

        const auto analytic = cosine_loss_grad<double>(o, w);
        for (int i = 0; i < d; ++i) {
            const double saved = o(i);
            o(i) = saved + kStep;
            const double fp = cosine_loss<double>(o, w);
            o(i) = saved - kStep;
            const double fm = cosine_loss<double>(o, w);
            o(i) = saved;
            EXPECT_LT(rel_err(analytic(i), (fp - fm) / (2.0 * kStep)), kTolerance);
        }
    }
}
