// Ranking quality metrics: accuracy@k and synonym-accuracy@k over output
// rankings, plus the evaluation report structure.
#pragma once

#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "revdict/dataset.hpp"
#include "revdict/embedding.hpp"

namespace revdict {

// Fraction of items whose original word appears among the first k
// suggestions. An original word outside the candidate vocabulary is a
// configuration error, not a miss.
inline double accuracy_at_k(const std::vector<Ranking>& rankings, const std::vector<std::string>& originals,
                            std::size_t k, const std::unordered_set<std::string>& candidate_vocab) {
    if (rankings.size() != originals.size())
        throw std::invalid_argument("accuracy_at_k: rankings and originals are misaligned");
    if (rankings.empty()) throw std::invalid_argument("accuracy_at_k: empty input");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < rankings.size(); ++i) {
        if (!candidate_vocab.count(originals[i]))
            throw std::runtime_error("accuracy_at_k: original word '" + originals[i] +
                                     "' is not in the candidate vocabulary");
        const auto& suggestions = rankings[i].suggestions;
        const std::size_t limit = std::min(k, suggestions.size());
        for (std::size_t j = 0; j < limit; ++j) {
            if (suggestions[j].first == originals[i]) {
                ++hits;
                break;
            }
        }
    }
    return static_cast<double>(hits) / static_cast<double>(rankings.size());
}

// Counts a hit when the original word or any of its synonyms appears among
// the first k suggestions; with an empty synonym set this reduces to
// accuracy_at_k.
inline double synonym_accuracy_at_k(const std::vector<Ranking>& rankings,
                                    const std::vector<std::string>& originals, const SynonymSet& synonyms,
                                    std::size_t k, const std::unordered_set<std::string>& candidate_vocab) {
    if (rankings.size() != originals.size())
        throw std::invalid_argument("synonym_accuracy_at_k: rankings and originals are misaligned");
    if (rankings.empty()) throw std::invalid_argument("synonym_accuracy_at_k: empty input");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < rankings.size(); ++i) {
        if (!candidate_vocab.count(originals[i]))
            throw std::runtime_error("synonym_accuracy_at_k: original word '" + originals[i] +
                                     "' is not in the candidate vocabulary");
        const auto& suggestions = rankings[i].suggestions;
        const std::size_t limit = std::min(k, suggestions.size());
        for (std::size_t j = 0; j < limit; ++j) {
            const auto& word = suggestions[j].first;
            if (word == originals[i] || synonyms.is_synonym(originals[i], word)) {
                ++hits;
                break;
            }
        }
    }
    return static_cast<double>(hits) / static_cast<double>(rankings.size());
}

struct MetricReport {
    double acc10 = 0, acc100 = 0, syn_acc10 = 0, syn_acc100 = 0, cosine_loss = 0;
    std::size_t sample_size = 0;
    std::string split;  // "seen" (training sample) or "unseen" (testing sample)
    std::size_t n = 0;  // output vocabulary size

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["acc@10"] = acc10;
        j["acc@100"] = acc100;
        j["syn-acc@10"] = syn_acc10;
        j["syn-acc@100"] = syn_acc100;
        j["cosine loss"] = cosine_loss;
        j["sample_size"] = sample_size;
        j["split"] = split;
        j["n"] = n;
        return j;
    }
};

// Aligned text table, one metric per row and one column per report.
inline std::string render_metric_table(const std::vector<MetricReport>& reports) {
    if (reports.empty()) return "";
    std::ostringstream out;
    out << std::fixed << std::setprecision(2);
    out << std::left << std::setw(14) << "";
    for (const auto& r : reports) out << std::right << std::setw(10) << r.split;
    out << '\n';
    auto row = [&](const char* label, auto getter) {
        out << std::left << std::setw(14) << label;
        for (const auto& r : reports) out << std::right << std::setw(10) << getter(r);
        out << '\n';
    };
    row("acc@10", [](const MetricReport& r) { return r.acc10; });
    row("acc@100", [](const MetricReport& r) { return r.acc100; });
    row("syn-acc@10", [](const MetricReport& r) { return r.syn_acc10; });
    row("syn-acc@100", [](const MetricReport& r) { return r.syn_acc100; });
    row("cosine loss", [](const MetricReport& r) { return r.cosine_loss; });
    return out.str();
}

}  // namespace revdict
