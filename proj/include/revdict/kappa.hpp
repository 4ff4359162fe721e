// Human-rating aggregation: linear-weighted Cohen's kappa between raters,
// mean pairwise agreement, validity filtering at the moderate-agreement
// threshold, and mean opinion scores.
#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace revdict {

constexpr int kScoreCategories = 5;
constexpr double kValidRaterThreshold = 0.41;  // "moderate agreement"

// kappa = 1 - (sum_ij d_ij O_ij) / (sum_ij d_ij E_ij) with linear
// disagreement weights d_ij = |i-j| / (K-1), observed joint proportions O and
// expected proportions E from the marginals. Internally accumulates integer
// counts with unnormalized weights (both normalizations cancel in the
// ratio), so kappa(a, b) == kappa(b, a) bit-for-bit. Two constant lists are
// degenerate: identical gives 1 by convention, different is undefined and
// throws.
inline double linear_weighted_kappa(const std::vector<int>& a, const std::vector<int>& b,
                                    int categories = kScoreCategories) {
    if (a.size() != b.size()) throw std::invalid_argument("kappa: score lists must have equal length");
    if (a.empty()) throw std::invalid_argument("kappa: empty score lists");
    if (categories < 2) throw std::invalid_argument("kappa: need at least two categories");
    const int K = categories;
    bool a_constant = true, b_constant = true;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < 1 || a[i] > K || b[i] < 1 || b[i] > K)
            throw std::invalid_argument("kappa: score outside 1.." + std::to_string(K) + " at index " +
                                        std::to_string(i));
        a_constant = a_constant && a[i] == a[0];
        b_constant = b_constant && b[i] == b[0];
    }
    if (a_constant && b_constant) {
        if (a[0] == b[0]) return 1.0;
        throw std::runtime_error("kappa undefined: both raters are constant with different scores");
    }

    std::vector<std::int64_t> observed(static_cast<std::size_t>(K) * K, 0);
    std::vector<std::int64_t> marg_a(K, 0), marg_b(K, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        ++observed[static_cast<std::size_t>(a[i] - 1) * K + (b[i] - 1)];
        ++marg_a[a[i] - 1];
        ++marg_b[b[i] - 1];
    }

    std::int64_t weighted_observed = 0, weighted_expected = 0;
    for (int i = 0; i < K; ++i) {
        for (int j = 0; j < K; ++j) {
            const std::int64_t d = std::abs(i - j);
            weighted_observed += d * observed[static_cast<std::size_t>(i) * K + j];
            weighted_expected += d * marg_a[i] * marg_b[j];
        }
    }
    if (weighted_expected == 0) {
        if (weighted_observed == 0) return 1.0;
        throw std::runtime_error("kappa undefined: zero expected disagreement with observed disagreement");
    }
    return 1.0 - static_cast<double>(weighted_observed) * static_cast<double>(a.size()) /
                     static_cast<double>(weighted_expected);
}

// raters x items opinion scores in 1..5; 0 marks a missing cell.
struct RatingMatrix {
    std::vector<std::string> raters;
    std::vector<std::string> items;
    std::vector<std::vector<int>> scores;  // [rater][item]

    int score(std::size_t rater, std::size_t item) const { return scores[rater][item]; }

    std::size_t rater_count() const { return raters.size(); }
    std::size_t item_count() const { return items.size(); }

    std::size_t item_index(const std::string& id) const {
        for (std::size_t i = 0; i < items.size(); ++i)
            if (items[i] == id) return i;
        throw std::out_of_range("rating matrix has no item '" + id + "'");
    }

    // CSV `rater_id,item_id,score` with a header line. Raters and items keep
    // first-appearance order.
    static RatingMatrix from_csv(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open ratings file: " + path.string());
        std::string line;
        if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty ratings file");

        RatingMatrix m;
        std::unordered_map<std::string, std::size_t> rater_idx, item_idx;
        std::vector<std::tuple<std::size_t, std::size_t, int>> cells;
        std::size_t line_no = 1;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            std::istringstream ss(line);
            std::string rater, item, score_str;
            if (!std::getline(ss, rater, ',') || !std::getline(ss, item, ',') || !std::getline(ss, score_str))
                throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                         ": expected rater_id,item_id,score");
            int score;
            try {
                score = std::stoi(score_str);
            } catch (const std::exception&) {
                throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": bad score '" +
                                         score_str + "'");
            }
            if (score < 1 || score > kScoreCategories)
                throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                         ": score must be in 1..5");
            const auto r = rater_idx.try_emplace(rater, rater_idx.size());
            if (r.second) m.raters.push_back(rater);
            const auto it = item_idx.try_emplace(item, item_idx.size());
            if (it.second) m.items.push_back(item);
            cells.emplace_back(r.first->second, it.first->second, score);
        }
        m.scores.assign(m.raters.size(), std::vector<int>(m.items.size(), 0));
        for (const auto& [r, i, s] : cells) {
            if (m.scores[r][i] != 0)
                throw std::runtime_error(path.string() + ": duplicate rating for rater '" + m.raters[r] +
                                         "', item '" + m.items[i] + "'");
            m.scores[r][i] = s;
        }
        return m;
    }
};

// Mean pairwise kappa of one rater against every other, each pair computed
// over the items both raters scored. Pairs with no shared items are excluded
// (reducing the mean's denominator); if every pair is excluded this throws.
inline double rater_agreement(std::size_t rater, const RatingMatrix& m) {
    if (rater >= m.rater_count()) throw std::out_of_range("rater_agreement: rater index out of range");
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t other = 0; other < m.rater_count(); ++other) {
        if (other == rater) continue;
        std::vector<int> a, b;
        for (std::size_t item = 0; item < m.item_count(); ++item) {
            if (m.score(rater, item) != 0 && m.score(other, item) != 0) {
                a.push_back(m.score(rater, item));
                b.push_back(m.score(other, item));
            }
        }
        if (a.empty()) continue;
        sum += linear_weighted_kappa(a, b);
        ++pairs;
    }
    if (pairs == 0)
        throw std::runtime_error("rater_agreement: rater '" + m.raters[rater] +
                                 "' shares no items with any other rater");
    return sum / static_cast<double>(pairs);
}

// Single pass: agreements are computed against the full rater set, then
// raters strictly below the threshold are dropped together.
inline RatingMatrix filter_valid_raters(const RatingMatrix& m, double threshold = kValidRaterThreshold) {
    if (m.rater_count() < 2) throw std::invalid_argument("filter_valid_raters: need at least two raters");
    RatingMatrix out;
    out.items = m.items;
    for (std::size_t r = 0; r < m.rater_count(); ++r) {
        if (rater_agreement(r, m) >= threshold) {
            out.raters.push_back(m.raters[r]);
            out.scores.push_back(m.scores[r]);
        }
    }
    if (out.raters.empty()) throw std::runtime_error("filter_valid_raters: every rater fell below threshold");
    return out;
}

// Mean score over the raters who scored the item; the matrix should already
// be filtered to valid raters.
inline double mean_opinion_score(const RatingMatrix& m, std::size_t item) {
    if (item >= m.item_count()) throw std::out_of_range("mean_opinion_score: item index out of range");
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t r = 0; r < m.rater_count(); ++r) {
        if (m.score(r, item) != 0) {
            sum += m.score(r, item);
            ++count;
        }
    }
    if (count == 0) throw std::runtime_error("mean_opinion_score: no scores for item '" + m.items[item] + "'");
    return sum / static_cast<double>(count);
}

// Mean MOS per group of items (groups: label -> item ids). Used for the
// per-position suggestion qualities q_1..q_3 and the original-word quality
// q_t.
inline std::map<std::string, double> suggestion_quality(
    const RatingMatrix& m, const std::map<std::string, std::vector<std::string>>& groups) {
    std::map<std::string, double> out;
    for (const auto& [label, item_ids] : groups) {
        if (item_ids.empty()) throw std::invalid_argument("suggestion_quality: empty group '" + label + "'");
        double sum = 0.0;
        for (const auto& id : item_ids) sum += mean_opinion_score(m, m.item_index(id));
        out[label] = sum / static_cast<double>(item_ids.size());
    }
    return out;
}

}  // namespace revdict
