#pragma once

// Feature selection: one-way ANOVA ranking and recursive feature elimination.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "mlc/error.hpp"
#include "mlc/tree.hpp"

namespace mlc {

struct FeatureRanking {
    std::vector<double> scores;      // F statistic per feature; +inf for perfect separation
    std::vector<std::size_t> order;  // feature indices, best first
};

/// One-way ANOVA F = (SSB / (k-1)) / (SSW / (N-k)) per feature.
///
/// Classes of the class set that have no samples do not take part.
/// Zero within-class spread scores +inf when the class means differ, 0 when they don't.
inline FeatureRanking anova_rank(const LabeledFeatureSet& data) {
    data.validate();
    const auto y = data.label_indices();
    const std::size_t k_all = data.class_set.size();
    std::vector<std::size_t> n_c(k_all, 0);
    for (auto c : y) ++n_c[c];
    std::size_t k = 0;
    for (std::size_t c = 0; c < k_all; ++c) {
        if (n_c[c] == 0) continue;
        if (n_c[c] < 2)
            throw ValidationError("class '" + data.class_set[c] + "' has fewer than 2 samples");
        ++k;
    }
    if (k < 2) throw DatasetError("ANOVA ranking needs at least 2 classes");
    const double n = static_cast<double>(data.size());

    FeatureRanking r;
    r.scores.resize(data.feature_specs.size());
    std::vector<double> sum_c(k_all);
    for (std::size_t f = 0; f < data.feature_specs.size(); ++f) {
        std::fill(sum_c.begin(), sum_c.end(), 0.0);
        double total = 0.0;
        for (std::size_t s = 0; s < data.size(); ++s) {
            sum_c[y[s]] += data.vectors[s].values[f];
            total += data.vectors[s].values[f];
        }
        const double grand = total / n;
        double ssb = 0.0;
        for (std::size_t c = 0; c < k_all; ++c) {
            if (n_c[c] == 0) continue;
            const double d = sum_c[c] / static_cast<double>(n_c[c]) - grand;
            ssb += static_cast<double>(n_c[c]) * d * d;
        }
        double ssw = 0.0;
        for (std::size_t s = 0; s < data.size(); ++s) {
            const double d = data.vectors[s].values[f] - sum_c[y[s]] / static_cast<double>(n_c[y[s]]);
            ssw += d * d;
        }
        double score;
        if (ssw == 0.0)
            score = ssb == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        else
            score = (ssb / static_cast<double>(k - 1)) / (ssw / (n - static_cast<double>(k)));
        r.scores[f] = score;
    }
    r.order.resize(r.scores.size());
    std::iota(r.order.begin(), r.order.end(), std::size_t{0});
    std::stable_sort(r.order.begin(), r.order.end(),
                     [&](std::size_t a, std::size_t b) { return r.scores[a] > r.scores[b]; });
    return r;
}

/// Index of the feature RFE drops next: lowest importance, ties to the highest index.
inline std::size_t rfe_victim(const std::vector<double>& importance) {
    std::size_t victim = 0;
    for (std::size_t i = 1; i < importance.size(); ++i)
        if (importance[i] <= importance[victim]) victim = i;
    return victim;
}

/// Surviving feature indices (ascending) after recursive elimination down to `target_count`.
inline std::vector<std::size_t> rfe_select_indices(const LabeledFeatureSet& data, std::size_t target_count,
                                                   TreeParams params = {}) {
    if (target_count == 0) throw ValidationError("RFE target count must be positive");
    if (target_count > data.feature_specs.size())
        throw ValidationError("RFE target count exceeds the number of features");
    std::vector<std::size_t> alive(data.feature_specs.size());
    std::iota(alive.begin(), alive.end(), std::size_t{0});
    while (alive.size() > target_count) {
        const auto subset = data.select(alive);
        const auto tree = train_tree(subset, params);
        const auto imp = feature_importance(tree, subset);
        alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(rfe_victim(imp)));
    }
    return alive;
}

inline std::vector<FeatureSpec> rfe_select(const LabeledFeatureSet& data, std::size_t target_count,
                                           TreeParams params = {}) {
    std::vector<FeatureSpec> out;
    for (auto i : rfe_select_indices(data, target_count, params)) out.push_back(data.feature_specs[i]);
    return out;
}

} // namespace mlc
