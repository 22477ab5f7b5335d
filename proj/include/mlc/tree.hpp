#pragma once

// CART decision trees: Gini splits on midpoint thresholds, "value <= threshold" goes left.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mlc/error.hpp"
#include "mlc/features.hpp"

namespace mlc {

struct LabeledFeatureSet {
    std::vector<FeatureVector> vectors;
    std::vector<std::string> labels;  // parallel to vectors
    std::vector<std::string> class_set;
    std::vector<FeatureSpec> feature_specs;

    std::size_t size() const noexcept { return vectors.size(); }
    bool empty() const noexcept { return vectors.empty(); }

    std::size_t class_index(const std::string& label) const {
        const auto it = std::find(class_set.begin(), class_set.end(), label);
        if (it == class_set.end()) throw ValidationError("label '" + label + "' is not in the class set");
        return static_cast<std::size_t>(it - class_set.begin());
    }

    std::vector<std::size_t> label_indices() const {
        std::vector<std::size_t> y;
        y.reserve(labels.size());
        for (const auto& l : labels) y.push_back(class_index(l));
        return y;
    }

    void validate() const {
        if (labels.size() != vectors.size()) throw ValidationError("labels and vectors differ in length");
        for (const auto& v : vectors)
            if (v.values.size() != feature_specs.size())
                throw ValidationError("feature vector length does not match the feature list");
        for (const auto& l : labels) (void)class_index(l);
    }

    std::size_t distinct_labels() const {
        std::vector<bool> seen(class_set.size(), false);
        for (auto i : label_indices()) seen[i] = true;
        return static_cast<std::size_t>(std::count(seen.begin(), seen.end(), true));
    }

    /// Keeps the listed feature columns, in the order given.
    LabeledFeatureSet select(std::span<const std::size_t> features) const {
        LabeledFeatureSet out;
        out.labels = labels;
        out.class_set = class_set;
        for (auto f : features) out.feature_specs.push_back(feature_specs.at(f));
        out.vectors.reserve(vectors.size());
        for (const auto& v : vectors) {
            FeatureVector fv;
            fv.window_end_t = v.window_end_t;
            for (auto f : features) fv.values.push_back(v.values.at(f));
            out.vectors.push_back(std::move(fv));
        }
        return out;
    }
};

/// Windows a recording and attaches each window's majority label.
/// Windows with no labeled frame are skipped.
inline LabeledFeatureSet make_labeled_set(const Recording& rec, const WindowSpec& wspec,
                                          std::vector<FeatureSpec> specs) {
    if (!rec.labeled()) throw DatasetError("recording carries no labels");
    auto vectors = window_features(rec, wspec, specs);
    const auto labels = window_labels(rec, wspec);
    LabeledFeatureSet set;
    set.class_set = rec.class_set;
    set.feature_specs = std::move(specs);
    for (std::size_t w = 0; w < vectors.size(); ++w) {
        if (!labels[w]) continue;
        set.vectors.push_back(std::move(vectors[w]));
        set.labels.push_back(*labels[w]);
    }
    return set;
}

struct SplitNode {
    std::size_t feature;
    double threshold;
    std::size_t left;
    std::size_t right;

    friend bool operator==(const SplitNode&, const SplitNode&) = default;
};

struct LeafNode {
    std::string label;

    friend bool operator==(const LeafNode&, const LeafNode&) = default;
};

using TreeNode = std::variant<SplitNode, LeafNode>;

/// Node table with the root at index 0.
struct DecisionTree {
    std::vector<TreeNode> nodes;

    std::size_t size() const noexcept { return nodes.size(); }

    std::size_t leaves() const {
        return static_cast<std::size_t>(std::count_if(
            nodes.begin(), nodes.end(), [](const TreeNode& n) { return std::holds_alternative<LeafNode>(n); }));
    }

    std::size_t depth() const {
        std::size_t best = 0;
        std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
        while (!stack.empty()) {
            auto [i, d] = stack.back();
            stack.pop_back();
            best = std::max(best, d);
            if (const auto* s = std::get_if<SplitNode>(&nodes[i])) {
                stack.emplace_back(s->left, d + 1);
                stack.emplace_back(s->right, d + 1);
            }
        }
        return best;
    }

    /// Checks the table is a proper binary tree rooted at 0 over `n_features` columns.
    void validate(std::size_t n_features) const {
        if (nodes.empty()) throw ValidationError("tree has no nodes");
        std::vector<std::size_t> parents(nodes.size(), 0);
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const auto* s = std::get_if<SplitNode>(&nodes[i]);
            if (!s) continue;
            if (s->feature >= n_features)
                throw ValidationError("node " + std::to_string(i) + " splits on unknown feature " +
                                      std::to_string(s->feature));
            if (!std::isfinite(s->threshold))
                throw ValidationError("node " + std::to_string(i) + " has a non-finite threshold");
            for (auto c : {s->left, s->right}) {
                if (c >= nodes.size() || c == 0)
                    throw ValidationError("node " + std::to_string(i) + " has an invalid child " + std::to_string(c));
                ++parents[c];
            }
        }
        for (std::size_t i = 1; i < nodes.size(); ++i)
            if (parents[i] != 1)
                throw ValidationError("node " + std::to_string(i) + " has " + std::to_string(parents[i]) +
                                      " parents");
        // Single parent per node plus full reachability from the root rules out cycles.
        std::vector<bool> seen(nodes.size(), false);
        std::vector<std::size_t> stack{0};
        std::size_t visited = 0;
        while (!stack.empty()) {
            const auto i = stack.back();
            stack.pop_back();
            if (seen[i]) throw ValidationError("tree contains a cycle");
            seen[i] = true;
            ++visited;
            if (const auto* s = std::get_if<SplitNode>(&nodes[i])) {
                stack.push_back(s->left);
                stack.push_back(s->right);
            }
        }
        if (visited != nodes.size()) throw ValidationError("tree has unreachable nodes");
    }

    std::vector<std::string> leaf_labels() const {
        std::vector<std::string> out;
        for (const auto& n : nodes)
            if (const auto* l = std::get_if<LeafNode>(&n))
                if (std::find(out.begin(), out.end(), l->label) == out.end()) out.push_back(l->label);
        return out;
    }

    friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

struct TreeParams {
    std::size_t max_depth = 4;
    std::size_t min_leaf = 2;
};

/// Leaf index reached by `values`. Exact comparison, no epsilon.
inline std::size_t descend(const DecisionTree& tree, std::span<const double> values) {
    std::size_t i = 0;
    while (const auto* s = std::get_if<SplitNode>(&tree.nodes[i])) {
        detail::require(s->feature < values.size(), "predict: feature vector too short for tree");
        i = values[s->feature] <= s->threshold ? s->left : s->right;
    }
    return i;
}

inline const std::string& predict(const DecisionTree& tree, std::span<const double> values) {
    return std::get<LeafNode>(tree.nodes[descend(tree, values)]).label;
}

inline const std::string& predict(const DecisionTree& tree, const FeatureVector& v) {
    return predict(tree, std::span<const double>(v.values));
}

namespace detail {

using u128 = unsigned __int128;

/// Purity score sum(c^2)/n kept as an exact fraction so equal splits compare equal.
struct Purity {
    u128 num;
    u128 den;

    friend bool operator<(const Purity& a, const Purity& b) { return a.num * b.den < b.num * a.den; }
};

inline std::uint64_t sum_sq(std::span<const std::size_t> counts) {
    std::uint64_t s = 0;
    for (auto c : counts) s += static_cast<std::uint64_t>(c) * c;
    return s;
}

inline double weighted_gini(std::span<const std::size_t> counts) {
    std::size_t n = 0;
    for (auto c : counts) n += c;
    if (n == 0) return 0.0;
    return static_cast<double>(n) - static_cast<double>(sum_sq(counts)) / static_cast<double>(n);
}

inline std::size_t majority_class(std::span<const std::size_t> counts) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < counts.size(); ++c)
        if (counts[c] > counts[best]) best = c;
    return best;
}

class CartBuilder {
public:
    CartBuilder(const LabeledFeatureSet& data, TreeParams params)
        : data_(data), params_(params), y_(data.label_indices()), k_(data.class_set.size()) {}

    DecisionTree build() {
        std::vector<std::size_t> idx(data_.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        grow(idx, 0);
        return std::move(tree_);
    }

private:
    struct Candidate {
        std::size_t feature;
        double threshold;
        Purity purity;
    };

    std::vector<std::size_t> counts_of(std::span<const std::size_t> idx) const {
        std::vector<std::size_t> c(k_, 0);
        for (auto i : idx) ++c[y_[i]];
        return c;
    }

    std::optional<Candidate> best_split(std::span<const std::size_t> idx, std::span<const std::size_t> counts) const {
        const std::size_t n = idx.size();
        std::optional<Candidate> best;
        std::vector<std::pair<double, std::size_t>> col(n);
        std::vector<std::size_t> left(k_);
        for (std::size_t f = 0; f < data_.feature_specs.size(); ++f) {
            for (std::size_t j = 0; j < n; ++j) col[j] = {data_.vectors[idx[j]].values[f], y_[idx[j]]};
            std::sort(col.begin(), col.end());
            std::fill(left.begin(), left.end(), 0);
            for (std::size_t j = 0; j + 1 < n; ++j) {
                ++left[col[j].second];
                if (!(col[j].first < col[j + 1].first)) continue;
                const std::size_t nl = j + 1, nr = n - nl;
                if (nl < params_.min_leaf || nr < params_.min_leaf) continue;
                std::uint64_t sl = 0, sr = 0;
                for (std::size_t c = 0; c < k_; ++c) {
                    sl += static_cast<std::uint64_t>(left[c]) * left[c];
                    const auto r = counts[c] - left[c];
                    sr += static_cast<std::uint64_t>(r) * r;
                }
                // sl/nl + sr/nr as one fraction
                Purity p{u128(sl) * nr + u128(sr) * nl, u128(nl) * nr};
                double thr = col[j].first + (col[j + 1].first - col[j].first) / 2.0;
                if (!(thr < col[j + 1].first)) thr = col[j].first;
                if (!best || best->purity < p) best = Candidate{f, thr, p};
            }
        }
        return best;
    }

    std::size_t grow(std::vector<std::size_t>& idx, std::size_t depth) {
        const auto counts = counts_of(idx);
        const std::size_t self = tree_.nodes.size();
        const auto leaf = [&] {
            tree_.nodes.emplace_back(LeafNode{data_.class_set[majority_class(counts)]});
            return self;
        };
        const bool pure = std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }) <= 1;
        if (pure || depth >= params_.max_depth) return leaf();

        const auto split = best_split(idx, counts);
        if (!split) return leaf();
        const Purity parent{sum_sq(counts), idx.size()};
        if (!(parent < split->purity)) return leaf();  // no impurity decrease

        std::vector<std::size_t> l, r;
        for (auto i : idx) (data_.vectors[i].values[split->feature] <= split->threshold ? l : r).push_back(i);
        tree_.nodes.emplace_back(SplitNode{split->feature, split->threshold, 0, 0});
        const auto li = grow(l, depth + 1);
        const auto ri = grow(r, depth + 1);
        auto& node = std::get<SplitNode>(tree_.nodes[self]);
        node.left = li;
        node.right = ri;
        return self;
    }

    const LabeledFeatureSet& data_;
    TreeParams params_;
    std::vector<std::size_t> y_;
    std::size_t k_;
    DecisionTree tree_;
};

} // namespace detail

/// Greedy CART. Deterministic: ties go to the lower feature ordinal, then the lower threshold.
/// Nodes are laid out in preorder.
inline DecisionTree train_tree(const LabeledFeatureSet& data, TreeParams params = {}) {
    if (data.empty()) throw DatasetError("cannot train on an empty dataset");
    if (params.max_depth < 1 || params.min_leaf < 1)
        throw ValidationError("max_depth and min_leaf must be at least 1");
    data.validate();
    return detail::CartBuilder(data, params).build();
}

/// Total (sample-weighted) Gini decrease credited to each feature by `tree` on `data`.
inline std::vector<double> feature_importance(const DecisionTree& tree, const LabeledFeatureSet& data) {
    const auto y = data.label_indices();
    const std::size_t k = data.class_set.size();
    std::vector<std::vector<std::size_t>> counts(tree.size(), std::vector<std::size_t>(k, 0));
    for (std::size_t s = 0; s < data.size(); ++s) {
        std::size_t i = 0;
        for (;;) {
            ++counts[i][y[s]];
            const auto* split = std::get_if<SplitNode>(&tree.nodes[i]);
            if (!split) break;
            i = data.vectors[s].values[split->feature] <= split->threshold ? split->left : split->right;
        }
    }
    std::vector<double> imp(data.feature_specs.size(), 0.0);
    for (std::size_t i = 0; i < tree.size(); ++i) {
        const auto* s = std::get_if<SplitNode>(&tree.nodes[i]);
        if (!s) continue;
        imp[s->feature] += detail::weighted_gini(counts[i]) - detail::weighted_gini(counts[s->left]) -
                           detail::weighted_gini(counts[s->right]);
    }
    return imp;
}

} // namespace mlc
