#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "mlc/config.hpp"
#include "mlc/metrics.hpp"
#include "mlc/tree.hpp"
#include "oracles.hpp"

namespace {

using mlc::FeatureKind;

std::vector<mlc::FeatureSpec> specs(std::size_t n) {
    std::vector<mlc::FeatureSpec> out;
    const mlc::Axis axes[] = {mlc::Axis::X, mlc::Axis::Y, mlc::Axis::Z, mlc::Axis::V};
    for (std::size_t i = 0; i < n; ++i)
        out.push_back({mlc::kAllFeatureKinds[i % 7], {i / 7 % 2 ? mlc::Sensor::Gyr : mlc::Sensor::Acc, axes[i / 14 % 4]}});
    return out;
}

mlc::LabeledFeatureSet make_set(std::vector<std::vector<double>> rows, std::vector<std::string> labels,
                                std::vector<std::string> classes = {"walk", "stairsUp", "stance"}) {
    mlc::LabeledFeatureSet s;
    s.class_set = std::move(classes);
    s.feature_specs = specs(rows.empty() ? 0 : rows[0].size());
    for (auto& r : rows) s.vectors.push_back({std::move(r), 0.0});
    s.labels = std::move(labels);
    return s;
}

mlc::LabeledFeatureSet random_set(std::mt19937_64& rng, std::size_t n, std::size_t f, std::size_t k = 3) {
    const std::vector<std::string> classes{"walk", "stairsUp", "stance"};
    std::uniform_int_distribution<int> val(0, 9);
    std::vector<std::vector<double>> rows;
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> r;
        for (std::size_t j = 0; j < f; ++j) r.push_back(val(rng) * 0.5);
        rows.push_back(std::move(r));
        labels.push_back(classes[rng() % k]);
    }
    return make_set(std::move(rows), std::move(labels));
}

/// Three classes separable by two axis-aligned thresholds on two features.
mlc::LabeledFeatureSet separable() {
    std::vector<std::vector<double>> rows;
    std::vector<std::string> labels;
    for (int i = 0; i < 16; ++i) {
        rows.push_back({5.0 + i * 0.1, 10.0 + i});
        labels.push_back("walk");
        rows.push_back({5.0 + i * 0.1, 50.0 + i});
        labels.push_back("stairsUp");
    }
    for (int i = 0; i < 11; ++i) {
        rows.push_back({0.1 * i, 30.0 + i});
        labels.push_back("stance");
    }
    return make_set(rows, labels);
}

TEST(TrainTree, SingleClassIsOneLeaf) {
    const auto data = make_set({{1.0}, {2.0}, {3.0}}, {"walk", "walk", "walk"});
    const auto tree = mlc::train_tree(data);
    EXPECT_EQ(tree.size(), 1u);
    EXPECT_EQ(tree.leaves(), 1u);
    EXPECT_EQ(mlc::predict(tree, std::vector<double>{100.0}), "walk");
}

TEST(TrainTree, SeparableThreeClassesGiveThreeLeavesSizeFive) {
    const auto tree = mlc::train_tree(separable());
    EXPECT_EQ(tree.leaves(), 3u);
    EXPECT_EQ(tree.size(), 5u);
    const auto m = mlc::evaluate(tree, separable());
    EXPECT_EQ(m.trace(), 43u);
}

TEST(TrainTree, MidpointThresholdAndPreorderLayout) {
    const auto data = make_set({{1.0}, {2.0}, {4.0}, {6.0}}, {"walk", "walk", "stance", "stance"});
    const auto tree = mlc::train_tree(data, {4, 1});
    ASSERT_EQ(tree.size(), 3u);
    const auto& root = std::get<mlc::SplitNode>(tree.nodes[0]);
    EXPECT_EQ(root.threshold, 3.0);
    EXPECT_EQ(root.left, 1u);
    EXPECT_EQ(root.right, 2u);
    EXPECT_EQ(std::get<mlc::LeafNode>(tree.nodes[1]).label, "walk");
}

TEST(TrainTree, TieBreaksToLowerFeatureThenLowerThreshold) {
    // Both features separate perfectly; feature 0 wins.
    const auto data = make_set({{1, 1}, {2, 2}, {3, 3}, {4, 4}}, {"walk", "walk", "stance", "stance"});
    const auto tree = mlc::train_tree(data, {4, 1});
    EXPECT_EQ(std::get<mlc::SplitNode>(tree.nodes[0]).feature, 0u);
    // Equal-impurity thresholds on one feature: the lower one wins.
    const auto d2 = make_set({{1}, {2}, {3}}, {"walk", "stance", "walk"}, {"walk", "stance"});
    const auto t2 = mlc::train_tree(d2, {1, 1});
    EXPECT_EQ(std::get<mlc::SplitNode>(t2.nodes[0]).threshold, 1.5);
}

TEST(TrainTree, MinLeafAndDepthLimits) {
    // With min_leaf 2 the only admissible split (2.5) leaves both sides 50/50: no decrease, no split.
    const auto data = make_set({{1}, {2}, {3}, {4}}, {"walk", "stance", "stance", "walk"}, {"walk", "stance"});
    EXPECT_EQ(mlc::train_tree(data, {4, 2}).size(), 1u);
    EXPECT_GE(mlc::train_tree(data, {4, 1}).size(), 3u);
    std::mt19937_64 rng(1);
    for (std::size_t d = 1; d <= 4; ++d) EXPECT_LE(mlc::train_tree(random_set(rng, 60, 4), {d, 1}).depth(), d);
}

TEST(TrainTree, MajorityTieGoesToEarliestClass) {
    const auto data = make_set({{1}, {1}}, {"stance", "walk"});
    const auto tree = mlc::train_tree(data);
    EXPECT_EQ(tree.size(), 1u);
    EXPECT_EQ(mlc::predict(tree, std::vector<double>{1}), "walk");
}

TEST(TrainTree, Errors) {
    EXPECT_THROW(mlc::train_tree(make_set({}, {})), mlc::DatasetError);
    EXPECT_THROW(mlc::train_tree(separable(), {0, 1}), mlc::ValidationError);
    EXPECT_THROW(mlc::train_tree(make_set({{1}}, {"jog"})), mlc::ValidationError);
}

TEST(Predict, BoundaryGoesLeft) {
    mlc::DecisionTree t;
    t.nodes = {mlc::SplitNode{0, 2.5, 1, 2}, mlc::LeafNode{"walk"}, mlc::LeafNode{"stance"}};
    EXPECT_EQ(mlc::predict(t, std::vector<double>{2.5}), "walk");
    EXPECT_EQ(mlc::predict(t, std::vector<double>{std::nextafter(2.5, 3.0)}), "stance");
}

TEST(Predict, SingleLeafAlwaysSameLabel) {
    mlc::DecisionTree t;
    t.nodes = {mlc::LeafNode{"stairsUp"}};
    std::mt19937_64 rng(1);
    std::normal_distribution<double> d;
    for (int i = 0; i < 20; ++i) EXPECT_EQ(mlc::predict(t, std::vector<double>{d(rng), d(rng)}), "stairsUp");
}

TEST(Predict, MatchesRecursiveOracleOnRandomTrees) {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> d(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const auto data = random_set(rng, 40, 3);
        const auto tree = mlc::train_tree(data, {3, 1});
        const auto cfg = mlc::compile_config(tree, data.feature_specs, {}, mlc::default_encoding(), data.class_set);
        const auto text_tree = oracle::TextTree::from_mlcfg(mlc::to_text(cfg));
        for (int i = 0; i < 50; ++i) {
            std::vector<double> v{d(rng) * 3 + 2, d(rng) * 3 + 2, d(rng) * 3 + 2};
            EXPECT_EQ(mlc::predict(tree, v), text_tree.classify(v));
        }
        for (const auto& v : data.vectors) EXPECT_EQ(mlc::predict(tree, v), text_tree.classify(v.values));
    }
}

TEST(TreeProperty, SizeLeavesRelationAndValidity) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const auto data = random_set(rng, 10 + rng() % 60, 1 + rng() % 5);
        const mlc::TreeParams p{1 + rng() % 5, 1 + rng() % 3};
        const auto tree = mlc::train_tree(data, p);
        EXPECT_EQ(tree.size(), 2 * tree.leaves() - 1);
        EXPECT_LE(tree.depth(), p.max_depth);
        EXPECT_NO_THROW(tree.validate(data.feature_specs.size()));
    }
}

TEST(TreeProperty, SampleOrderDoesNotMatter) {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 30; ++trial) {
        auto data = random_set(rng, 40, 3);
        const auto tree = mlc::train_tree(data, {4, 1});
        std::vector<std::size_t> perm(data.size());
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        auto shuffled = data;
        for (std::size_t i = 0; i < perm.size(); ++i) {
            shuffled.vectors[i] = data.vectors[perm[i]];
            shuffled.labels[i] = data.labels[perm[i]];
        }
        EXPECT_EQ(mlc::train_tree(shuffled, {4, 1}), tree);
    }
}

TEST(TreeProperty, MonotoneTransformKeepsTrainingPredictions) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 30; ++trial) {
        const auto data = random_set(rng, 40, 3);
        auto warped = data;
        for (auto& v : warped.vectors)
            for (auto& x : v.values) x = std::exp(x) * 3.0 - 7.0;
        const auto a = mlc::train_tree(data, {3, 1});
        const auto b = mlc::train_tree(warped, {3, 1});
        for (std::size_t i = 0; i < data.size(); ++i)
            EXPECT_EQ(mlc::predict(a, data.vectors[i]), mlc::predict(b, warped.vectors[i]));
    }
}

TEST(FeatureImportance, MatchesOracleAndOnlyUsedFeatures) {
    const auto data = separable();
    const auto tree = mlc::train_tree(data);
    const auto imp = mlc::feature_importance(tree, data);
    // Root isolates a 16-sample class on feature 1; stance is then split off on feature 0.
    std::map<std::string, std::size_t> all{{"walk", 16}, {"stairsUp", 16}, {"stance", 11}};
    std::map<std::string, std::size_t> ws{{"walk", 16}, {"stance", 11}}, s{{"stairsUp", 16}};
    std::map<std::string, std::size_t> w{{"walk", 16}}, st{{"stance", 11}};
    const double root = oracle::gini_weighted(all) - oracle::gini_weighted(ws) - oracle::gini_weighted(s);
    const double child = oracle::gini_weighted(ws) - oracle::gini_weighted(w) - oracle::gini_weighted(st);
    EXPECT_EQ(tree.size(), 5u);
    const auto& r = std::get<mlc::SplitNode>(tree.nodes[0]);
    EXPECT_NEAR(imp[r.feature], root + (r.feature == 1 ? 0.0 : child), 1e-9);
    EXPECT_NEAR(imp[0] + imp[1], root + child, 1e-9);
}

} // namespace
