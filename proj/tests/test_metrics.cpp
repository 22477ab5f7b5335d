#include <gtest/gtest.h>

#include <random>

#include "mlc/metrics.hpp"
#include "oracles.hpp"

namespace {

mlc::ConfusionMatrix matrix(std::vector<std::vector<std::size_t>> counts) {
    std::vector<std::string> classes;
    for (std::size_t i = 0; i < counts.size(); ++i) classes.push_back("c" + std::to_string(i));
    mlc::ConfusionMatrix m(classes);
    m.counts = std::move(counts);
    return m;
}

TEST(Kappa, DiagonalTrainingResult) {
    mlc::ConfusionMatrix m({"walk", "stairsUp", "stance"});
    m.counts = {{16, 0, 0}, {0, 16, 0}, {0, 0, 11}};
    EXPECT_EQ(m.total(), 43u);
    EXPECT_EQ(m.accuracy(), 1.0);
    EXPECT_EQ(m.kappa(), 1.0);
    EXPECT_EQ(mlc::format_confusion(m),
              "          walk  stairsUp  stance\n"
              "walk        16         0       0\n"
              "stairsUp     0        16       0\n"
              "stance       0         0      11\n");
}

TEST(Kappa, SingleClassPredictionsAreChance) {
    EXPECT_EQ(matrix({{5, 0}, {5, 0}}).kappa(), 0.0);
}

TEST(Kappa, DegenerateChanceAgreement) {
    EXPECT_EQ(matrix({{7, 0}, {0, 0}}).kappa(), 1.0);
    EXPECT_EQ(matrix({{0, 0}, {0, 0}}).kappa(), 0.0);
}

TEST(Kappa, TwoByTwoHandFormula) {
    // p_o = 15/20; marginals rows (10,10), cols (11,9): p_e = (10*11 + 10*9)/400 = 0.5
    const double po = 15.0 / 20.0, pe = (10.0 * 11.0 + 10.0 * 9.0) / 400.0;
    EXPECT_NEAR(matrix({{8, 2}, {3, 7}}).kappa(), (po - pe) / (1 - pe), 1e-15);
    EXPECT_NEAR(matrix({{8, 2}, {3, 7}}).kappa(), 0.5, 1e-15);
}

TEST(Kappa, MatchesIntegerMarginalOracle) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t k = 2 + rng() % 4;
        std::vector<std::vector<std::size_t>> c(k, std::vector<std::size_t>(k));
        for (auto& row : c)
            for (auto& v : row) v = rng() % 20;
        const double want = oracle::kappa(c);
        EXPECT_LE(std::abs(matrix(c).kappa() - want), 1e-9 * std::max(1.0, std::abs(want)));
    }
}

TEST(KappaProperty, AccuracyOneIffKappaOne) {
    std::mt19937_64 rng(18);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t k = 2 + rng() % 3;
        std::vector<std::vector<std::size_t>> c(k, std::vector<std::size_t>(k, 0));
        for (std::size_t i = 0; i < k; ++i) c[i][i] = 1 + rng() % 5;
        if (rng() % 2) c[rng() % k][rng() % k] += 1 + rng() % 3;
        const auto m = matrix(c);
        EXPECT_EQ(m.accuracy() == 1.0, m.kappa() == 1.0);
    }
}

TEST(ConfusionFromPairs, CountsAndErrors) {
    const std::vector<std::string> classes{"a", "b"};
    const std::vector<std::string> t{"a", "a", "b"}, p{"a", "b", "b"};
    const auto m = mlc::confusion_from_pairs(classes, t, p);
    EXPECT_EQ(m.counts, (std::vector<std::vector<std::size_t>>{{1, 1}, {0, 1}}));
    const std::vector<std::string> bad{"a", "a", "z"};
    EXPECT_THROW(mlc::confusion_from_pairs(classes, t, bad), mlc::ValidationError);
}

} // namespace
