#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "hgnn/graph.hpp"
#include "hgnn/rng.hpp"

using namespace hgnn;

namespace {

Matrix random_hidden(std::size_t d, std::size_t n, Rng& rng) {
    Matrix h(d, n);
    for (double& v : h.values()) v = rng.uniform(-1.0, 1.0);
    return h;
}

}  // namespace

TEST(ClassificationAdjacency, IdenticalSameClassIsOne) {
    const Matrix h = Matrix::from_columns({{0.3, -1.2}, {0.3, -1.2}});
    const std::vector<int> labels{1, 1};
    EXPECT_EQ(build_classification_adjacency(h, labels).g(0, 1), 1.0);
}

TEST(ClassificationAdjacency, DifferentClassNegated) {
    const Matrix h = Matrix::from_columns({{1, 0}, {0, 0}});
    const std::vector<int> labels{0, 1};
    const Matrix g = build_classification_adjacency(h, labels).g;
    EXPECT_DOUBLE_EQ(g(0, 1), -std::exp(-1.0));
    EXPECT_NEAR(g(0, 1), -0.367879, 1e-6);
}

TEST(ClassificationAdjacency, CountMismatchIsShapeError) {
    const Matrix h(2, 3);
    const std::vector<int> labels{0, 1};
    EXPECT_THROW(build_classification_adjacency(h, labels), ShapeError);
}

TEST(ClassificationAdjacency, SymmetricSignedUnitDiagonal) {
    Rng rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 1 + rng.below(12);
        const Matrix h = random_hidden(4, n, rng);
        std::vector<int> labels(n);
        for (int& y : labels) y = static_cast<int>(rng.below(3));
        const Matrix g = build_classification_adjacency(h, labels).g;
        for (std::size_t j = 0; j < n; ++j) {
            EXPECT_EQ(g(j, j), 1.0);
            for (std::size_t l = 0; l < n; ++l) {
                EXPECT_EQ(g(j, l), g(l, j));
                EXPECT_GT(std::abs(g(j, l)), 0.0);
                EXPECT_LE(std::abs(g(j, l)), 1.0);
                EXPECT_EQ(g(j, l) > 0, labels[j] == labels[l]);
            }
        }
    }
}

TEST(ClassificationAdjacency, RelabelingKeepsMagnitudesAndSigns) {
    Rng rng(3);
    const Matrix h = random_hidden(3, 9, rng);
    std::vector<int> labels{0, 1, 2, 0, 1, 2, 2, 1, 0};
    std::vector<int> relabeled(labels.size());
    const int perm[3] = {2, 0, 1};
    for (std::size_t j = 0; j < labels.size(); ++j) relabeled[j] = perm[labels[j]];
    EXPECT_EQ(build_classification_adjacency(h, labels).g, build_classification_adjacency(h, relabeled).g);
}

TEST(RegressionAdjacency, IdenticalColumnsGiveAllOnes) {
    const Matrix h = Matrix::from_columns({{1, 2}, {1, 2}, {1, 2}});
    EXPECT_EQ(build_regression_adjacency(h).g, Matrix(3, 3, 1.0));
}

TEST(RegressionAdjacency, HandValue) {
    const Matrix g = build_regression_adjacency(Matrix::from_columns({{0, 0}, {1, 1}})).g;
    EXPECT_DOUBLE_EQ(g(0, 1), std::exp(-2.0));
    EXPECT_NEAR(g(0, 1), 0.135335, 1e-6);
    EXPECT_EQ(g(0, 0), 1.0);
}

TEST(RegressionAdjacency, SymmetricPositiveAndMonotoneInDistance) {
    Rng rng(4);
    const Matrix h = random_hidden(3, 15, rng);
    const Matrix g = build_regression_adjacency(h).g;
    std::vector<std::pair<double, double>> pairs;  // (distance, entry)
    for (std::size_t j = 0; j < 15; ++j) {
        for (std::size_t l = 0; l < 15; ++l) {
            EXPECT_EQ(g(j, l), g(l, j));
            EXPECT_GT(g(j, l), 0.0);
            EXPECT_LE(g(j, l), 1.0);
            pairs.emplace_back(sq_l2_distance(h.col(j), h.col(l)), g(j, l));
        }
    }
    std::sort(pairs.begin(), pairs.end());
    for (std::size_t i = 1; i < pairs.size(); ++i) EXPECT_LE(pairs[i].second, pairs[i - 1].second);
}

TEST(RegressionAdjacency, MaxEntryOnDiagonalForDistinctColumns) {
    Rng rng(5);
    const Matrix g = build_regression_adjacency(random_hidden(4, 8, rng)).g;
    EXPECT_EQ(max_abs(g), 1.0);
    for (std::size_t j = 0; j < 8; ++j)
        for (std::size_t l = 0; l < 8; ++l)
            if (j != l) EXPECT_LT(g(j, l), 1.0);
}

TEST(RowNormalize, RowsHaveUnitAbsoluteSum) {
    Rng rng(6);
    const Matrix h = random_hidden(3, 6, rng);
    AdjacencyMatrix adj = build_classification_adjacency(h, std::vector<int>{0, 1, 0, 1, 1, 0});
    row_normalize(adj);
    for (std::size_t j = 0; j < 6; ++j) {
        double s = 0;
        for (std::size_t l = 0; l < 6; ++l) s += std::abs(adj.g(j, l));
        EXPECT_NEAR(s, 1.0, 1e-12);
    }
}
