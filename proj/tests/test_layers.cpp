#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "hgnn/layers.hpp"
#include "hgnn/rng.hpp"

using namespace hgnn;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Matrix m(r, c);
    for (double& v : m.values()) v = rng.uniform(lo, hi);
    return m;
}

LinearParams linear(Matrix w, Vector b) { return {std::move(w), std::move(b)}; }

}  // namespace

// ---- shared transform ----------------------------------------------------------------

TEST(SharedTransform, Examples) {
    EXPECT_EQ(shared_transform(linear(Matrix::identity(2), {0, 0}), Activation::relu,
                               Matrix::column(Vector{1, -1})),
              Matrix::column(Vector{1, 0}));
    EXPECT_EQ(shared_transform(linear(Matrix(2, 2), {0.5, -0.5}), Activation::relu, Matrix::column(Vector{0, 0})),
              Matrix::column(Vector{0.5, 0}));
    EXPECT_EQ(shared_transform(linear(Matrix{{1, 1}, {0, 2}}, {-1, 0}), Activation::relu,
                               Matrix::column(Vector{1, 1})),
              Matrix::column(Vector{1, 2}));
}

TEST(SharedTransform, ShapeMismatch) {
    EXPECT_THROW(shared_transform(linear(Matrix(2, 3), {0, 0}), Activation::relu, Matrix(2, 1)), ShapeError);
}

// ---- intra-task GNN --------------------------------------------------------------------

TEST(IntraGnn, IdentityGraphZeroWeightsIsReluOfHidden) {
    Rng rng(1);
    const Matrix x = random_matrix(3, 4, rng), h = random_matrix(2, 4, rng);
    const std::vector<LinearParams> layers{linear(Matrix(2, 3), {0, 0})};
    EXPECT_EQ(intra_task_gnn(layers, Activation::relu, x, h, Matrix::identity(4)), relu(h));
}

TEST(IntraGnn, SingleNode) {
    const Matrix x = Matrix::column(Vector{2.0}), h = Matrix::column(Vector{-1.0, 3.0});
    const std::vector<LinearParams> layers{linear(Matrix(2, 1), {0, 0})};
    EXPECT_EQ(intra_task_gnn(layers, Activation::relu, x, h, Matrix{{1.0}}), Matrix::column(Vector{0, 3}));
}

TEST(IntraGnn, NegativeCrossTermsClipped) {
    const Matrix x(2, 2);
    const std::vector<LinearParams> layers{linear(Matrix(2, 2), {0, 0})};
    const Matrix out = intra_task_gnn(layers, Activation::relu, x, Matrix::identity(2), Matrix{{1, -0.5}, {-0.5, 1}});
    EXPECT_EQ(out, Matrix::identity(2));
}

TEST(IntraGnn, LinearIdentityCase) {
    Rng rng(2);
    const Matrix x = random_matrix(3, 5, rng), h = random_matrix(4, 5, rng);
    const std::vector<LinearParams> layers{linear(Matrix(4, 3), Vector(4, 0.0))};
    EXPECT_EQ(intra_task_gnn(layers, Activation::identity, x, h, Matrix::identity(5)), h);
}

TEST(IntraGnn, StackedLayersReadPreviousOutputAndRawInputs) {
    Rng rng(3);
    const Matrix x = random_matrix(3, 4, rng), h = random_matrix(2, 4, rng), g = random_matrix(4, 4, rng);
    const std::vector<LinearParams> layers{linear(random_matrix(2, 3, rng), {0.1, -0.2}),
                                           linear(random_matrix(2, 3, rng), {0.3, 0.0})};
    Matrix p1 = add(matmul(layers[0].weight, x), matmul(h, g));
    add_column_bias(p1, layers[0].bias);
    p1 = relu(p1);
    Matrix p2 = add(matmul(layers[1].weight, x), matmul(p1, g));
    add_column_bias(p2, layers[1].bias);
    EXPECT_EQ(intra_task_gnn(layers, Activation::relu, x, h, g), relu(p2));
}

// ---- pooling ----------------------------------------------------------------------------

TEST(Pooling, TaskEmbeddingExamples) {
    EXPECT_EQ(pool_task_embedding(Matrix::from_columns({{1, 2}, {3, 0}})).value, (Vector{3, 2}));
    EXPECT_EQ(pool_task_embedding(Matrix::column(Vector{5, -5})).value, (Vector{5, -5}));
}

TEST(Pooling, TaskEmbeddingPermutationInvariant) {
    Rng rng(4);
    const Matrix h = random_matrix(6, 10, rng);
    std::vector<std::size_t> perm(10);
    std::iota(perm.begin(), perm.end(), 0);
    for (int trial = 0; trial < 10; ++trial) {
        rng.shuffle(perm);
        Matrix p(6, 10);
        for (std::size_t c = 0; c < 10; ++c) p.set_col(c, h.col(perm[c]));
        EXPECT_EQ(pool_task_embedding(p).value, pool_task_embedding(h).value);
    }
}

TEST(Pooling, ClassEmbeddingExamples) {
    const Matrix h = Matrix::from_columns({{1, 0}, {0, 1}, {7, 7}});
    const std::vector<int> labels{0, 0, 1};
    EXPECT_EQ(pool_class_embedding(h, labels, 0).value, (Vector{1, 1}));
    EXPECT_EQ(pool_class_embedding(h, labels, 1).value, (Vector{7, 7}));
    EXPECT_THROW(pool_class_embedding(h, labels, 2), MissingClassError);
}

TEST(Pooling, BackwardRoutesToFirstWinner) {
    const Matrix h = Matrix::from_columns({{2, 1}, {2, 3}});
    const PooledEmbedding p = pool_task_embedding(h);
    Matrix grad(2, 2);
    pool_backward(p, Vector{10, 20}, grad);
    EXPECT_EQ(grad, (Matrix{{10, 0}, {0, 20}}));
}

// ---- cosine attention -------------------------------------------------------------------

TEST(Attention, SingleNode) {
    const Matrix w{{1, 0}, {0, 2}};
    const AttentionResult r = cosine_attention_layer(w, Activation::relu, Matrix::column(Vector{1, -1}));
    EXPECT_EQ(r.attention, Matrix{{1.0}});
    EXPECT_EQ(r.nodes, Matrix::column(Vector{1, 0}));
}

TEST(Attention, IdenticalTransformedNodesGiveUniformAttention) {
    const Matrix w = Matrix::identity(2);
    const AttentionResult r = cosine_attention_layer(w, Activation::relu, Matrix::from_columns({{1, 2}, {1, 2}}));
    for (double a : r.attention.values()) EXPECT_DOUBLE_EQ(a, 0.5);
    EXPECT_EQ(r.nodes.col(0), r.nodes.col(1));
}

TEST(Attention, OrthogonalNodes) {
    const AttentionLayerCache c =
        cosine_attention_forward(Matrix::identity(2), Activation::relu, Matrix::from_columns({{1, 0}, {0, 3}}));
    EXPECT_EQ(c.scores, Matrix::identity(2));
    const double e = std::exp(1.0);
    EXPECT_NEAR(c.attention(0, 0), e / (e + 1), 1e-15);
    EXPECT_NEAR(c.attention(0, 0), 0.73106, 1e-5);
}

TEST(Attention, ZeroNormNodeHasZeroScores) {
    const AttentionLayerCache c = cosine_attention_forward(Matrix::identity(2), Activation::relu,
                                                           Matrix::from_columns({{0, 0}, {1, 1}}));
    EXPECT_EQ(c.scores(0, 0), 0.0);
    EXPECT_EQ(c.scores(0, 1), 0.0);
    EXPECT_EQ(c.scores(1, 0), 0.0);
    EXPECT_EQ(c.scores(1, 1), 1.0);
    EXPECT_DOUBLE_EQ(c.attention(0, 0), 0.5);
}

TEST(Attention, RowsAreProbabilitiesScoresBounded) {
    Rng rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 1 + rng.below(8);
        const Matrix w = random_matrix(3, 5, rng), nodes = random_matrix(5, n, rng);
        const AttentionLayerCache c = cosine_attention_forward(w, Activation::relu, nodes);
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0;
            for (std::size_t j = 0; j < n; ++j) {
                EXPECT_GE(c.attention(i, j), 0.0);
                EXPECT_GE(c.scores(i, j), -1.0);
                EXPECT_LE(c.scores(i, j), 1.0);
                s += c.attention(i, j);
            }
            EXPECT_NEAR(s, 1.0, 1e-8);
            EXPECT_EQ(c.scores(i, i), 1.0);
        }
    }
}

TEST(Attention, ScoresInvariantToPositiveScaling) {
    Rng rng(6);
    const Matrix w = random_matrix(4, 4, rng);
    Matrix nodes = random_matrix(4, 5, rng);
    const Matrix before = cosine_attention_forward(w, Activation::relu, nodes).scores;
    for (std::size_t r = 0; r < 4; ++r) nodes(r, 2) *= 37.5;
    const Matrix after = cosine_attention_forward(w, Activation::relu, nodes).scores;
    for (std::size_t e = 0; e < before.size(); ++e) EXPECT_NEAR(before.values()[e], after.values()[e], 1e-9);
}

// Central differences on a random linear functional of the layer output.
TEST(Attention, BackwardMatchesFiniteDifferences) {
    Rng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 2 + rng.below(4);
        const Matrix w = random_matrix(3, 4, rng), nodes = random_matrix(4, n, rng);
        const Matrix probe = random_matrix(3, n, rng);
        auto objective = [&](const Matrix& wt, const Matrix& x) {
            const Matrix out = cosine_attention_forward(wt, Activation::identity, x).out;
            double s = 0;
            for (std::size_t e = 0; e < out.size(); ++e) s += out.values()[e] * probe.values()[e];
            return s;
        };
        const AttentionLayerCache cache = cosine_attention_forward(w, Activation::identity, nodes);
        Matrix grad_w(3, 4);
        const Matrix grad_x = cosine_attention_backward(w, Activation::identity, cache, probe, grad_w);
        const double eps = 1e-6;
        for (std::size_t e = 0; e < w.size(); ++e) {
            Matrix wp = w, wm = w;
            wp.values()[e] += eps;
            wm.values()[e] -= eps;
            const double numeric = (objective(wp, nodes) - objective(wm, nodes)) / (2 * eps);
            EXPECT_NEAR(grad_w.values()[e], numeric, 1e-6 * std::max(1.0, std::abs(numeric)));
        }
        for (std::size_t e = 0; e < nodes.size(); ++e) {
            Matrix xp = nodes, xm = nodes;
            xp.values()[e] += eps;
            xm.values()[e] -= eps;
            const double numeric = (objective(w, xp) - objective(w, xm)) / (2 * eps);
            EXPECT_NEAR(grad_x.values()[e], numeric, 1e-6 * std::max(1.0, std::abs(numeric)));
        }
    }
}

// ---- two-layer updates --------------------------------------------------------------------

TEST(InterTask, SingleTaskCollapsesToSelf) {
    Rng rng(8);
    const GatParams p{random_matrix(3, 4, rng), random_matrix(3, 3, rng)};
    const Vector e{0.5, -1.0, 2.0, 0.1};
    const EmbeddingUpdate u = inter_task_update(p, Activation::relu, {e});
    const Matrix expected = relu(matmul(p.second, relu(matmul(p.first, Matrix::column(e)))));
    EXPECT_EQ(u.attention, Matrix{{1.0}});
    ASSERT_EQ(u.updated.size(), 1u);
    for (std::size_t d = 0; d < 3; ++d) EXPECT_NEAR(u.updated[0][d], expected(d, 0), 1e-15);
}

TEST(InterTask, IdenticalInputsGiveIdenticalOutputs) {
    Rng rng(9);
    const GatParams p{random_matrix(3, 4, rng), random_matrix(3, 3, rng)};
    const Vector e{1, 2, 3, 4};
    const EmbeddingUpdate u = inter_task_update(p, Activation::relu, {e, e, e});
    EXPECT_EQ(u.updated[0], u.updated[1]);
    EXPECT_EQ(u.updated[1], u.updated[2]);
}

TEST(InterTask, RowSumsOne) {
    Rng rng(10);
    const GatParams p{random_matrix(4, 5, rng), random_matrix(4, 4, rng)};
    std::vector<Vector> raw;
    for (int i = 0; i < 3; ++i) raw.push_back(random_matrix(5, 1, rng).col(0));
    const EmbeddingUpdate u = inter_task_update(p, Activation::relu, raw);
    for (std::size_t i = 0; i < 3; ++i) {
        double s = 0;
        for (std::size_t j = 0; j < 3; ++j) s += u.attention(i, j);
        EXPECT_NEAR(s, 1.0, 1e-8);
    }
}

TEST(InterClass, ShapesAndNormalization) {
    Rng rng(11);
    const GatParams p{random_matrix(4, 5, rng), random_matrix(4, 4, rng)};
    std::vector<Vector> raw;
    for (int i = 0; i < 6; ++i) raw.push_back(random_matrix(5, 1, rng).col(0));
    const EmbeddingUpdate u = inter_class_update(p, Activation::relu, raw, 2, 3);
    EXPECT_EQ(u.attention.rows(), 6u);
    EXPECT_EQ(u.attention.cols(), 6u);
    EXPECT_EQ(u.updated.size(), 6u);
    for (std::size_t i = 0; i < 6; ++i) {
        double s = 0;
        for (std::size_t j = 0; j < 6; ++j) s += u.attention(i, j);
        EXPECT_NEAR(s, 1.0, 1e-8);
    }
    EXPECT_THROW(inter_class_update(p, Activation::relu, raw, 2, 2), ShapeError);
}

TEST(InterClass, EqualInputsGiveEqualOutputs) {
    Rng rng(12);
    const GatParams p{random_matrix(3, 2, rng), random_matrix(3, 3, rng)};
    const EmbeddingUpdate u = inter_class_update(p, Activation::relu, {Vector{1, 1}}, 1, 1);
    EXPECT_EQ(u.attention, Matrix{{1.0}});
    const EmbeddingUpdate v = inter_class_update(p, Activation::relu, std::vector<Vector>(4, Vector{0.5, -2}), 2, 2);
    for (const auto& e : v.updated) EXPECT_EQ(e, v.updated.front());
}

// ---- augmentation ----------------------------------------------------------------------------

TEST(Augment, Examples) {
    EXPECT_EQ(augment(Vector{1, 2}, Vector{3}, Vector{4}), (Vector{1, 2, 3, 4}));
    EXPECT_EQ(augment(Vector{1, 2}, Vector{0, 0}, Vector{0}), (Vector{1, 2, 0, 0, 0}));
    EXPECT_EQ(augment(Vector{1, 2}, Vector{3, 4}, Vector{}), (Vector{1, 2, 3, 4}));
}
