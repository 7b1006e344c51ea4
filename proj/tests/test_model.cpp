#include <gtest/gtest.h>

#include <cmath>
#include <utility>

#include "hgnn/model.hpp"
#include "hgnn/rng.hpp"

using namespace hgnn;

namespace {

MultiTaskDataset small_cls(std::uint64_t seed = 1, std::size_t m = 3, std::size_t k = 3) {
    SyntheticSpec s;
    s.num_tasks = m;
    s.num_classes = k;
    s.feature_dim = 5;
    s.samples_per_class = 4;
    s.seed = seed;
    return generate_synthetic_mtl(s);
}

MultiTaskDataset small_reg(std::uint64_t seed = 1) {
    SyntheticSpec s;
    s.num_tasks = 2;
    s.feature_dim = 4;
    s.samples_per_class = 10;
    s.seed = seed;
    return generate_synthetic_regression(s);
}

ModelConfig config_for(const MultiTaskDataset& d, Variant v) {
    ModelConfig c;
    c.mode = d.mode;
    c.variant = v;
    c.input_dim = d.feature_dim;
    c.hidden_dim = 6;
    c.task_embed_dim = 3;
    c.class_embed_dim = 2;
    c.num_tasks = d.num_tasks();
    c.num_classes = d.num_classes;
    return c;
}

// Independent prediction oracle: explicit loops, long double softmax.
int oracle_predict(const HgnnModel& model, const EmbeddingSet& emb, const Vector& x, std::size_t task) {
    const ModelConfig& c = model.config;
    Vector h(c.hidden_dim);
    for (std::size_t r = 0; r < c.hidden_dim; ++r) {
        long double s = model.params.shared.bias[r];
        for (std::size_t q = 0; q < x.size(); ++q) s += model.params.shared.weight(r, q) * x[q];
        h[r] = s > 0 ? static_cast<double>(s) : 0.0;
    }
    const LinearParams& head = model.params.heads[task];
    int best = 0;
    long double best_p = -1;
    for (std::size_t l = 0; l < c.num_classes; ++l) {
        Vector a = h;
        if (c.uses_task_embedding()) a.insert(a.end(), emb.updated_task[task].begin(), emb.updated_task[task].end());
        if (c.uses_class_embedding()) {
            const Vector& e = emb.updated_class[task * c.num_classes + l];
            a.insert(a.end(), e.begin(), e.end());
        }
        std::vector<long double> z(c.num_classes);
        long double zmax = -INFINITY;
        for (std::size_t o = 0; o < c.num_classes; ++o) {
            long double s = head.bias[o];
            for (std::size_t q = 0; q < a.size(); ++q) s += head.weight(o, q) * a[q];
            z[o] = s;
            zmax = std::max(zmax, s);
        }
        long double denom = 0;
        for (long double v : z) denom += std::exp(v - zmax);
        const long double p = std::exp(z[l] - zmax) / denom;
        if (p > best_p) {
            best_p = p;
            best = static_cast<int>(l);
        }
    }
    return best;
}

}  // namespace

TEST(Loss, CrossEntropyExamples) {
    EXPECT_NEAR(softmax_cross_entropy(Vector{0, 0, 0, 0}, 2), std::log(4.0), 1e-15);
    EXPECT_NEAR(softmax_cross_entropy(Vector{1, 1}, 0), std::log(2.0), 1e-15);
    EXPECT_NEAR(softmax_cross_entropy(Vector{1000, 0}, 0), 0.0, 1e-15);
    EXPECT_TRUE(std::isfinite(softmax_cross_entropy(Vector{0, 1000}, 0)));
}

TEST(Loss, MseExamples) {
    MultiTaskDataset b;
    b.mode = Mode::regression;
    b.feature_dim = 1;
    TaskDataset t;
    t.features = Matrix(1, 2);
    t.targets = {0.0, 0.0};
    b.tasks.push_back(t);
    EXPECT_DOUBLE_EQ(regression_loss({Matrix{{1.0, -1.0}}}, b).value, 1.0);
    EXPECT_DOUBLE_EQ(regression_loss({Matrix{{5.0, 0.0}}}, b).value, 12.5);
}

TEST(Loss, SummedOverTasks) {
    MultiTaskDataset b;
    b.num_classes = 2;
    b.feature_dim = 1;
    for (int i = 0; i < 2; ++i) {
        TaskDataset t;
        t.task_id = i + 1;
        t.features = Matrix(1, 1);
        t.labels = {0};
        b.tasks.push_back(t);
    }
    const LossResult r = classification_loss({Matrix{{0.0}, {0.0}}, Matrix{{0.0}, {0.0}}}, b);
    EXPECT_NEAR(r.value, 2 * std::log(2.0), 1e-15);
}

TEST(Model, OutputShapes) {
    const MultiTaskDataset d = small_cls();
    for (Variant v : {Variant::baseline, Variant::task_only, Variant::class_only, Variant::full}) {
        const HgnnModel model = make_model(config_for(d, v), 3);
        const std::vector<Matrix> out = forward(model, d, d).outputs();
        ASSERT_EQ(out.size(), d.num_tasks());
        for (std::size_t i = 0; i < out.size(); ++i) {
            EXPECT_EQ(out[i].rows(), d.num_classes);
            EXPECT_EQ(out[i].cols(), d.tasks[i].size());
        }
    }
}

TEST(Model, BaselineIsHeadOfSharedRepresentation) {
    const MultiTaskDataset d = small_cls();
    const HgnnModel model = make_model(config_for(d, Variant::baseline), 4);
    const std::vector<Matrix> out = forward(model, d, d).outputs();
    for (std::size_t i = 0; i < d.num_tasks(); ++i) {
        const Matrix h = shared_transform(model.params.shared, Activation::relu, d.tasks[i].features);
        Matrix expected = matmul(model.params.heads[i].weight, h);
        add_column_bias(expected, model.params.heads[i].bias);
        EXPECT_EQ(out[i], expected);
    }
}

TEST(Model, BaselineIgnoresGraphParameters) {
    const MultiTaskDataset d = small_cls();
    HgnnModel model = make_model(config_for(d, Variant::baseline), 5);
    const std::vector<Matrix> before = forward(model, d, d).outputs();
    Rng rng(9);
    for (auto& task : model.params.intra)
        for (auto& layer : task)
            for (double& w : layer.weight.values()) w = rng.uniform(-5, 5);
    for (double& w : model.params.gat_task.first.values()) w = rng.uniform(-5, 5);
    for (double& w : model.params.gat_class.second.values()) w = rng.uniform(-5, 5);
    EXPECT_EQ(forward(model, d, d).outputs(), before);
}

TEST(Model, ZeroEmbeddingColumnsCollapseToBaseline) {
    const MultiTaskDataset d = small_cls();
    HgnnModel full = make_model(config_for(d, Variant::full), 6);
    HgnnModel base = make_model(config_for(d, Variant::baseline), 6);
    base.params.shared = full.params.shared;
    const std::size_t dh = full.config.hidden_dim;
    for (std::size_t i = 0; i < d.num_tasks(); ++i) {
        LinearParams& hf = full.params.heads[i];
        for (std::size_t r = 0; r < hf.weight.rows(); ++r)
            for (std::size_t c = dh; c < hf.weight.cols(); ++c) hf.weight(r, c) = 0.0;
        for (std::size_t r = 0; r < hf.weight.rows(); ++r)
            for (std::size_t c = 0; c < dh; ++c) base.params.heads[i].weight(r, c) = hf.weight(r, c);
        base.params.heads[i].bias = hf.bias;
    }
    const std::vector<Matrix> a = forward(full, d, d).outputs(), b = forward(base, d, d).outputs();
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t e = 0; e < a[i].size(); ++e) EXPECT_NEAR(a[i].values()[e], b[i].values()[e], 1e-12);
}

TEST(Model, EmbeddingShapesPerVariant) {
    const MultiTaskDataset d = small_cls(2, 3, 4);
    const EmbeddingSet full = compute_embeddings(make_model(config_for(d, Variant::full), 1), d);
    EXPECT_EQ(full.raw_task.size(), 3u);
    EXPECT_EQ(full.updated_task.size(), 3u);
    EXPECT_EQ(full.updated_task[0].size(), 3u);
    EXPECT_EQ(full.raw_class.size(), 12u);
    EXPECT_EQ(full.updated_class.size(), 12u);
    EXPECT_EQ(full.updated_class[0].size(), 2u);
    ASSERT_TRUE(full.task_attention.has_value());
    EXPECT_EQ(full.task_attention->rows(), 3u);
    ASSERT_TRUE(full.class_attention.has_value());
    EXPECT_EQ(full.class_attention->rows(), 12u);

    const EmbeddingSet base = compute_embeddings(make_model(config_for(d, Variant::baseline), 1), d);
    EXPECT_TRUE(base.updated_task.empty());
    EXPECT_TRUE(base.updated_class.empty());

    const EmbeddingSet t_only = compute_embeddings(make_model(config_for(d, Variant::task_only), 1), d);
    EXPECT_EQ(t_only.updated_task.size(), 3u);
    EXPECT_TRUE(t_only.updated_class.empty());
}

TEST(Model, MissingClassInPoolIsError) {
    MultiTaskDataset d = small_cls();
    std::vector<std::size_t> keep;
    for (std::size_t j = 0; j < d.tasks[0].size(); ++j)
        if (d.tasks[0].labels[j] != 2) keep.push_back(j);
    d.tasks[0] = select_samples(d.tasks[0], keep);
    const HgnnModel model = make_model(config_for(d, Variant::full), 1);
    EXPECT_THROW(compute_embeddings(model, d), MissingClassError);
}

TEST(Predict, MatchesBruteForceOracle) {
    Rng rng(11);
    std::size_t checked = 0;
    for (std::size_t k = 2; k <= 6; ++k) {
        const MultiTaskDataset d = small_cls(k, 2, k);
        for (Variant v : {Variant::baseline, Variant::class_only, Variant::full}) {
            const HgnnModel model = make_model(config_for(d, v), k * 7);
            const EmbeddingSet emb = compute_embeddings(model, d);
            for (int trial = 0; trial < 20; ++trial) {
                Vector x(d.feature_dim);
                for (double& xi : x) xi = rng.normal();
                const std::size_t task = rng.below(d.num_tasks());
                EXPECT_EQ(predict_class(model, emb, x, task), oracle_predict(model, emb, x, task));
                ++checked;
            }
        }
    }
    EXPECT_EQ(checked, 300u);
}

TEST(Predict, TiesGoToSmallestIndex) {
    const MultiTaskDataset d = small_cls(1, 2, 3);
    HgnnModel model = make_model(config_for(d, Variant::baseline), 1);
    for (double& w : model.params.heads[0].weight.values()) w = 0.0;
    model.params.heads[0].bias = {0.0, 0.0, 0.0};
    const EmbeddingSet emb = compute_embeddings(model, d);
    EXPECT_EQ(predict_class(model, emb, Vector(d.feature_dim, 0.3), 0), 0);
    model.params.heads[0].bias = {0.0, 1.0, 1.0};
    EXPECT_EQ(predict_class(model, emb, Vector(d.feature_dim, 0.3), 0), 1);
}

TEST(Predict, UniformBiasShiftKeepsPrediction) {
    const MultiTaskDataset d = small_cls(3, 2, 4);
    HgnnModel model = make_model(config_for(d, Variant::full), 2);
    const EmbeddingSet emb = compute_embeddings(model, d);
    Rng rng(3);
    std::vector<int> before;
    std::vector<Vector> xs;
    for (int i = 0; i < 50; ++i) {
        Vector x(d.feature_dim);
        for (double& xi : x) xi = rng.normal();
        xs.push_back(x);
        before.push_back(predict_class(model, emb, x, i % 2));
    }
    for (auto& head : model.params.heads)
        for (double& b : head.bias) b += 3.25;
    for (int i = 0; i < 50; ++i) EXPECT_EQ(predict_class(model, emb, xs[i], i % 2), before[i]);
}

TEST(Predict, ModeMismatchIsUsageError) {
    const MultiTaskDataset d = small_cls();
    const HgnnModel model = make_model(config_for(d, Variant::baseline), 1);
    const EmbeddingSet emb = compute_embeddings(model, d);
    EXPECT_THROW(predict_regression(model, emb, Vector(d.feature_dim), 0), UsageError);
    EXPECT_THROW(predict_class(model, emb, Vector(d.feature_dim), 7), UsageError);
}

TEST(Regression, PredictionExamples) {
    const MultiTaskDataset d = small_reg();
    HgnnModel model = make_model(config_for(d, Variant::baseline), 1);
    model.params.shared.weight = Matrix(model.config.hidden_dim, d.feature_dim);
    model.params.shared.bias = Vector(model.config.hidden_dim, 1.0);
    LinearParams& head = model.params.heads[1];
    for (double& w : head.weight.values()) w = 0.5;
    head.bias = {2.0};
    const EmbeddingSet emb = compute_embeddings(model, d);
    EXPECT_DOUBLE_EQ(predict_regression(model, emb, Vector(d.feature_dim, 9.0), 1),
                     2.0 + 0.5 * static_cast<double>(model.config.hidden_dim));
}

TEST(Regression, NeverBuildsClassEmbeddings) {
    const MultiTaskDataset d = small_reg();
    const ModelConfig c = config_for(d, Variant::full);
    EXPECT_FALSE(c.uses_class_embedding());
    EXPECT_EQ(c.output_dim(), 1u);
    EXPECT_EQ(c.head_input_dim(), c.hidden_dim + c.task_embed_dim);
    const EmbeddingSet emb = compute_embeddings(make_model(c, 1), d);
    EXPECT_TRUE(emb.raw_class.empty());
    EXPECT_TRUE(emb.updated_class.empty());
    EXPECT_FALSE(emb.class_attention.has_value());
    EXPECT_EQ(emb.updated_task.size(), 2u);
}

TEST(Regression, ClassOnlyVariantRejected) {
    const MultiTaskDataset d = small_reg();
    EXPECT_THROW(config_for(d, Variant::class_only).validate(), UsageError);
}

TEST(Params, ViewsMarkInactiveBlocks) {
    const MultiTaskDataset d = small_cls();
    HgnnModel base = make_model(config_for(d, Variant::baseline), 1);
    for (const ParamView& v : parameter_views(base.params, base.config)) {
        const bool expect_active = v.name.rfind("shared", 0) == 0 || v.name.rfind("head", 0) == 0;
        EXPECT_EQ(v.active, expect_active) << v.name;
        EXPECT_EQ(v.values.size(), v.rows * v.cols) << v.name;
    }
}

TEST(Params, GlorotRangeAndZeroBias) {
    const MultiTaskDataset d = small_cls();
    const HgnnModel model = make_model(config_for(d, Variant::full), 8);
    for (const ConstParamView& v : parameter_views(std::as_const(model.params), model.config)) {
        if (v.cols == 1 && v.name.find("bias") != std::string::npos) {
            for (double b : v.values) EXPECT_EQ(b, 0.0) << v.name;
        } else {
            const double s = std::sqrt(6.0 / static_cast<double>(v.rows + v.cols));
            for (double w : v.values) EXPECT_LE(std::abs(w), s) << v.name;
        }
    }
}

TEST(Params, SeedDeterminism) {
    const MultiTaskDataset d = small_cls();
    const ModelConfig c = config_for(d, Variant::full);
    EXPECT_EQ(make_model(c, 5).params.gat_class.first, make_model(c, 5).params.gat_class.first);
    EXPECT_NE(make_model(c, 5).params.shared.weight, make_model(c, 6).params.shared.weight);
}
