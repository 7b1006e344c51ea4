#include "hgnn/model.hpp"

#include <cmath>

#include "hgnn/graph.hpp"
#include "hgnn/rng.hpp"

namespace hgnn {

const char* to_string(Variant v) {
    switch (v) {
        case Variant::baseline: return "baseline";
        case Variant::task_only: return "t";
        case Variant::class_only: return "c";
        case Variant::full: return "full";
    }
    return "?";
}

Variant parse_variant(const std::string& text) {
    if (text == "baseline") return Variant::baseline;
    if (text == "t" || text == "task") return Variant::task_only;
    if (text == "c" || text == "class") return Variant::class_only;
    if (text == "full") return Variant::full;
    throw UsageError("unknown variant '" + text + "' (expected baseline, t, c or full)");
}

bool ModelConfig::uses_task_embedding() const {
    return variant == Variant::task_only || variant == Variant::full;
}

bool ModelConfig::uses_class_embedding() const {
    return mode == Mode::classification &&
           (variant == Variant::class_only || variant == Variant::full);
}

std::size_t ModelConfig::head_input_dim() const {
    return hidden_dim + (uses_task_embedding() ? task_embed_dim : 0) +
           (uses_class_embedding() ? class_embed_dim : 0);
}

std::size_t ModelConfig::output_dim() const {
    return mode == Mode::classification ? num_classes : 1;
}

void ModelConfig::validate() const {
    if (input_dim == 0 || hidden_dim == 0 || task_embed_dim == 0 || class_embed_dim == 0) {
        throw UsageError("model dimensions must be positive");
    }
    if (intra_layers == 0) throw UsageError("model needs at least one intra-task layer");
    if (num_tasks == 0) throw UsageError("model needs at least one task");
    if (mode == Mode::classification && num_classes == 0) {
        throw UsageError("classification model needs k >= 1");
    }
    if (mode == Mode::regression && variant == Variant::class_only) {
        throw UsageError("regression tasks have no class embeddings; variant c is unavailable");
    }
}

namespace {

LinearParams linear(std::size_t out, std::size_t in) {
    return {Matrix(out, in), Vector(out, 0.0)};
}

void glorot(Matrix& w, Rng& rng) {
    const double s = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    for (double& v : w.values()) v = rng.uniform(-s, s);
}

}  // namespace

HgnnParams zeros_like(const HgnnParams& p) {
    HgnnParams z;
    z.shared = zeros_like(p.shared);
    for (const auto& task : p.intra) {
        auto& layers = z.intra.emplace_back();
        for (const auto& l : task) layers.push_back(zeros_like(l));
    }
    z.gat_task = zeros_like(p.gat_task);
    z.gat_class = zeros_like(p.gat_class);
    for (const auto& h : p.heads) z.heads.push_back(zeros_like(h));
    return z;
}

HgnnModel make_model(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    HgnnModel model{config, {}, 0};
    auto& p = model.params;
    const std::size_t dh = config.hidden_dim;
    p.shared = linear(dh, config.input_dim);
    p.intra.assign(config.num_tasks, {});
    for (auto& layers : p.intra)
        for (std::size_t l = 0; l < config.intra_layers; ++l) layers.push_back(linear(dh, config.input_dim));
    p.gat_task = {Matrix(config.task_embed_dim, dh), Matrix(config.task_embed_dim, config.task_embed_dim)};
    p.gat_class = {Matrix(config.class_embed_dim, dh),
                   Matrix(config.class_embed_dim, config.class_embed_dim)};
    for (std::size_t i = 0; i < config.num_tasks; ++i) {
        p.heads.push_back(linear(config.output_dim(), config.head_input_dim()));
    }

    Rng rng(seed);
    glorot(p.shared.weight, rng);
    for (auto& layers : p.intra)
        for (auto& l : layers) glorot(l.weight, rng);
    glorot(p.gat_task.first, rng);
    glorot(p.gat_task.second, rng);
    glorot(p.gat_class.first, rng);
    glorot(p.gat_class.second, rng);
    for (auto& h : p.heads) glorot(h.weight, rng);
    return model;
}

namespace {

template <typename Params, typename View, typename Span>
std::vector<View> views_impl(Params& p, const ModelConfig& c) {
    std::vector<View> out;
    const bool graph = c.uses_graph();
    auto add = [&](std::string name, Span values, std::size_t cols, bool active) {
        out.push_back(View{std::move(name), values, values.size() / cols, cols, active});
    };
    add("shared.weight", p.shared.weight.values(), p.shared.weight.cols(), true);
    add("shared.bias", Span(p.shared.bias), 1, true);
    for (std::size_t i = 0; i < p.intra.size(); ++i) {
        for (std::size_t l = 0; l < p.intra[i].size(); ++l) {
            const std::string base = "intra[" + std::to_string(i) + "][" + std::to_string(l) + "]";
            add(base + ".weight", p.intra[i][l].weight.values(), p.intra[i][l].weight.cols(), graph);
            add(base + ".bias", Span(p.intra[i][l].bias), 1, graph);
        }
    }
    add("gat_task.first", p.gat_task.first.values(), p.gat_task.first.cols(), c.uses_task_embedding());
    add("gat_task.second", p.gat_task.second.values(), p.gat_task.second.cols(), c.uses_task_embedding());
    add("gat_class.first", p.gat_class.first.values(), p.gat_class.first.cols(), c.uses_class_embedding());
    add("gat_class.second", p.gat_class.second.values(), p.gat_class.second.cols(),
        c.uses_class_embedding());
    for (std::size_t i = 0; i < p.heads.size(); ++i) {
        const std::string base = "head[" + std::to_string(i) + "]";
        add(base + ".weight", p.heads[i].weight.values(), p.heads[i].weight.cols(), true);
        add(base + ".bias", Span(p.heads[i].bias), 1, true);
    }
    return out;
}

}  // namespace

std::vector<ParamView> parameter_views(HgnnParams& params, const ModelConfig& config) {
    return views_impl<HgnnParams, ParamView, std::span<double>>(params, config);
}

std::vector<ConstParamView> parameter_views(const HgnnParams& params, const ModelConfig& config) {
    return views_impl<const HgnnParams, ConstParamView, std::span<const double>>(params, config);
}

const Vector* EmbeddingSet::task(std::size_t i) const {
    return i < updated_task.size() ? &updated_task[i] : nullptr;
}

const Vector* EmbeddingSet::cls(std::size_t i, std::size_t j, std::size_t k) const {
    const std::size_t idx = i * k + j;
    return idx < updated_class.size() ? &updated_class[idx] : nullptr;
}

std::vector<Matrix> ForwardCache::outputs() const {
    std::vector<Matrix> out;
    for (const auto& t : tasks) out.push_back(t.outputs);
    return out;
}

namespace {

void check_compatible(const ModelConfig& c, const MultiTaskDataset& ds, const char* what) {
    if (ds.mode != c.mode) {
        throw UsageError(std::string(what) + ": dataset mode " + to_string(ds.mode) +
                         " does not match model mode " + to_string(c.mode));
    }
    if (ds.num_tasks() != c.num_tasks || ds.feature_dim != c.input_dim ||
        (c.mode == Mode::classification && ds.num_classes != c.num_classes)) {
        throw ShapeError(std::string(what) + ": dataset (m=" + std::to_string(ds.num_tasks()) +
                         ", p=" + std::to_string(ds.feature_dim) + ", k=" +
                         std::to_string(ds.num_classes) + ") does not match model (m=" +
                         std::to_string(c.num_tasks) + ", p=" + std::to_string(c.input_dim) +
                         ", k=" + std::to_string(c.num_classes) + ")");
    }
}

std::vector<Vector> gat_outputs(const GatCache& cache) {
    std::vector<Vector> out;
    for (std::size_t c = 0; c < cache.second.out.cols(); ++c) out.push_back(cache.second.out.col(c));
    return out;
}

}  // namespace

ForwardCache forward_embeddings(const HgnnModel& model, const MultiTaskDataset& pool,
                                const ForwardOptions& options) {
    const ModelConfig& c = model.config;
    check_compatible(c, pool, "forward");
    ForwardCache cache;
    cache.model_version = model.version;
    cache.tasks.resize(c.num_tasks);
    if (!c.uses_graph()) return cache;

    const std::size_t k = c.num_classes;
    auto& emb = cache.embeddings;
    // Per-task passes are independent until the inter-task synchronization.
    for (std::size_t i = 0; i < c.num_tasks; ++i) {
        const TaskDataset& task = pool.tasks[i];
        TaskCache& tc = cache.tasks[i];
        tc.pool_inputs = task.features;
        tc.pool_labels = task.labels;
        tc.pool_shared = shared_transform_forward(model.params.shared, c.shared_activation, task.features);
        if (options.frozen_adjacency) {
            tc.adjacency = (*options.frozen_adjacency).at(i);
        } else {
            AdjacencyMatrix adj = c.mode == Mode::classification
                                      ? build_classification_adjacency(tc.pool_shared.out, task.labels, task.task_id)
                                      : build_regression_adjacency(tc.pool_shared.out, task.task_id);
            if (c.normalize_adjacency) row_normalize(adj);
            tc.adjacency = std::move(adj.g);
        }
        tc.intra = intra_task_gnn_forward(model.params.intra[i], c.intra_activation, task.features,
                                          tc.pool_shared.out, tc.adjacency);
        const Matrix& h = tc.intra.out.back();
        if (c.uses_task_embedding()) {
            tc.task_pool = pool_task_embedding(h);
            emb.raw_task.push_back(tc.task_pool.value);
        }
        if (c.uses_class_embedding()) {
            for (std::size_t j = 0; j < k; ++j) {
                bool present = false;
                for (int y : task.labels) present = present || y == static_cast<int>(j);
                if (present) {
                    tc.class_pool.emplace_back(pool_class_embedding(h, task.labels, static_cast<int>(j)));
                    emb.raw_class.push_back(tc.class_pool.back()->value);
                } else if (options.class_fallback) {
                    tc.class_pool.emplace_back(std::nullopt);
                    emb.raw_class.push_back(options.class_fallback->at(i * k + j));
                } else {
                    throw MissingClassError("task " + std::to_string(task.task_id) + ": class " +
                                            std::to_string(j + 1) + " has no samples to pool");
                }
            }
        }
    }
    if (c.uses_task_embedding()) {
        cache.task_gat = gat_forward(model.params.gat_task, c.attention_activation,
                                     Matrix::from_columns(emb.raw_task));
        emb.updated_task = gat_outputs(*cache.task_gat);
        emb.task_attention = cache.task_gat->second.attention;
    }
    if (c.uses_class_embedding()) {
        cache.class_gat = gat_forward(model.params.gat_class, c.attention_activation,
                                      Matrix::from_columns(emb.raw_class));
        emb.updated_class = gat_outputs(*cache.class_gat);
        emb.class_attention = cache.class_gat->second.attention;
    }
    return cache;
}

ForwardCache forward(const HgnnModel& model, const MultiTaskDataset& pool,
                     const MultiTaskDataset& batch, const ForwardOptions& options) {
    const ModelConfig& c = model.config;
    check_compatible(c, batch, "forward");
    ForwardCache cache = forward_embeddings(model, pool, options);
    cache.has_batch = true;
    const std::size_t k = c.num_classes;
    const auto& emb = cache.embeddings;
    for (std::size_t i = 0; i < c.num_tasks; ++i) {
        const TaskDataset& task = batch.tasks[i];
        TaskCache& tc = cache.tasks[i];
        tc.batch_inputs = task.features;
        tc.batch_labels = task.labels;
        tc.batch_shared = shared_transform_forward(model.params.shared, c.shared_activation, task.features);
        const std::size_t n = task.size();
        tc.augmented = Matrix(c.head_input_dim(), n);
        std::span<const double> task_emb;
        if (c.uses_task_embedding()) task_emb = emb.updated_task[i];
        for (std::size_t l = 0; l < n; ++l) {
            const Vector h = tc.batch_shared.out.col(l);
            std::span<const double> class_emb;
            if (c.uses_class_embedding()) class_emb = emb.updated_class[i * k + task.labels[l]];
            tc.augmented.set_col(l, augment(h, task_emb, class_emb));
        }
        tc.outputs = matmul(model.params.heads[i].weight, tc.augmented);
        add_column_bias(tc.outputs, model.params.heads[i].bias);
    }
    return cache;
}

EmbeddingSet compute_embeddings(const HgnnModel& model, const MultiTaskDataset& pool) {
    return forward_embeddings(model, pool).embeddings;
}

double softmax_cross_entropy(std::span<const double> logits, int label) {
    if (label < 0 || static_cast<std::size_t>(label) >= logits.size()) {
        throw UsageError("softmax_cross_entropy: label out of range");
    }
    check_finite(logits, "softmax_cross_entropy");
    double mx = logits[0];
    for (double v : logits) mx = std::max(mx, v);
    double total = 0.0;
    for (double v : logits) total += std::exp(v - mx);
    return std::log(total) + mx - logits[label];
}

LossResult classification_loss(const std::vector<Matrix>& logits, const MultiTaskDataset& batch) {
    if (logits.size() != batch.num_tasks()) throw ShapeError("classification_loss: task count");
    LossResult result;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        const Matrix& z = logits[i];
        const auto& labels = batch.tasks[i].labels;
        if (z.cols() != labels.size()) throw ShapeError("classification_loss: sample count");
        const double inv_n = 1.0 / static_cast<double>(z.cols());
        Matrix grad(z.rows(), z.cols());
        double task_loss = 0.0;
        for (std::size_t l = 0; l < z.cols(); ++l) {
            const Vector col = z.col(l);
            task_loss += softmax_cross_entropy(col, labels[l]);
            const Vector prob = softmax_vector(col);
            for (std::size_t r = 0; r < z.rows(); ++r) {
                grad(r, l) = (prob[r] - (static_cast<int>(r) == labels[l] ? 1.0 : 0.0)) * inv_n;
            }
        }
        result.value += task_loss * inv_n;
        result.grad_outputs.push_back(std::move(grad));
    }
    return result;
}

LossResult regression_loss(const std::vector<Matrix>& predictions, const MultiTaskDataset& batch) {
    if (predictions.size() != batch.num_tasks()) throw ShapeError("regression_loss: task count");
    LossResult result;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const Matrix& p = predictions[i];
        const auto& y = batch.tasks[i].targets;
        if (p.rows() != 1 || p.cols() != y.size()) {
            throw ShapeError("regression_loss: predictions " + p.shape_str() + " for " +
                             std::to_string(y.size()) + " targets");
        }
        const double inv_n = 1.0 / static_cast<double>(y.size());
        Matrix grad(1, y.size());
        double sse = 0.0;
        for (std::size_t l = 0; l < y.size(); ++l) {
            const double r = p(0, l) - y[l];
            sse += r * r;
            grad(0, l) = 2.0 * r * inv_n;
        }
        result.value += sse * inv_n;
        result.grad_outputs.push_back(std::move(grad));
    }
    return result;
}

LossResult model_loss(const ModelConfig& config, const std::vector<Matrix>& outputs,
                      const MultiTaskDataset& batch) {
    return config.mode == Mode::classification ? classification_loss(outputs, batch)
                                               : regression_loss(outputs, batch);
}

Vector head_forward(const LinearParams& head, std::span<const double> augmented) {
    Vector out = matvec(head.weight, augmented);
    for (std::size_t r = 0; r < out.size(); ++r) out[r] += head.bias[r];
    return out;
}

int predict_class(const HgnnModel& model, const EmbeddingSet& embeddings,
                  std::span<const double> x, std::size_t task) {
    const ModelConfig& c = model.config;
    if (c.mode != Mode::classification) throw UsageError("predict_class: model is in regression mode");
    if (task >= c.num_tasks) throw UsageError("predict_class: task index out of range");
    const Matrix h_mat = shared_transform(model.params.shared, c.shared_activation, Matrix::column(x));
    const Vector h = h_mat.col(0);
    std::span<const double> task_emb;
    if (c.uses_task_embedding()) task_emb = embeddings.updated_task.at(task);

    const std::size_t k = c.num_classes;
    if (!c.uses_class_embedding()) {
        // Every candidate concatenation is identical, so one pass decides.
        const Vector prob = softmax_vector(head_forward(model.params.heads[task], augment(h, task_emb, {})));
        int best = 0;
        for (std::size_t l = 1; l < k; ++l)
            if (prob[l] > prob[best]) best = static_cast<int>(l);
        return best;
    }
    int best = 0;
    double best_prob = -1.0;
    for (std::size_t l = 0; l < k; ++l) {
        const Vector& class_emb = embeddings.updated_class.at(task * k + l);
        const Vector prob = softmax_vector(head_forward(model.params.heads[task], augment(h, task_emb, class_emb)));
        if (prob[l] > best_prob) {
            best_prob = prob[l];
            best = static_cast<int>(l);
        }
    }
    return best;
}

double predict_regression(const HgnnModel& model, const EmbeddingSet& embeddings,
                          std::span<const double> x, std::size_t task) {
    const ModelConfig& c = model.config;
    if (c.mode != Mode::regression) throw UsageError("predict_regression: model is in classification mode");
    if (task >= c.num_tasks) throw UsageError("predict_regression: task index out of range");
    const Vector h = shared_transform(model.params.shared, c.shared_activation, Matrix::column(x)).col(0);
    std::span<const double> task_emb;
    if (c.uses_task_embedding()) task_emb = embeddings.updated_task.at(task);
    return head_forward(model.params.heads[task], augment(h, task_emb, {}))[0];
}

}  // namespace hgnn
