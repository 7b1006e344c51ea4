#include "hgnn/layers.hpp"

#include <algorithm>
#include <cmath>

namespace hgnn {

const char* to_string(Activation act) {
    return act == Activation::relu ? "relu" : "identity";
}

Activation parse_activation(const std::string& text) {
    if (text == "relu") return Activation::relu;
    if (text == "identity" || text == "linear") return Activation::identity;
    throw UsageError("unknown activation '" + text + "'");
}

Matrix activate(const Matrix& pre, Activation act) {
    return act == Activation::relu ? relu(pre) : pre;
}

Matrix activation_backward(const Matrix& pre, const Matrix& grad_out, Activation act) {
    if (pre.rows() != grad_out.rows() || pre.cols() != grad_out.cols()) {
        throw ShapeError("activation_backward: " + pre.shape_str() + " vs " + grad_out.shape_str());
    }
    if (act == Activation::identity) return grad_out;
    Matrix g = grad_out;
    auto gv = g.values();
    auto pv = pre.values();
    for (std::size_t i = 0; i < gv.size(); ++i)
        if (!(pv[i] > 0.0)) gv[i] = 0.0;
    return g;
}

LinearParams zeros_like(const LinearParams& p) {
    return {Matrix(p.weight.rows(), p.weight.cols()), Vector(p.bias.size(), 0.0)};
}

namespace {

Matrix affine(const LinearParams& params, const Matrix& inputs) {
    Matrix z = matmul(params.weight, inputs);
    add_column_bias(z, params.bias);
    return z;
}

void accumulate_linear_grad(const Matrix& grad_pre, const Matrix& inputs, LinearParams& grad) {
    add_inplace(grad.weight, matmul_nt(grad_pre, inputs));
    const Vector db = row_sums(grad_pre);
    for (std::size_t r = 0; r < db.size(); ++r) grad.bias[r] += db[r];
}

}  // namespace

SharedTransformCache shared_transform_forward(const LinearParams& params, Activation act,
                                              const Matrix& inputs) {
    SharedTransformCache cache{affine(params, inputs), Matrix()};
    cache.out = activate(cache.pre, act);
    return cache;
}

Matrix shared_transform(const LinearParams& params, Activation act, const Matrix& inputs) {
    return shared_transform_forward(params, act, inputs).out;
}

void shared_transform_backward(const LinearParams&, Activation act, const Matrix& inputs,
                               const SharedTransformCache& cache, const Matrix& grad_out,
                               LinearParams& grad) {
    accumulate_linear_grad(activation_backward(cache.pre, grad_out, act), inputs, grad);
}

IntraGnnCache intra_task_gnn_forward(std::span<const LinearParams> layers, Activation act,
                                     const Matrix& inputs, const Matrix& hidden,
                                     const Matrix& adjacency) {
    if (layers.empty()) throw UsageError("intra_task_gnn: at least one layer required");
    if (adjacency.rows() != hidden.cols() || adjacency.cols() != hidden.cols() ||
        inputs.cols() != hidden.cols()) {
        throw ShapeError("intra_task_gnn: inputs " + inputs.shape_str() + ", hidden " +
                         hidden.shape_str() + ", adjacency " + adjacency.shape_str());
    }
    IntraGnnCache cache;
    const Matrix* prev = &hidden;
    for (const auto& layer : layers) {
        Matrix z = affine(layer, inputs);
        add_inplace(z, matmul(*prev, adjacency));
        cache.out.push_back(activate(z, act));
        cache.pre.push_back(std::move(z));
        prev = &cache.out.back();
    }
    return cache;
}

Matrix intra_task_gnn(std::span<const LinearParams> layers, Activation act, const Matrix& inputs,
                      const Matrix& hidden, const Matrix& adjacency) {
    return intra_task_gnn_forward(layers, act, inputs, hidden, adjacency).out.back();
}

Matrix intra_task_gnn_backward(std::span<const LinearParams> layers, Activation act,
                               const Matrix& inputs, const Matrix&, const Matrix& adjacency,
                               const IntraGnnCache& cache, const Matrix& grad_out,
                               std::span<LinearParams> grads) {
    if (grads.size() != layers.size()) throw ShapeError("intra_task_gnn_backward: grad count");
    Matrix grad = grad_out;
    for (std::size_t l = layers.size(); l-- > 0;) {
        const Matrix grad_pre = activation_backward(cache.pre[l], grad, act);
        accumulate_linear_grad(grad_pre, inputs, grads[l]);
        grad = matmul_nt(grad_pre, adjacency);  // d(P G)/dP applied: grad_pre * G^T
    }
    return grad;
}

PooledEmbedding pool_task_embedding(const Matrix& h) {
    PooledEmbedding p;
    p.value = colwise_max(h, p.source);
    return p;
}

PooledEmbedding pool_class_embedding(const Matrix& h, std::span<const int> labels, int cls) {
    if (labels.size() != h.cols()) {
        throw ShapeError("pool_class_embedding: " + std::to_string(h.cols()) + " columns, " +
                         std::to_string(labels.size()) + " labels");
    }
    PooledEmbedding p;
    bool found = false;
    for (std::size_t c = 0; c < h.cols(); ++c) {
        if (labels[c] != cls) continue;
        if (!found) {
            p.value = h.col(c);
            p.source.assign(h.rows(), c);
            found = true;
            continue;
        }
        for (std::size_t r = 0; r < h.rows(); ++r) {
            if (h(r, c) > p.value[r]) {
                p.value[r] = h(r, c);
                p.source[r] = c;
            }
        }
    }
    if (!found) {
        throw MissingClassError("class " + std::to_string(cls + 1) + " has no samples to pool");
    }
    return p;
}

void pool_backward(const PooledEmbedding& pooled, std::span<const double> grad, Matrix& grad_h) {
    if (grad.size() != pooled.source.size() || grad_h.rows() != grad.size()) {
        throw ShapeError("pool_backward: gradient length mismatch");
    }
    for (std::size_t r = 0; r < grad.size(); ++r) grad_h(r, pooled.source[r]) += grad[r];
}

AttentionLayerCache cosine_attention_forward(const Matrix& weight, Activation act,
                                             const Matrix& nodes) {
    AttentionLayerCache c;
    c.input = nodes;
    c.transformed = matmul(weight, nodes);
    const std::size_t n = nodes.cols();
    const std::size_t f = c.transformed.rows();
    c.norms.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t r = 0; r < f; ++r) s += c.transformed(r, i) * c.transformed(r, i);
        c.norms[i] = std::sqrt(s);
    }
    c.scores = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        if (c.norms[i] < kZeroNormGuard) continue;
        c.scores(i, i) = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            if (c.norms[j] < kZeroNormGuard) continue;
            double s = 0.0;
            for (std::size_t r = 0; r < f; ++r) s += c.transformed(r, i) * c.transformed(r, j);
            const double cosine = std::clamp(s / (c.norms[i] * c.norms[j]), -1.0, 1.0);
            c.scores(i, j) = cosine;
            c.scores(j, i) = cosine;
        }
    }
    c.attention = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        std::span<const double> row(c.scores.data() + i * n, n);
        const Vector a = softmax_vector(row);
        std::copy(a.begin(), a.end(), c.attention.data() + i * n);
    }
    // Column i of pre is sum_j alpha_ij * transformed_j.
    c.pre = matmul_nt(c.transformed, c.attention);
    c.out = activate(c.pre, act);
    return c;
}

Matrix cosine_attention_backward(const Matrix& weight, Activation act,
                                 const AttentionLayerCache& c, const Matrix& grad_out,
                                 Matrix& grad_weight) {
    const std::size_t n = c.input.cols();
    const std::size_t f = c.transformed.rows();
    const Matrix grad_pre = activation_backward(c.pre, grad_out, act);

    Matrix grad_u = matmul(grad_pre, c.attention);
    const Matrix grad_alpha = matmul_tn(grad_pre, c.transformed);

    // Row-wise softmax backward.
    Matrix grad_scores(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        double inner = 0.0;
        for (std::size_t k = 0; k < n; ++k) inner += c.attention(i, k) * grad_alpha(i, k);
        for (std::size_t j = 0; j < n; ++j) {
            grad_scores(i, j) = c.attention(i, j) * (grad_alpha(i, j) - inner);
        }
    }

    // Off-diagonal cosines between non-degenerate vectors carry gradient; the
    // diagonal is the constant 1 and guarded entries are the constant 0.
    Matrix unit(f, n);
    for (std::size_t i = 0; i < n; ++i) {
        if (c.norms[i] < kZeroNormGuard) continue;
        for (std::size_t r = 0; r < f; ++r) unit(r, i) = c.transformed(r, i) / c.norms[i];
    }
    Matrix grad_unit(f, n);
    for (std::size_t i = 0; i < n; ++i) {
        if (c.norms[i] < kZeroNormGuard) continue;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i || c.norms[j] < kZeroNormGuard) continue;
            const double g = grad_scores(i, j) + grad_scores(j, i);
            for (std::size_t r = 0; r < f; ++r) grad_unit(r, i) += g * unit(r, j);
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (c.norms[i] < kZeroNormGuard) continue;
        double radial = 0.0;
        for (std::size_t r = 0; r < f; ++r) radial += unit(r, i) * grad_unit(r, i);
        for (std::size_t r = 0; r < f; ++r) {
            grad_u(r, i) += (grad_unit(r, i) - unit(r, i) * radial) / c.norms[i];
        }
    }

    add_inplace(grad_weight, matmul_nt(grad_u, c.input));
    return matmul_tn(weight, grad_u);
}

AttentionResult cosine_attention_layer(const Matrix& weight, Activation act, const Matrix& nodes) {
    auto cache = cosine_attention_forward(weight, act, nodes);
    return {std::move(cache.out), std::move(cache.attention)};
}

GatParams zeros_like(const GatParams& p) {
    return {Matrix(p.first.rows(), p.first.cols()), Matrix(p.second.rows(), p.second.cols())};
}

GatCache gat_forward(const GatParams& params, Activation act, const Matrix& nodes) {
    GatCache cache;
    cache.first = cosine_attention_forward(params.first, act, nodes);
    cache.second = cosine_attention_forward(params.second, act, cache.first.out);
    return cache;
}

Matrix gat_backward(const GatParams& params, Activation act, const GatCache& cache,
                    const Matrix& grad_out, GatParams& grads) {
    const Matrix mid = cosine_attention_backward(params.second, act, cache.second, grad_out, grads.second);
    return cosine_attention_backward(params.first, act, cache.first, mid, grads.first);
}

namespace {

std::vector<Vector> columns_of(const Matrix& m) {
    std::vector<Vector> out;
    out.reserve(m.cols());
    for (std::size_t c = 0; c < m.cols(); ++c) out.push_back(m.col(c));
    return out;
}

}  // namespace

EmbeddingUpdate inter_task_update(const GatParams& params, Activation act,
                                  const std::vector<Vector>& raw_task) {
    if (raw_task.empty()) throw UsageError("inter_task_update: no task embeddings");
    const GatCache cache = gat_forward(params, act, Matrix::from_columns(raw_task));
    return {columns_of(cache.second.out), cache.second.attention};
}

EmbeddingUpdate inter_class_update(const GatParams& params, Activation act,
                                   const std::vector<Vector>& raw_class, std::size_t num_tasks,
                                   std::size_t num_classes) {
    if (raw_class.size() != num_tasks * num_classes || raw_class.empty()) {
        throw ShapeError("inter_class_update: expected " + std::to_string(num_tasks * num_classes) +
                         " class embeddings, got " + std::to_string(raw_class.size()));
    }
    const GatCache cache = gat_forward(params, act, Matrix::from_columns(raw_class));
    return {columns_of(cache.second.out), cache.second.attention};
}

Vector augment(std::span<const double> hidden, std::span<const double> task_embedding,
               std::span<const double> class_embedding) {
    return concat({hidden, task_embedding, class_embedding});
}

}  // namespace hgnn
