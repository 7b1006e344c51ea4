#pragma once

// Building blocks of the hierarchical feature augmentation: the shared
// transform, the intra-task graph layer, max pooling into task/class
// embeddings, and the two-layer cosine-attention network that updates them.
//
// Each block has a forward function returning a cache and a backward
// function that consumes it. Backward functions accumulate (+=) into the
// supplied gradient objects.

#include <span>
#include <string>
#include <vector>

#include "hgnn/matrix.hpp"

namespace hgnn {

enum class Activation { relu, identity };

const char* to_string(Activation act);
Activation parse_activation(const std::string& text);

Matrix activate(const Matrix& pre, Activation act);
/// Gradient w.r.t. the pre-activation. ReLU's subgradient at 0 is 0.
Matrix activation_backward(const Matrix& pre, const Matrix& grad_out, Activation act);

/// Affine map `weight * x + bias` applied column-wise.
struct LinearParams {
    Matrix weight;
    Vector bias;
};

LinearParams zeros_like(const LinearParams& p);

// ---- shared transform: h = act(W_s x + b_s) -----------------------------------

struct SharedTransformCache {
    Matrix pre;
    Matrix out;
};

SharedTransformCache shared_transform_forward(const LinearParams& params, Activation act,
                                              const Matrix& inputs);
Matrix shared_transform(const LinearParams& params, Activation act, const Matrix& inputs);
void shared_transform_backward(const LinearParams& params, Activation act, const Matrix& inputs,
                               const SharedTransformCache& cache, const Matrix& grad_out,
                               LinearParams& grad);

// ---- intra-task graph layer ----------------------------------------------------
//
// Layer l computes act(W_l X + P_{l-1} G + b_l 1^T) where P_0 is the shared
// hidden representation and P_{l-1} is the previous layer's output for l > 1.
// Every layer reads the raw inputs X in its skip term.

struct IntraGnnCache {
    std::vector<Matrix> pre;
    std::vector<Matrix> out;
};

IntraGnnCache intra_task_gnn_forward(std::span<const LinearParams> layers, Activation act,
                                     const Matrix& inputs, const Matrix& hidden,
                                     const Matrix& adjacency);
Matrix intra_task_gnn(std::span<const LinearParams> layers, Activation act, const Matrix& inputs,
                      const Matrix& hidden, const Matrix& adjacency);
/// Returns the gradient w.r.t. `hidden`; the adjacency receives none.
Matrix intra_task_gnn_backward(std::span<const LinearParams> layers, Activation act,
                               const Matrix& inputs, const Matrix& hidden, const Matrix& adjacency,
                               const IntraGnnCache& cache, const Matrix& grad_out,
                               std::span<LinearParams> grads);

// ---- max pooling ---------------------------------------------------------------

class MissingClassError : public UsageError {
public:
    using UsageError::UsageError;
};

struct PooledEmbedding {
    Vector value;
    /// Column of the pooled matrix that supplied each entry (first on ties).
    std::vector<std::size_t> source;
};

PooledEmbedding pool_task_embedding(const Matrix& h);
/// Max over the columns whose label equals `cls`; MissingClassError if none.
PooledEmbedding pool_class_embedding(const Matrix& h, std::span<const int> labels, int cls);
/// Scatters `grad` back onto the winning columns of an (rows x cols) matrix.
void pool_backward(const PooledEmbedding& pooled, std::span<const double> grad, Matrix& grad_h);

// ---- cosine attention ----------------------------------------------------------

/// Transformed vectors with norm below this have all their scores set to 0.
inline constexpr double kZeroNormGuard = 1e-12;

struct AttentionLayerCache {
    Matrix input;        // in_dim x N, one node per column
    Matrix transformed;  // W * input
    Vector norms;
    Matrix scores;       // cosine d_ij
    Matrix attention;    // row-softmax of scores
    Matrix pre;          // sum_j alpha_ij W e_j, column i
    Matrix out;
};

AttentionLayerCache cosine_attention_forward(const Matrix& weight, Activation act,
                                             const Matrix& nodes);
/// Returns the gradient w.r.t. the input nodes.
Matrix cosine_attention_backward(const Matrix& weight, Activation act,
                                 const AttentionLayerCache& cache, const Matrix& grad_out,
                                 Matrix& grad_weight);

struct AttentionResult {
    Matrix nodes;
    Matrix attention;
};

AttentionResult cosine_attention_layer(const Matrix& weight, Activation act, const Matrix& nodes);

/// Two stacked attention layers (in_dim -> F' -> F').
struct GatParams {
    Matrix first;
    Matrix second;
};

GatParams zeros_like(const GatParams& p);

struct GatCache {
    AttentionLayerCache first;
    AttentionLayerCache second;
};

GatCache gat_forward(const GatParams& params, Activation act, const Matrix& nodes);
Matrix gat_backward(const GatParams& params, Activation act, const GatCache& cache,
                    const Matrix& grad_out, GatParams& grads);

/// Updated embeddings plus the second layer's attention matrix.
struct EmbeddingUpdate {
    std::vector<Vector> updated;
    Matrix attention;
};

EmbeddingUpdate inter_task_update(const GatParams& params, Activation act,
                                  const std::vector<Vector>& raw_task);
/// `raw_class` is task-major: index i*k + j holds class j of task i.
EmbeddingUpdate inter_class_update(const GatParams& params, Activation act,
                                   const std::vector<Vector>& raw_class, std::size_t num_tasks,
                                   std::size_t num_classes);

/// (h, task embedding, class embedding) concatenated in that order. Either
/// embedding may be empty when the variant does not use it.
Vector augment(std::span<const double> hidden, std::span<const double> task_embedding,
               std::span<const double> class_embedding);

}  // namespace hgnn
