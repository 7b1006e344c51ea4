#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hgnn/data.hpp"
#include "hgnn/layers.hpp"
#include "hgnn/matrix.hpp"

namespace hgnn {

/// Which embeddings are concatenated to the shared representation.
enum class Variant { baseline, task_only, class_only, full };

const char* to_string(Variant v);
Variant parse_variant(const std::string& text);  // baseline | t | c | full

struct ModelConfig {
    Mode mode = Mode::classification;
    Variant variant = Variant::full;
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 64;
    std::size_t task_embed_dim = 8;
    std::size_t class_embed_dim = 8;
    std::size_t intra_layers = 1;
    std::size_t num_tasks = 0;
    std::size_t num_classes = 0;  // 0 in regression mode
    Activation shared_activation = Activation::relu;
    Activation intra_activation = Activation::relu;
    Activation attention_activation = Activation::relu;
    bool normalize_adjacency = false;

    bool uses_task_embedding() const;
    /// Never true in regression mode.
    bool uses_class_embedding() const;
    bool uses_graph() const { return uses_task_embedding() || uses_class_embedding(); }
    std::size_t head_input_dim() const;
    std::size_t output_dim() const;
    void validate() const;

    bool operator==(const ModelConfig&) const = default;
};

/// All learnable parameters. Also used as the gradient container.
struct HgnnParams {
    LinearParams shared;
    std::vector<std::vector<LinearParams>> intra;  // [task][layer]
    GatParams gat_task;
    GatParams gat_class;
    std::vector<LinearParams> heads;
};

HgnnParams zeros_like(const HgnnParams& p);

struct HgnnModel {
    ModelConfig config;
    HgnnParams params;
    /// Bumped on every parameter update; lets backward reject stale caches.
    std::uint64_t version = 0;
};

/// Glorot-uniform weights (s = sqrt(6 / (fan_in + fan_out))), zero biases.
HgnnModel make_model(const ModelConfig& config, std::uint64_t seed);

struct ParamView {
    std::string name;
    std::span<double> values;
    std::size_t rows;
    std::size_t cols;  // 1 for biases
    bool active;       // false when the variant/mode never reads it
};

struct ConstParamView {
    std::string name;
    std::span<const double> values;
    std::size_t rows;
    std::size_t cols;
    bool active;
};

/// Fixed, documented order: shared, intra, gat_task, gat_class, heads.
std::vector<ParamView> parameter_views(HgnnParams& params, const ModelConfig& config);
std::vector<ConstParamView> parameter_views(const HgnnParams& params, const ModelConfig& config);

struct EmbeddingSet {
    std::vector<Vector> raw_task;       // m x d_h
    std::vector<Vector> updated_task;   // m x F'_t
    std::vector<Vector> raw_class;      // m*k x d_h, task-major
    std::vector<Vector> updated_class;  // m*k x F'_c
    std::optional<Matrix> task_attention;   // m x m
    std::optional<Matrix> class_attention;  // mk x mk

    const Vector* task(std::size_t i) const;
    const Vector* cls(std::size_t i, std::size_t j, std::size_t k) const;
};

struct TaskCache {
    Matrix pool_inputs;
    std::vector<int> pool_labels;
    SharedTransformCache pool_shared;
    Matrix adjacency;
    IntraGnnCache intra;
    PooledEmbedding task_pool;
    /// nullopt for a class that was absent and took its fallback embedding.
    std::vector<std::optional<PooledEmbedding>> class_pool;

    Matrix batch_inputs;
    std::vector<int> batch_labels;
    SharedTransformCache batch_shared;
    Matrix augmented;  // head_input_dim x n_batch
    Matrix outputs;    // output_dim x n_batch
};

struct ForwardCache {
    std::uint64_t model_version = 0;
    bool has_batch = false;
    std::vector<TaskCache> tasks;
    std::optional<GatCache> task_gat;
    std::optional<GatCache> class_gat;
    EmbeddingSet embeddings;

    std::vector<Matrix> outputs() const;
};

struct ForwardOptions {
    /// Per-task adjacency to use instead of rebuilding it (gradient checks).
    const std::vector<Matrix>* frozen_adjacency = nullptr;
    /// Task-major raw class embeddings substituted for classes missing from
    /// the pooling set (mini-batch pooling). Without it a missing class is an
    /// error.
    const std::vector<Vector>* class_fallback = nullptr;
};

/// Full pipeline. `pool` supplies the samples that build the graphs and the
/// pooled embeddings; `batch` supplies the samples that are scored. Training
/// samples take the class embedding of their true label.
ForwardCache forward(const HgnnModel& model, const MultiTaskDataset& pool,
                     const MultiTaskDataset& batch, const ForwardOptions& options = {});

/// Embeddings only (no scoring pass).
ForwardCache forward_embeddings(const HgnnModel& model, const MultiTaskDataset& pool,
                                const ForwardOptions& options = {});

EmbeddingSet compute_embeddings(const HgnnModel& model, const MultiTaskDataset& pool);

struct LossResult {
    double value = 0.0;
    std::vector<Matrix> grad_outputs;  // same shapes as the forward outputs
};

/// -log softmax(logits)[label] for one sample.
double softmax_cross_entropy(std::span<const double> logits, int label);

/// Mean cross-entropy per task, summed over tasks.
LossResult classification_loss(const std::vector<Matrix>& logits, const MultiTaskDataset& batch);
/// Mean squared error per task, summed over tasks.
LossResult regression_loss(const std::vector<Matrix>& predictions, const MultiTaskDataset& batch);
LossResult model_loss(const ModelConfig& config, const std::vector<Matrix>& outputs,
                      const MultiTaskDataset& batch);

/// Head i applied to one augmented vector.
Vector head_forward(const LinearParams& head, std::span<const double> augmented);

/// Test-time rule: try every class embedding in the concatenation and keep
/// the class whose own softmax probability is largest (smallest index wins
/// ties). Returns a 0-based class index.
int predict_class(const HgnnModel& model, const EmbeddingSet& embeddings,
                  std::span<const double> x, std::size_t task);
double predict_regression(const HgnnModel& model, const EmbeddingSet& embeddings,
                          std::span<const double> x, std::size_t task);

}  // namespace hgnn
