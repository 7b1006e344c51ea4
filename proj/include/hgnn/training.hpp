#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hgnn/data.hpp"
#include "hgnn/model.hpp"

namespace hgnn {

/// Reverse-mode gradients of the loss whose output gradients are
/// `grad_outputs`, w.r.t. every parameter. Adjacency matrices are constants;
/// max pooling routes to the recorded winner. The cache must come from a
/// forward pass with a scoring batch on the model's current parameters.
HgnnParams backward(const HgnnModel& model, const ForwardCache& cache,
                    const std::vector<Matrix>& grad_outputs);

struct LossAndGradient {
    double loss = 0.0;
    HgnnParams grad;
    ForwardCache cache;
};

LossAndGradient loss_and_gradient(const HgnnModel& model, const MultiTaskDataset& pool,
                                  const MultiTaskDataset& batch, const ForwardOptions& options = {});

// ---- gradient checking ----------------------------------------------------------

struct GradCheckOptions {
    double epsilon = 1e-5;
    double tolerance = 1e-4;
    /// Relative error is |a - n| / max(|a|, |n|, error_floor * max(1, |loss|)).
    /// Central differences carry roundoff near eps_machine * |loss| / epsilon,
    /// so entries far below that scale cannot be compared.
    double error_floor = 1e-6;
    /// Coordinates whose perturbation by this many epsilons flips a ReLU sign
    /// or a max-pool winner are skipped.
    double kink_radius = 10.0;
    /// Test hook applied to the analytic gradient before comparison.
    std::function<void(HgnnParams&)> corrupt;
};

struct GradCheckEntry {
    std::string name;
    double max_rel_error = 0.0;
    std::size_t checked = 0;
    std::size_t skipped = 0;
    bool pass = true;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> entries;  // active parameters only
    bool pass = true;

    std::string failing_names() const;
};

/// Central differences with the adjacency frozen at the base point, so the
/// numeric and analytic gradients differentiate the same function.
GradCheckReport grad_check(const HgnnModel& model, const MultiTaskDataset& data,
                           const GradCheckOptions& options = {});

// ---- optimizer ------------------------------------------------------------------

/// When the schedule counter p advances: after each update or after each
/// epoch.
enum class ScheduleUnit { step, epoch };

struct AdamConfig {
    double base_lr = 0.02;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    ScheduleUnit schedule = ScheduleUnit::epoch;
};

struct OptimizerState {
    AdamConfig config;
    HgnnParams first_moment;
    HgnnParams second_moment;
    std::uint64_t updates = 0;           // Adam bias-correction step t
    std::uint64_t schedule_counter = 0;  // p in lr = base / (1 + p)

    double learning_rate() const;
};

OptimizerState make_optimizer(const HgnnModel& model, const AdamConfig& config = {});

/// One Adam update on a flat parameter block with step index `t` >= 1.
void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> m,
                 std::span<double> v, double lr, std::uint64_t t, const AdamConfig& config);

/// Updates every parameter, increments `updates`, and increments the schedule
/// counter when the schedule unit is `step`.
void adam_step(OptimizerState& state, HgnnModel& model, const HgnnParams& grads);

// ---- training loop ---------------------------------------------------------------

enum class PoolingMode { full_set, in_batch };

struct TrainConfig {
    std::size_t epochs = 200;
    std::size_t batch_size = 32;  // 0: every training sample in each step
    PoolingMode pooling = PoolingMode::full_set;
    std::size_t patience = 25;   // 0 disables early stopping
    std::uint64_t seed = 1;
    AdamConfig adam;
};

struct EpochRecord {
    std::size_t epoch = 0;
    std::size_t step = 0;
    double loss = 0.0;
    std::optional<double> val_metric;
    double lr = 0.0;
};

struct TrainResult {
    HgnnModel model;
    EmbeddingSet embeddings;  // computed on the training set with the returned model
    std::vector<EpochRecord> log;
    bool diverged = false;
    std::size_t best_epoch = 0;
};

/// Deterministic in (model, data, config). With a validation set the returned
/// model is the best one by validation metric.
TrainResult train(const HgnnModel& initial, const MultiTaskDataset& train_set,
                  const MultiTaskDataset* validation, const TrainConfig& config);

/// Accuracy in [0,1] (classification, via the class-sweep prediction rule) or
/// MSE (regression, pooled over all test samples).
double evaluate(const HgnnModel& model, const EmbeddingSet& embeddings, const MultiTaskDataset& test);

/// True when `candidate` is a better metric value than `incumbent` for `mode`.
bool metric_improves(Mode mode, double candidate, double incumbent);

// ---- repeated runs ---------------------------------------------------------------

struct ExperimentSpec {
    ModelConfig model;  // data-dependent dims are filled in from the dataset
    TrainConfig train;
    double train_proportion = 0.7;
    double validation_fraction = 0.2;  // carved from the training split; 0 disables
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
};

struct SeedRun {
    std::uint64_t seed = 0;
    double metric = 0.0;
    double final_train_loss = 0.0;
    std::size_t epochs_run = 0;
    bool diverged = false;
    std::vector<EpochRecord> log;
};

struct RunReport {
    Mode mode = Mode::classification;
    Variant variant = Variant::full;
    std::vector<SeedRun> runs;
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation, 0 for a single run
    double wall_seconds = 0.0;
};

struct ExperimentOutput {
    RunReport report;
    std::vector<TrainResult> results;  // one per seed, same order
    std::vector<StandardizeStats> stats;
};

/// Per seed: stratified split, standardization, optional validation carve,
/// training and test evaluation. Seeds run concurrently.
ExperimentOutput run_experiment(const MultiTaskDataset& data, const ExperimentSpec& spec);

ModelConfig complete_config(ModelConfig config, const MultiTaskDataset& data);

}  // namespace hgnn
