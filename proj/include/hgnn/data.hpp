#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hgnn/matrix.hpp"

namespace hgnn {

enum class Mode { classification, regression };

const char* to_string(Mode mode);
Mode parse_mode(const std::string& text);  // "cls" | "reg"

/// Malformed input file. The message carries the 1-based line number.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One task's samples. Features are stored column-per-sample (p x n).
/// Classification labels are 0-based class indices internally; files use
/// 1-based labels.
struct TaskDataset {
    int task_id = 1;
    Matrix features;
    std::vector<int> labels;  // classification only
    Vector targets;           // regression only

    std::size_t size() const { return features.cols(); }
};

struct MultiTaskDataset {
    Mode mode = Mode::classification;
    std::size_t num_classes = 0;  // k; 0 in regression mode
    std::size_t feature_dim = 0;  // p
    std::vector<TaskDataset> tasks;

    std::size_t num_tasks() const { return tasks.size(); }
    std::size_t total_samples() const;
    /// Throws UsageError when any invariant (shared p, labels in range,
    /// task ids 1..m, finite features) is broken.
    void validate() const;
};

struct SyntheticSpec {
    std::size_t num_tasks = 4;
    std::size_t num_classes = 3;
    std::size_t feature_dim = 16;
    std::size_t samples_per_class = 30;
    double rotation_angle = 0.2;  // radians per task
    double cluster_spread = 0.5;  // per-coordinate noise std
    std::uint64_t seed = 1;

    bool operator==(const SyntheticSpec&) const = default;
};

/// Rotated-template Gaussian clusters: class means are shared across tasks
/// up to a rotation of the first two coordinates by (t-1)*angle for task t.
MultiTaskDataset generate_synthetic_mtl(const SyntheticSpec& spec);

/// Regression counterpart: y = <w_t, x> + noise where w_t is a shared weight
/// template rotated per task like the classification generator.
MultiTaskDataset generate_synthetic_regression(const SyntheticSpec& spec);

/// Reads `task_id,label,f1,...,fp`. In classification mode k is taken from
/// `num_classes` when given (labels above it are errors), otherwise from the
/// largest label present.
MultiTaskDataset load_csv_dataset(const std::string& path, Mode mode,
                                  std::optional<std::size_t> num_classes = std::nullopt);
MultiTaskDataset read_csv_dataset(std::istream& in, Mode mode,
                                  std::optional<std::size_t> num_classes = std::nullopt);
void write_csv_dataset(std::ostream& out, const MultiTaskDataset& ds);

struct SplitSpec {
    double train_proportion = 0.7;
    std::uint64_t seed = 1;
};

struct SplitResult {
    MultiTaskDataset train;
    MultiTaskDataset test;
};

/// Stratified per task and per class. Each stratum is ordered by sample
/// content before the seeded shuffle, so the outcome does not depend on the
/// input order.
SplitResult split(const MultiTaskDataset& ds, const SplitSpec& spec);

struct StandardizeStats {
    Vector mean;
    Vector stddev;  // 0 marks a zero-variance feature
};

struct StandardizeResult {
    MultiTaskDataset train;
    MultiTaskDataset test;
    StandardizeStats stats;
};

/// Pooled (all tasks) per-feature z-scoring fit on `train` only.
StandardizeResult standardize(const MultiTaskDataset& train, const MultiTaskDataset& test);
StandardizeStats fit_standardization(const MultiTaskDataset& train);
MultiTaskDataset apply_standardization(const MultiTaskDataset& ds, const StandardizeStats& stats);

/// Copy of `task` restricted to the given sample columns, in that order.
TaskDataset select_samples(const TaskDataset& task, std::span<const std::size_t> indices);

}  // namespace hgnn
