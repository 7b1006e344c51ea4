#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "hgnn/data.hpp"
#include "hgnn/model.hpp"
#include "hgnn/training.hpp"

namespace hgnn {

/// Everything a CLI command needs. Mirrored by a JSON file; command-line
/// flags override file values.
struct RunConfig {
    std::string command = "train";

    bool use_csv = false;
    std::string csv_path;
    std::size_t csv_classes = 0;  // 0: infer from the largest label
    SyntheticSpec synthetic;
    Mode mode = Mode::classification;

    Variant variant = Variant::full;
    std::size_t hidden_dim = 64;
    std::size_t task_embed_dim = 8;
    std::size_t class_embed_dim = 8;
    std::size_t intra_layers = 1;

    std::size_t epochs = 200;
    std::size_t batch_size = 32;  // 0 = full batch
    PoolingMode pooling = PoolingMode::full_set;
    ScheduleUnit schedule = ScheduleUnit::epoch;
    std::size_t patience = 25;
    std::size_t num_seeds = 5;
    std::uint64_t first_seed = 1;
    double train_proportion = 0.7;
    double validation_fraction = 0.2;

    std::string out_dir = "runs";
    std::string checkpoint;   // eval, export-embeddings
    std::string output_file;  // generate; empty writes to stdout

    std::string sweep_axis = "proportion";  // ft | fc | proportion
    std::vector<double> sweep_values{0.5, 0.6, 0.7};

    std::size_t theory_instances = 1000;
    int theory_max_dim = 8;
    std::vector<double> theory_lambdas{0.1, 1.0, 10.0};
    double theory_delta = 0.05;
    std::uint64_t theory_seed = 42;

    /// Throws UsageError naming the offending flag.
    void validate() const;
    std::vector<std::uint64_t> seeds() const;
    ModelConfig model_config() const;  // data-dependent dims left at 0
    TrainConfig train_config() const;
    ExperimentSpec experiment() const;

    bool operator==(const RunConfig&) const = default;
};

nlohmann::json to_json(const RunConfig& config);
/// Missing keys keep their current values in `base`.
RunConfig run_config_from_json(const nlohmann::json& j, RunConfig base = {});

nlohmann::json to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);

/// 16 hex digits (FNV-1a 64 of the canonical JSON, output dir excluded).
std::string config_hash(const RunConfig& config);

}  // namespace hgnn
