#include "hgnn/config.hpp"

#include <cstdio>

namespace hgnn {

namespace {

const char* pooling_name(PoolingMode p) { return p == PoolingMode::full_set ? "full" : "batch"; }

PoolingMode parse_pooling(const std::string& s) {
    if (s == "full") return PoolingMode::full_set;
    if (s == "batch") return PoolingMode::in_batch;
    throw UsageError("--pool: expected full or batch, got '" + s + "'");
}

const char* schedule_name(ScheduleUnit u) { return u == ScheduleUnit::epoch ? "epoch" : "step"; }

ScheduleUnit parse_schedule(const std::string& s) {
    if (s == "epoch") return ScheduleUnit::epoch;
    if (s == "step") return ScheduleUnit::step;
    throw UsageError("--lr-schedule: expected epoch or step, got '" + s + "'");
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& into) {
    if (j.contains(key)) into = j.at(key).get<T>();
}

}  // namespace

void RunConfig::validate() const {
    if (!(train_proportion > 0.0 && train_proportion < 1.0)) {
        throw UsageError("--proportion must lie strictly between 0 and 1, got " +
                         std::to_string(train_proportion));
    }
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
        throw UsageError("--val-fraction must lie in [0,1), got " + std::to_string(validation_fraction));
    }
    if (hidden_dim == 0) throw UsageError("--dh must be positive");
    if (task_embed_dim == 0) throw UsageError("--ft must be positive");
    if (class_embed_dim == 0) throw UsageError("--fc must be positive");
    if (intra_layers == 0) throw UsageError("--layers must be positive");
    if (num_seeds == 0) throw UsageError("--seeds must be positive");
    if (use_csv && csv_path.empty()) throw UsageError("--csv needs a path");
    if (sweep_axis != "ft" && sweep_axis != "fc" && sweep_axis != "proportion") {
        throw UsageError("--axis: expected ft, fc or proportion, got '" + sweep_axis + "'");
    }
    if (sweep_values.empty()) throw UsageError("--values must not be empty");
    for (double v : sweep_values) {
        if (sweep_axis == "proportion" && !(v > 0.0 && v < 1.0)) {
            throw UsageError("--values: proportions must lie strictly between 0 and 1");
        }
        if (sweep_axis != "proportion" && !(v >= 1.0 && v == static_cast<double>(static_cast<std::size_t>(v)))) {
            throw UsageError("--values: embedding dimensions must be positive integers");
        }
    }
    if (theory_instances == 0) throw UsageError("--instances must be at least 1");
    if (theory_max_dim < 1) throw UsageError("--max-dim must be at least 1");
    if (theory_lambdas.empty()) throw UsageError("--lambdas must not be empty");
    for (double l : theory_lambdas) {
        if (!(l > 0.0)) throw UsageError("--lambdas: every lambda must be positive");
    }
    if (!(theory_delta > 0.0 && theory_delta < 1.0)) {
        throw UsageError("--delta must lie strictly between 0 and 1");
    }
    if (mode == Mode::regression && variant == Variant::class_only) {
        throw UsageError("--variant c is unavailable in regression mode (no class embeddings)");
    }
}

std::vector<std::uint64_t> RunConfig::seeds() const {
    std::vector<std::uint64_t> out;
    for (std::size_t i = 0; i < num_seeds; ++i) out.push_back(first_seed + i);
    return out;
}

ModelConfig RunConfig::model_config() const {
    ModelConfig c;
    c.mode = mode;
    c.variant = variant;
    c.hidden_dim = hidden_dim;
    c.task_embed_dim = task_embed_dim;
    c.class_embed_dim = class_embed_dim;
    c.intra_layers = intra_layers;
    return c;
}

TrainConfig RunConfig::train_config() const {
    TrainConfig t;
    t.epochs = epochs;
    t.batch_size = batch_size;
    t.pooling = pooling;
    t.patience = patience;
    t.adam.schedule = schedule;
    return t;
}

ExperimentSpec RunConfig::experiment() const {
    ExperimentSpec e;
    e.model = model_config();
    e.train = train_config();
    e.train_proportion = train_proportion;
    e.validation_fraction = validation_fraction;
    e.seeds = seeds();
    return e;
}

nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json j;
    j["command"] = c.command;
    j["data"] = {
        {"source", c.use_csv ? "csv" : "synthetic"},
        {"csv", c.csv_path},
        {"classes", c.csv_classes},
        {"mode", to_string(c.mode)},
        {"m", c.synthetic.num_tasks},
        {"k", c.synthetic.num_classes},
        {"p", c.synthetic.feature_dim},
        {"n", c.synthetic.samples_per_class},
        {"angle", c.synthetic.rotation_angle},
        {"spread", c.synthetic.cluster_spread},
        {"seed", c.synthetic.seed},
    };
    j["model"] = {
        {"variant", to_string(c.variant)},
        {"dh", c.hidden_dim},
        {"ft", c.task_embed_dim},
        {"fc", c.class_embed_dim},
        {"layers", c.intra_layers},
    };
    j["training"] = {
        {"epochs", c.epochs},
        {"batch", c.batch_size == 0 ? nlohmann::json("full") : nlohmann::json(c.batch_size)},
        {"pool", pooling_name(c.pooling)},
        {"lr_schedule", schedule_name(c.schedule)},
        {"patience", c.patience},
        {"seeds", c.num_seeds},
        {"first_seed", c.first_seed},
        {"proportion", c.train_proportion},
        {"val_fraction", c.validation_fraction},
    };
    j["sweep"] = {{"axis", c.sweep_axis}, {"values", c.sweep_values}};
    j["theory"] = {
        {"instances", c.theory_instances},
        {"max_dim", c.theory_max_dim},
        {"lambdas", c.theory_lambdas},
        {"delta", c.theory_delta},
        {"seed", c.theory_seed},
    };
    j["checkpoint"] = c.checkpoint;
    j["output"] = c.output_file;
    j["out"] = c.out_dir;
    return j;
}

RunConfig run_config_from_json(const nlohmann::json& j, RunConfig c) {
    try {
        read(j, "command", c.command);
        read(j, "out", c.out_dir);
        read(j, "checkpoint", c.checkpoint);
        read(j, "output", c.output_file);
        if (j.contains("sweep")) {
            read(j.at("sweep"), "axis", c.sweep_axis);
            read(j.at("sweep"), "values", c.sweep_values);
        }
        if (j.contains("theory")) {
            const auto& t = j.at("theory");
            read(t, "instances", c.theory_instances);
            read(t, "max_dim", c.theory_max_dim);
            read(t, "lambdas", c.theory_lambdas);
            read(t, "delta", c.theory_delta);
            read(t, "seed", c.theory_seed);
        }
        if (j.contains("data")) {
            const auto& d = j.at("data");
            if (d.contains("source")) c.use_csv = d.at("source").get<std::string>() == "csv";
            read(d, "csv", c.csv_path);
            read(d, "classes", c.csv_classes);
            if (d.contains("mode")) c.mode = parse_mode(d.at("mode").get<std::string>());
            read(d, "m", c.synthetic.num_tasks);
            read(d, "k", c.synthetic.num_classes);
            read(d, "p", c.synthetic.feature_dim);
            read(d, "n", c.synthetic.samples_per_class);
            read(d, "angle", c.synthetic.rotation_angle);
            read(d, "spread", c.synthetic.cluster_spread);
            read(d, "seed", c.synthetic.seed);
        }
        if (j.contains("model")) {
            const auto& m = j.at("model");
            if (m.contains("variant")) c.variant = parse_variant(m.at("variant").get<std::string>());
            read(m, "dh", c.hidden_dim);
            read(m, "ft", c.task_embed_dim);
            read(m, "fc", c.class_embed_dim);
            read(m, "layers", c.intra_layers);
        }
        if (j.contains("training")) {
            const auto& t = j.at("training");
            read(t, "epochs", c.epochs);
            if (t.contains("batch")) {
                const auto& b = t.at("batch");
                c.batch_size = b.is_string() && b.get<std::string>() == "full" ? 0 : b.get<std::size_t>();
            }
            if (t.contains("pool")) c.pooling = parse_pooling(t.at("pool").get<std::string>());
            if (t.contains("lr_schedule")) c.schedule = parse_schedule(t.at("lr_schedule").get<std::string>());
            read(t, "patience", c.patience);
            read(t, "seeds", c.num_seeds);
            read(t, "first_seed", c.first_seed);
            read(t, "proportion", c.train_proportion);
            read(t, "val_fraction", c.validation_fraction);
        }
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("config file: ") + e.what());
    }
    return c;
}

nlohmann::json to_json(const ModelConfig& c) {
    return {
        {"mode", to_string(c.mode)},
        {"variant", to_string(c.variant)},
        {"input_dim", c.input_dim},
        {"hidden_dim", c.hidden_dim},
        {"task_embed_dim", c.task_embed_dim},
        {"class_embed_dim", c.class_embed_dim},
        {"intra_layers", c.intra_layers},
        {"num_tasks", c.num_tasks},
        {"num_classes", c.num_classes},
        {"shared_activation", to_string(c.shared_activation)},
        {"intra_activation", to_string(c.intra_activation)},
        {"attention_activation", to_string(c.attention_activation)},
        {"normalize_adjacency", c.normalize_adjacency},
    };
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
    ModelConfig c;
    try {
        c.mode = parse_mode(j.at("mode").get<std::string>());
        c.variant = parse_variant(j.at("variant").get<std::string>());
        c.input_dim = j.at("input_dim").get<std::size_t>();
        c.hidden_dim = j.at("hidden_dim").get<std::size_t>();
        c.task_embed_dim = j.at("task_embed_dim").get<std::size_t>();
        c.class_embed_dim = j.at("class_embed_dim").get<std::size_t>();
        c.intra_layers = j.at("intra_layers").get<std::size_t>();
        c.num_tasks = j.at("num_tasks").get<std::size_t>();
        c.num_classes = j.at("num_classes").get<std::size_t>();
        c.shared_activation = parse_activation(j.at("shared_activation").get<std::string>());
        c.intra_activation = parse_activation(j.at("intra_activation").get<std::string>());
        c.attention_activation = parse_activation(j.at("attention_activation").get<std::string>());
        c.normalize_adjacency = j.at("normalize_adjacency").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("model config: ") + e.what());
    }
    c.validate();
    return c;
}

std::string config_hash(const RunConfig& config) {
    nlohmann::json j = to_json(config);
    j.erase("out");
    const std::string canonical = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace hgnn
