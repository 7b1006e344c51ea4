#include "cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <type_traits>

#include <CLI11.hpp>
#include <json.hpp>

#include "hgnn/checkpoint.hpp"
#include "hgnn/config.hpp"
#include "hgnn/theory.hpp"
#include "hgnn/training.hpp"

namespace hgnn::cli {

namespace {

namespace fs = std::filesystem;

/// Runtime failure that is not a usage problem (exit 1).
class Failure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

const char* metric_name(Mode mode) { return mode == Mode::classification ? "accuracy" : "mse"; }

std::size_t parse_count(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(value, &used);
        if (used != value.size() || v < 0) throw std::invalid_argument(value);
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw UsageError("--synthetic " + key + ": expected a non-negative integer, got '" + value + "'");
    }
}

double parse_real(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw UsageError("--synthetic " + key + ": expected a number, got '" + value + "'");
    }
}

void apply_synthetic(SyntheticSpec& spec, const std::vector<std::string>& tokens) {
    for (const auto& tok : tokens) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw UsageError("--synthetic: expected key=value, got '" + tok + "'");
        const std::string key = tok.substr(0, eq);
        const std::string value = tok.substr(eq + 1);
        if (key == "m") spec.num_tasks = parse_count(key, value);
        else if (key == "k") spec.num_classes = parse_count(key, value);
        else if (key == "p") spec.feature_dim = parse_count(key, value);
        else if (key == "n") spec.samples_per_class = parse_count(key, value);
        else if (key == "angle") spec.rotation_angle = parse_real(key, value);
        else if (key == "spread") spec.cluster_spread = parse_real(key, value);
        else if (key == "seed") spec.seed = parse_count(key, value);
        else throw UsageError("--synthetic: unknown key '" + key + "' (m, k, p, n, angle, spread, seed)");
    }
}

std::size_t parse_batch(const std::string& text) {
    if (text == "full") return 0;
    try {
        std::size_t used = 0;
        const long long v = std::stoll(text, &used);
        if (used == text.size() && v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    throw UsageError("--batch: expected 'full' or a positive integer, got '" + text + "'");
}

MultiTaskDataset load_data(const RunConfig& c) {
    if (c.use_csv) {
        std::optional<std::size_t> classes;
        if (c.csv_classes > 0) classes = c.csv_classes;
        return load_csv_dataset(c.csv_path, c.mode, classes);
    }
    return c.mode == Mode::classification ? generate_synthetic_mtl(c.synthetic)
                                          : generate_synthetic_regression(c.synthetic);
}

fs::path prepare_out_dir(const RunConfig& c, std::ostream& out) {
    const fs::path dir = fs::path(c.out_dir) / config_hash(c);
    fs::create_directories(dir);
    std::ofstream cfg(dir / "config.json", std::ios::binary);
    cfg << to_json(c).dump(2) << '\n';
    out << "output: " << dir.string() << '\n';
    return dir;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Failure("cannot write " + path.string());
    return f;
}

void write_report(std::ostream& f, const RunReport& r, bool header = true) {
    if (header) f << "kind,mode,variant,seed,metric_name,metric,std,train_loss,epochs,diverged\n";
    const char* mode = to_string(r.mode);
    const char* variant = to_string(r.variant);
    for (const auto& run : r.runs) {
        f << "run," << mode << ',' << variant << ',' << run.seed << ',' << metric_name(r.mode) << ','
          << num(run.metric) << ",," << num(run.final_train_loss) << ',' << run.epochs_run << ','
          << (run.diverged ? 1 : 0) << '\n';
    }
    f << "summary," << mode << ',' << variant << ",," << metric_name(r.mode) << ',' << num(r.mean) << ','
      << num(r.stddev) << ",,,\n";
}

void write_log(std::ostream& f, const RunReport& r) {
    f << "seed,epoch,step,loss,val_metric,lr\n";
    for (const auto& run : r.runs) {
        for (const auto& e : run.log) {
            f << run.seed << ',' << e.epoch << ',' << e.step << ',' << num(e.loss) << ','
              << (e.val_metric ? num(*e.val_metric) : std::string()) << ',' << num(e.lr) << '\n';
        }
    }
}

void print_summary(std::ostream& out, const RunReport& r) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-8s %s %.4f +- %.4f over %zu seeds (%.1f s)", to_string(r.variant),
                  metric_name(r.mode), r.mean, r.stddev, r.runs.size(), r.wall_seconds);
    out << buf << '\n';
    for (const auto& run : r.runs) {
        if (run.diverged) out << "  warning: seed " << run.seed << " diverged; best earlier model kept\n";
    }
}

void write_rows(const fs::path& path, const std::string& kind, const std::vector<Vector>& rows,
                std::size_t num_classes, bool per_class) {
    std::ofstream f = open_out(path);
    const std::size_t dim = rows.empty() ? 0 : rows.front().size();
    f << "kind,task_id,class_id";
    for (std::size_t d = 0; d < dim; ++d) f << ",dim_" << d;
    f << '\n';
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const std::size_t task = per_class ? r / num_classes + 1 : r + 1;
        const std::size_t cls = per_class ? r % num_classes + 1 : 0;
        f << kind << ',' << task << ',' << cls;
        for (double v : rows[r]) f << ',' << num(v);
        f << '\n';
    }
}

void check_matches(const ModelConfig& c, const MultiTaskDataset& ds) {
    if (ds.mode != c.mode || ds.num_tasks() != c.num_tasks || ds.feature_dim != c.input_dim ||
        (c.mode == Mode::classification && ds.num_classes != c.num_classes)) {
        std::ostringstream msg;
        msg << "dataset (mode " << to_string(ds.mode) << ", m=" << ds.num_tasks() << ", k=" << ds.num_classes
            << ", p=" << ds.feature_dim << ") does not match checkpoint (mode " << to_string(c.mode)
            << ", m=" << c.num_tasks << ", k=" << c.num_classes << ", p=" << c.input_dim << ")";
        throw UsageError(msg.str());
    }
}

/// Raw/updated task and class embeddings plus one augmented row per sample
/// (true-label class embedding, as in training).
void export_embeddings(const fs::path& dir, const Checkpoint& ckpt, const MultiTaskDataset& standardized) {
    const ModelConfig& c = ckpt.model.config;
    const EmbeddingSet& e = ckpt.embeddings;
    const std::size_t k = std::max<std::size_t>(c.num_classes, 1);
    write_rows(dir / "embeddings_task_raw.csv", "task", e.raw_task, k, false);
    write_rows(dir / "embeddings_task_updated.csv", "task", e.updated_task, k, false);
    write_rows(dir / "embeddings_class_raw.csv", "class", e.raw_class, k, true);
    write_rows(dir / "embeddings_class_updated.csv", "class", e.updated_class, k, true);

    std::ofstream f = open_out(dir / "embeddings_samples.csv");
    f << "kind,task_id,class_id";
    for (std::size_t d = 0; d < c.head_input_dim(); ++d) f << ",dim_" << d;
    f << '\n';
    for (std::size_t i = 0; i < standardized.num_tasks(); ++i) {
        const TaskDataset& t = standardized.tasks[i];
        const Matrix h = shared_transform(ckpt.model.params.shared, c.shared_activation, t.features);
        for (std::size_t j = 0; j < t.size(); ++j) {
            const Vector hj = h.col(j);
            Vector task_emb, class_emb;
            if (c.uses_task_embedding()) task_emb = e.updated_task.at(i);
            if (c.uses_class_embedding()) class_emb = e.updated_class.at(i * c.num_classes + t.labels[j]);
            const Vector row = augment(hj, task_emb, class_emb);
            f << "sample," << t.task_id << ','
              << (c.mode == Mode::classification ? t.labels[j] + 1 : 0);
            for (double v : row) f << ',' << num(v);
            f << '\n';
        }
    }
}

double timed_seconds(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- commands ----------------------------------------------------------------------

int cmd_generate(const RunConfig& c, std::ostream& out) {
    if (c.use_csv) throw UsageError("generate: --csv makes no sense here; use --synthetic");
    const MultiTaskDataset ds = load_data(c);
    if (c.output_file.empty()) {
        write_csv_dataset(out, ds);
    } else {
        std::ofstream f = open_out(c.output_file);
        write_csv_dataset(f, ds);
        out << "wrote " << ds.total_samples() << " samples to " << c.output_file << '\n';
    }
    return kExitOk;
}

int cmd_train(const RunConfig& c, std::ostream& out) {
    const MultiTaskDataset data = load_data(c);
    const fs::path dir = prepare_out_dir(c, out);
    const ExperimentOutput res = run_experiment(data, c.experiment());
    {
        std::ofstream f = open_out(dir / "report.csv");
        write_report(f, res.report);
    }
    {
        std::ofstream f = open_out(dir / "train.log");
        write_log(f, res.report);
    }
    const Checkpoint ckpt{res.results.front().model, res.stats.front(), res.results.front().embeddings};
    save_checkpoint((dir / "model.ckpt").string(), ckpt);
    export_embeddings(dir, ckpt, apply_standardization(data, ckpt.stats));
    print_summary(out, res.report);
    bool any_diverged = false;
    for (const auto& r : res.report.runs) any_diverged = any_diverged || r.diverged;
    return any_diverged ? kExitFailure : kExitOk;
}

Checkpoint require_checkpoint(const RunConfig& c) {
    if (c.checkpoint.empty()) throw UsageError("--checkpoint is required");
    try {
        return load_checkpoint(c.checkpoint);
    } catch (const ParseError& e) {
        throw Failure(e.what());
    }
}

int cmd_eval(const RunConfig& c, std::ostream& out) {
    const Checkpoint ckpt = require_checkpoint(c);
    const MultiTaskDataset data = load_data(c);
    check_matches(ckpt.model.config, data);
    const MultiTaskDataset std_data = apply_standardization(data, ckpt.stats);
    const double metric = evaluate(ckpt.model, ckpt.embeddings, std_data);
    const fs::path dir = prepare_out_dir(c, out);
    std::ofstream f = open_out(dir / "eval.csv");
    f << "metric_name,metric,samples\n"
      << metric_name(ckpt.model.config.mode) << ',' << num(metric) << ',' << data.total_samples() << '\n';
    out << metric_name(ckpt.model.config.mode) << ' ' << num(metric) << '\n';
    return kExitOk;
}

int cmd_ablate(const RunConfig& c, std::ostream& out) {
    if (c.mode == Mode::regression) {
        throw UsageError(
            "ablate compares task-only, class-only and full augmentation; regression mode has no class "
            "embeddings (only task embeddings are used), so only baseline vs t is meaningful");
    }
    const MultiTaskDataset data = load_data(c);
    const fs::path dir = prepare_out_dir(c, out);
    std::ofstream table = open_out(dir / "ablation.csv");
    std::ofstream report = open_out(dir / "report.csv");
    table << "variant,metric_name,mean,std,seeds\n";
    bool header = true;
    for (Variant v : {Variant::baseline, Variant::task_only, Variant::class_only, Variant::full}) {
        ExperimentSpec spec = c.experiment();
        spec.model.variant = v;
        const ExperimentOutput res = run_experiment(data, spec);
        table << to_string(v) << ',' << metric_name(c.mode) << ',' << num(res.report.mean) << ','
              << num(res.report.stddev) << ',' << res.report.runs.size() << '\n';
        write_report(report, res.report, header);
        header = false;
        print_summary(out, res.report);
    }
    return kExitOk;
}

int cmd_sweep(const RunConfig& c, std::ostream& out) {
    const MultiTaskDataset data = load_data(c);
    const fs::path dir = prepare_out_dir(c, out);
    std::ofstream f = open_out(dir / "sweep.csv");
    f << "axis,value,variant,metric_name,mean,std\n";
    for (double value : c.sweep_values) {
        ExperimentSpec spec = c.experiment();
        if (c.sweep_axis == "ft") spec.model.task_embed_dim = static_cast<std::size_t>(value);
        else if (c.sweep_axis == "fc") spec.model.class_embed_dim = static_cast<std::size_t>(value);
        else spec.train_proportion = value;
        const ExperimentOutput res = run_experiment(data, spec);
        f << c.sweep_axis << ',' << num(value) << ',' << to_string(c.variant) << ',' << metric_name(c.mode)
          << ',' << num(res.report.mean) << ',' << num(res.report.stddev) << '\n';
        out << c.sweep_axis << '=' << value << ": ";
        print_summary(out, res.report);
    }
    return kExitOk;
}

int cmd_verify_theory(const RunConfig& c, std::ostream& out) {
    const auto t0 = std::chrono::steady_clock::now();
    theory::SweepConfig sc;
    sc.seed = c.theory_seed;
    sc.count = c.theory_instances;
    sc.dist.max_dim = c.theory_max_dim;
    sc.dist.lambdas = c.theory_lambdas;
    sc.delta = c.theory_delta;
    const theory::SweepResult res = theory::run_sweep(sc);
    const fs::path dir = prepare_out_dir(c, out);
    std::ofstream f = open_out(dir / "theory_report.csv");
    theory::write_sweep_csv(f, res);
    out << res.rows.size() << " instances, " << res.condition_count << " satisfy the PSD condition, "
        << res.inequality_violations << " loss-inequality violations, " << res.ordering_violations
        << " bound-ordering violations (" << timed_seconds(t0) << " s)\n";
    return res.inequality_violations == 0 ? kExitOk : kExitFailure;
}

int cmd_export_embeddings(const RunConfig& c, std::ostream& out) {
    const Checkpoint ckpt = require_checkpoint(c);
    const MultiTaskDataset data = load_data(c);
    check_matches(ckpt.model.config, data);
    const fs::path dir = prepare_out_dir(c, out);
    export_embeddings(dir, ckpt, apply_standardization(data, ckpt.stats));
    out << "exported " << ckpt.embeddings.updated_task.size() << " task and "
        << ckpt.embeddings.updated_class.size() << " class embeddings, " << data.total_samples()
        << " sample rows\n";
    return kExitOk;
}

int cmd_grad_check(const RunConfig& c, std::ostream& out) {
    const MultiTaskDataset data = standardize(load_data(c), load_data(c)).train;
    const ModelConfig mc = complete_config(c.model_config(), data);
    const HgnnModel model = make_model(mc, c.first_seed);
    const GradCheckReport rep = grad_check(model, data);
    const fs::path dir = prepare_out_dir(c, out);
    std::ofstream f = open_out(dir / "grad_check.csv");
    f << "parameter,max_rel_error,checked,skipped,pass\n";
    for (const auto& e : rep.entries) {
        f << e.name << ',' << num(e.max_rel_error) << ',' << e.checked << ',' << e.skipped << ','
          << (e.pass ? 1 : 0) << '\n';
        char buf[160];
        std::snprintf(buf, sizeof buf, "%-22s %.3e  checked %zu skipped %zu  %s", e.name.c_str(),
                      e.max_rel_error, e.checked, e.skipped, e.pass ? "ok" : "FAIL");
        out << buf << '\n';
    }
    out << (rep.pass ? "gradient check passed\n" : "gradient check FAILED: " + rep.failing_names() + "\n");
    return rep.pass ? kExitOk : kExitFailure;
}

// ---- flag plumbing -------------------------------------------------------------------

struct Flags {
    std::vector<std::function<void(RunConfig&)>> appliers;
    std::string config_file;

    template <typename T, typename Apply>
    void add(CLI::App& app, const std::string& name, const std::string& help, Apply apply) {
        auto value = std::make_shared<T>();
        CLI::Option* opt = app.add_option(name, *value, help);
        if constexpr (std::is_same_v<T, std::vector<double>>) opt->delimiter(',');
        appliers.push_back([opt, value, apply](RunConfig& c) {
            if (opt->count() > 0) apply(c, *value);
        });
    }
};

void register_flags(CLI::App& app, Flags& f) {
    app.add_option("--config", f.config_file, "JSON config file; flags override its values");

    auto synthetic = std::make_shared<std::vector<std::string>>();
    CLI::Option* syn = app.add_option("--synthetic", *synthetic,
                                      "Synthetic data, key=value among m k p n angle spread seed")
                           ->expected(0, CLI::detail::expected_max_vector_size)
                           ->delimiter(',');
    f.appliers.push_back([syn, synthetic](RunConfig& c) {
        if (syn->count() == 0) return;
        c.use_csv = false;
        apply_synthetic(c.synthetic, *synthetic);
    });
    f.add<std::string>(app, "--csv", "CSV dataset: task_id,label,f1..fp", [](RunConfig& c, const std::string& v) {
        c.use_csv = true;
        c.csv_path = v;
    });
    f.add<std::size_t>(app, "--classes", "Class count for CSV data (default: largest label)",
                       [](RunConfig& c, std::size_t v) { c.csv_classes = v; });
    f.add<std::string>(app, "--mode", "cls or reg", [](RunConfig& c, const std::string& v) {
        try {
            c.mode = parse_mode(v);
        } catch (const std::exception&) {
            throw UsageError("--mode: expected cls or reg, got '" + v + "'");
        }
    });
    f.add<std::string>(app, "--variant", "baseline, t, c or full", [](RunConfig& c, const std::string& v) {
        try {
            c.variant = parse_variant(v);
        } catch (const std::exception&) {
            throw UsageError("--variant: expected baseline, t, c or full, got '" + v + "'");
        }
    });
    f.add<std::size_t>(app, "--dh", "Shared hidden width", [](RunConfig& c, std::size_t v) { c.hidden_dim = v; });
    f.add<std::size_t>(app, "--ft", "Task embedding width", [](RunConfig& c, std::size_t v) { c.task_embed_dim = v; });
    f.add<std::size_t>(app, "--fc", "Class embedding width", [](RunConfig& c, std::size_t v) { c.class_embed_dim = v; });
    f.add<std::size_t>(app, "--layers", "Intra-task GNN layers", [](RunConfig& c, std::size_t v) { c.intra_layers = v; });
    f.add<std::size_t>(app, "--epochs", "Training epochs", [](RunConfig& c, std::size_t v) { c.epochs = v; });
    f.add<std::string>(app, "--batch", "full or a batch size", [](RunConfig& c, const std::string& v) {
        c.batch_size = parse_batch(v);
    });
    f.add<std::string>(app, "--pool", "Embedding pooling set: full or batch", [](RunConfig& c, const std::string& v) {
        if (v == "full") c.pooling = PoolingMode::full_set;
        else if (v == "batch") c.pooling = PoolingMode::in_batch;
        else throw UsageError("--pool: expected full or batch, got '" + v + "'");
    });
    f.add<std::string>(app, "--lr-schedule", "Learning-rate counter unit: epoch or step",
                       [](RunConfig& c, const std::string& v) {
                           if (v == "epoch") c.schedule = ScheduleUnit::epoch;
                           else if (v == "step") c.schedule = ScheduleUnit::step;
                           else throw UsageError("--lr-schedule: expected epoch or step, got '" + v + "'");
                       });
    f.add<std::size_t>(app, "--patience", "Early-stopping patience in epochs (0 disables)",
                       [](RunConfig& c, std::size_t v) { c.patience = v; });
    f.add<std::size_t>(app, "--seeds", "Number of repeat seeds", [](RunConfig& c, std::size_t v) { c.num_seeds = v; });
    f.add<std::uint64_t>(app, "--first-seed", "First repeat seed", [](RunConfig& c, std::uint64_t v) { c.first_seed = v; });
    f.add<double>(app, "--proportion", "Training proportion in (0,1)",
                  [](RunConfig& c, double v) { c.train_proportion = v; });
    f.add<double>(app, "--val-fraction", "Validation share of the training split in [0,1)",
                  [](RunConfig& c, double v) { c.validation_fraction = v; });
    f.add<std::string>(app, "--out", "Output root directory", [](RunConfig& c, const std::string& v) { c.out_dir = v; });
    f.add<std::string>(app, "--checkpoint", "Checkpoint file", [](RunConfig& c, const std::string& v) { c.checkpoint = v; });
    f.add<std::string>(app, "--output", "Dataset file written by generate (default stdout)",
                       [](RunConfig& c, const std::string& v) { c.output_file = v; });
    f.add<std::string>(app, "--axis", "Sweep axis: ft, fc or proportion",
                       [](RunConfig& c, const std::string& v) { c.sweep_axis = v; });
    f.add<std::vector<double>>(app, "--values", "Sweep values", [](RunConfig& c, const std::vector<double>& v) {
        c.sweep_values = v;
    });
    f.add<std::size_t>(app, "--instances", "Random ridge instances",
                       [](RunConfig& c, std::size_t v) { c.theory_instances = v; });
    f.add<int>(app, "--max-dim", "Largest p, q, n, k of a ridge instance",
               [](RunConfig& c, int v) { c.theory_max_dim = v; });
    f.add<std::vector<double>>(app, "--lambdas", "Ridge penalties", [](RunConfig& c, const std::vector<double>& v) {
        c.theory_lambdas = v;
    });
    f.add<double>(app, "--delta", "Bound confidence parameter in (0,1)",
                  [](RunConfig& c, double v) { c.theory_delta = v; });
    f.add<std::uint64_t>(app, "--theory-seed", "Seed of the ridge sweep",
                         [](RunConfig& c, std::uint64_t v) { c.theory_seed = v; });
}

RunConfig build_config(const std::string& command, const Flags& flags) {
    RunConfig c;
    if (!flags.config_file.empty()) {
        std::ifstream in(flags.config_file);
        if (!in) throw UsageError("--config: cannot open " + flags.config_file);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw UsageError("--config: " + std::string(e.what()));
        }
        c = run_config_from_json(j, c);
    }
    for (const auto& apply : flags.appliers) apply(c);
    c.command = command;
    c.validate();
    return c;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multi-task learning with graph-derived task and class embeddings"};
    app.require_subcommand(1);
    Flags flags;
    register_flags(app, flags);

    const std::vector<std::pair<std::string, std::string>> commands{
        {"generate", "Write a synthetic dataset as CSV"},
        {"train", "Train over repeat seeds; writes report.csv, train.log, model.ckpt, embeddings"},
        {"eval", "Score a dataset with a checkpoint"},
        {"ablate", "Compare baseline, t, c and full under identical seeds"},
        {"sweep", "Vary ft, fc or the training proportion"},
        {"verify-theory", "Check the ridge-regression results on random instances"},
        {"export-embeddings", "Write embeddings from a checkpoint as CSV"},
        {"grad-check", "Compare analytic and finite-difference gradients"},
    };
    for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        const RunConfig c = build_config(command, flags);
        if (command == "generate") return cmd_generate(c, out);
        if (command == "train") return cmd_train(c, out);
        if (command == "eval") return cmd_eval(c, out);
        if (command == "ablate") return cmd_ablate(c, out);
        if (command == "sweep") return cmd_sweep(c, out);
        if (command == "verify-theory") return cmd_verify_theory(c, out);
        if (command == "export-embeddings") return cmd_export_embeddings(c, out);
        return cmd_grad_check(c, out);
    } catch (const std::invalid_argument& e) {  // UsageError, ShapeError
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace hgnn::cli
