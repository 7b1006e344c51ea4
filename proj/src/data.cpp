#include "hgnn/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "hgnn/rng.hpp"

namespace hgnn {

const char* to_string(Mode mode) {
    return mode == Mode::classification ? "cls" : "reg";
}

Mode parse_mode(const std::string& text) {
    if (text == "cls" || text == "classification") return Mode::classification;
    if (text == "reg" || text == "regression") return Mode::regression;
    throw UsageError("unknown mode '" + text + "' (expected cls or reg)");
}

std::size_t MultiTaskDataset::total_samples() const {
    std::size_t n = 0;
    for (const auto& t : tasks) n += t.size();
    return n;
}

void MultiTaskDataset::validate() const {
    if (tasks.empty()) throw UsageError("dataset has no tasks");
    if (mode == Mode::classification && num_classes == 0) {
        throw UsageError("classification dataset needs k >= 1");
    }
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const auto& t = tasks[i];
        const std::string where = "task " + std::to_string(t.task_id);
        if (t.task_id != static_cast<int>(i) + 1) {
            throw UsageError("task ids must be 1..m in order; position " + std::to_string(i + 1) +
                             " holds " + where);
        }
        if (t.features.rows() != feature_dim) {
            throw UsageError(where + ": feature dim " + std::to_string(t.features.rows()) +
                             " != " + std::to_string(feature_dim));
        }
        check_finite(t.features.values(), where.c_str());
        if (mode == Mode::classification) {
            if (t.labels.size() != t.size()) throw UsageError(where + ": label count mismatch");
            for (int y : t.labels) {
                if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
                    throw UsageError(where + ": label " + std::to_string(y + 1) +
                                     " outside [1.." + std::to_string(num_classes) + "]");
                }
            }
        } else {
            if (t.targets.size() != t.size()) throw UsageError(where + ": target count mismatch");
            check_finite(t.targets, where.c_str());
        }
    }
}

namespace {

std::vector<Vector> class_templates(const SyntheticSpec& spec, Rng& rng) {
    std::vector<Vector> means(spec.num_classes, Vector(spec.feature_dim));
    for (auto& mu : means)
        for (double& v : mu) v = rng.normal();
    return means;
}

Vector rotate_first_two(Vector v, double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double x = v[0];
    const double y = v[1];
    v[0] = c * x - s * y;
    v[1] = s * x + c * y;
    return v;
}

void check_synthetic_spec(const SyntheticSpec& spec, bool classification) {
    if (spec.num_tasks < 2) throw UsageError("synthetic: m must be >= 2");
    if (classification && spec.num_classes < 2) throw UsageError("synthetic: k must be >= 2");
    if (spec.feature_dim < 2) throw UsageError("synthetic: p must be >= 2");
    if (spec.samples_per_class < 1) throw UsageError("synthetic: n must be >= 1");
    if (!(spec.cluster_spread >= 0.0) || !std::isfinite(spec.rotation_angle)) {
        throw UsageError("synthetic: spread must be >= 0 and angle finite");
    }
}

}  // namespace

MultiTaskDataset generate_synthetic_mtl(const SyntheticSpec& spec) {
    check_synthetic_spec(spec, true);
    Rng template_rng(derive_seed(spec.seed, 0));
    const auto means = class_templates(spec, template_rng);

    MultiTaskDataset ds;
    ds.mode = Mode::classification;
    ds.num_classes = spec.num_classes;
    ds.feature_dim = spec.feature_dim;
    const std::size_t n = spec.num_classes * spec.samples_per_class;
    for (std::size_t t = 0; t < spec.num_tasks; ++t) {
        Rng rng(derive_seed(spec.seed, t + 1));
        TaskDataset task{static_cast<int>(t) + 1, Matrix(spec.feature_dim, n), {}, {}};
        std::size_t col = 0;
        for (std::size_t c = 0; c < spec.num_classes; ++c) {
            const Vector mu = rotate_first_two(means[c], static_cast<double>(t) * spec.rotation_angle);
            for (std::size_t s = 0; s < spec.samples_per_class; ++s, ++col) {
                for (std::size_t d = 0; d < spec.feature_dim; ++d) {
                    task.features(d, col) = mu[d] + spec.cluster_spread * rng.normal();
                }
                task.labels.push_back(static_cast<int>(c));
            }
        }
        ds.tasks.push_back(std::move(task));
    }
    return ds;
}

MultiTaskDataset generate_synthetic_regression(const SyntheticSpec& spec) {
    check_synthetic_spec(spec, false);
    Rng template_rng(derive_seed(spec.seed, 0));
    Vector weights(spec.feature_dim);
    for (double& w : weights) w = template_rng.normal();

    MultiTaskDataset ds;
    ds.mode = Mode::regression;
    ds.feature_dim = spec.feature_dim;
    // samples_per_class doubles as samples per task here.
    const std::size_t n = spec.samples_per_class;
    for (std::size_t t = 0; t < spec.num_tasks; ++t) {
        Rng rng(derive_seed(spec.seed, t + 1));
        const Vector w = rotate_first_two(weights, static_cast<double>(t) * spec.rotation_angle);
        TaskDataset task{static_cast<int>(t) + 1, Matrix(spec.feature_dim, n), {}, {}};
        for (std::size_t s = 0; s < n; ++s) {
            double y = 0.0;
            for (std::size_t d = 0; d < spec.feature_dim; ++d) {
                task.features(d, s) = rng.normal();
                y += w[d] * task.features(d, s);
            }
            task.targets.push_back(y + spec.cluster_spread * rng.normal());
        }
        ds.tasks.push_back(std::move(task));
    }
    return ds;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

template <typename T>
T parse_number(const std::string& raw, std::size_t line_no, const char* column) {
    const std::string text = trim(raw);
    T value{};
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (text.empty() || ec != std::errc() || ptr != end) {
        throw ParseError("line " + std::to_string(line_no) + ": " + column + " value '" + raw +
                         "' is not a number");
    }
    if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(value)) {
            throw ParseError("line " + std::to_string(line_no) + ": non-finite " + column);
        }
    }
    return value;
}

struct RawTask {
    std::vector<Vector> columns;
    std::vector<int> labels;
    Vector targets;
    std::vector<std::size_t> lines;
};

}  // namespace

MultiTaskDataset load_csv_dataset(const std::string& path, Mode mode,
                                  std::optional<std::size_t> num_classes) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    try {
        return read_csv_dataset(in, mode, num_classes);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

MultiTaskDataset read_csv_dataset(std::istream& in, Mode mode,
                                  std::optional<std::size_t> num_classes) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError("line 1: missing header");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_fields(line);
    if (header.size() < 3 || trim(header[0]) != "task_id" || trim(header[1]) != "label") {
        throw ParseError("line 1: header must be task_id,label,f1,...,fp");
    }
    const std::size_t p = header.size() - 2;

    std::map<int, RawTask> by_task;
    int max_label = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != p + 2) {
            throw ParseError("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(p + 2) + " fields, got " +
                             std::to_string(fields.size()));
        }
        const int task_id = parse_number<int>(fields[0], line_no, "task_id");
        if (task_id < 1) {
            throw ParseError("line " + std::to_string(line_no) + ": task_id must be >= 1");
        }
        RawTask& raw = by_task[task_id];
        if (mode == Mode::classification) {
            const int label = parse_number<int>(fields[1], line_no, "label");
            if (label < 1 || (num_classes && static_cast<std::size_t>(label) > *num_classes)) {
                throw ParseError("line " + std::to_string(line_no) + ": label " +
                                 std::to_string(label) + " outside [1.." +
                                 (num_classes ? std::to_string(*num_classes) : "k") + "]");
            }
            max_label = std::max(max_label, label);
            raw.labels.push_back(label - 1);
        } else {
            raw.targets.push_back(parse_number<double>(fields[1], line_no, "label"));
        }
        Vector x(p);
        for (std::size_t d = 0; d < p; ++d) x[d] = parse_number<double>(fields[d + 2], line_no, "feature");
        raw.columns.push_back(std::move(x));
        raw.lines.push_back(line_no);
    }
    if (by_task.empty()) throw ParseError("line " + std::to_string(line_no) + ": no data rows");

    MultiTaskDataset ds;
    ds.mode = mode;
    ds.feature_dim = p;
    ds.num_classes = mode == Mode::classification
                         ? (num_classes ? *num_classes : static_cast<std::size_t>(max_label))
                         : 0;
    int expected = 1;
    for (auto& [id, raw] : by_task) {
        if (id != expected) {
            throw ParseError("line " + std::to_string(raw.lines.front()) + ": task ids must cover 1.." +
                             std::to_string(by_task.size()) + " (task " + std::to_string(expected) +
                             " missing)");
        }
        ++expected;
        ds.tasks.push_back(TaskDataset{id, Matrix::from_columns(raw.columns), std::move(raw.labels),
                                       std::move(raw.targets)});
    }
    return ds;
}

void write_csv_dataset(std::ostream& out, const MultiTaskDataset& ds) {
    out << "task_id,label";
    for (std::size_t d = 0; d < ds.feature_dim; ++d) out << ",f" << (d + 1);
    out << '\n';
    out << std::setprecision(17);
    for (const auto& t : ds.tasks) {
        for (std::size_t j = 0; j < t.size(); ++j) {
            out << t.task_id << ',';
            if (ds.mode == Mode::classification) {
                out << (t.labels[j] + 1);
            } else {
                out << t.targets[j];
            }
            for (std::size_t d = 0; d < ds.feature_dim; ++d) out << ',' << t.features(d, j);
            out << '\n';
        }
    }
}

TaskDataset select_samples(const TaskDataset& task, std::span<const std::size_t> indices) {
    if (indices.empty()) throw UsageError("select_samples: empty selection");
    TaskDataset out{task.task_id, Matrix(task.features.rows(), indices.size()), {}, {}};
    for (std::size_t c = 0; c < indices.size(); ++c) {
        const std::size_t src = indices[c];
        for (std::size_t r = 0; r < task.features.rows(); ++r) out.features(r, c) = task.features(r, src);
        if (!task.labels.empty()) out.labels.push_back(task.labels[src]);
        if (!task.targets.empty()) out.targets.push_back(task.targets[src]);
    }
    return out;
}

namespace {

// Lexicographic content order: features first, then the regression target.
bool content_less(const TaskDataset& t, std::size_t a, std::size_t b) {
    for (std::size_t r = 0; r < t.features.rows(); ++r) {
        const double x = t.features(r, a);
        const double y = t.features(r, b);
        if (x != y) return x < y;
    }
    if (!t.targets.empty() && t.targets[a] != t.targets[b]) return t.targets[a] < t.targets[b];
    return false;
}

}  // namespace

SplitResult split(const MultiTaskDataset& ds, const SplitSpec& spec) {
    if (!(spec.train_proportion > 0.0 && spec.train_proportion < 1.0)) {
        throw UsageError("split: train proportion must lie in (0,1), got " +
                         std::to_string(spec.train_proportion));
    }
    SplitResult result{ds, ds};
    for (std::size_t i = 0; i < ds.tasks.size(); ++i) {
        const TaskDataset& task = ds.tasks[i];
        const std::size_t strata = ds.mode == Mode::classification ? ds.num_classes : 1;
        std::vector<std::vector<std::size_t>> members(strata);
        for (std::size_t j = 0; j < task.size(); ++j) {
            members[ds.mode == Mode::classification ? task.labels[j] : 0].push_back(j);
        }
        std::vector<std::size_t> train_idx;
        std::vector<std::size_t> test_idx;
        for (std::size_t s = 0; s < strata; ++s) {
            auto& idx = members[s];
            const std::string where = "task " + std::to_string(task.task_id) +
                                      (ds.mode == Mode::classification
                                           ? ", class " + std::to_string(s + 1)
                                           : std::string());
            if (idx.size() < 2) {
                throw UsageError("split: stratum (" + where + ") has " + std::to_string(idx.size()) +
                                 " samples; need at least 2");
            }
            std::stable_sort(idx.begin(), idx.end(),
                             [&](std::size_t a, std::size_t b) { return content_less(task, a, b); });
            Rng rng(derive_seed(spec.seed, (static_cast<std::uint64_t>(i) << 32) | s));
            rng.shuffle(idx);
            const auto wanted = static_cast<std::size_t>(
                std::lround(spec.train_proportion * static_cast<double>(idx.size())));
            const std::size_t n_train = std::clamp<std::size_t>(wanted, 1, idx.size() - 1);
            train_idx.insert(train_idx.end(), idx.begin(), idx.begin() + n_train);
            test_idx.insert(test_idx.end(), idx.begin() + n_train, idx.end());
        }
        result.train.tasks[i] = select_samples(task, train_idx);
        result.test.tasks[i] = select_samples(task, test_idx);
    }
    return result;
}

StandardizeStats fit_standardization(const MultiTaskDataset& train) {
    const std::size_t p = train.feature_dim;
    const std::size_t n = train.total_samples();
    if (n == 0) throw UsageError("standardize: empty training set");
    StandardizeStats stats{Vector(p, 0.0), Vector(p, 0.0)};
    for (const auto& t : train.tasks)
        for (std::size_t d = 0; d < p; ++d)
            for (std::size_t j = 0; j < t.size(); ++j) stats.mean[d] += t.features(d, j);
    for (double& m : stats.mean) m /= static_cast<double>(n);
    for (const auto& t : train.tasks)
        for (std::size_t d = 0; d < p; ++d)
            for (std::size_t j = 0; j < t.size(); ++j) {
                const double diff = t.features(d, j) - stats.mean[d];
                stats.stddev[d] += diff * diff;
            }
    for (double& s : stats.stddev) {
        s = std::sqrt(s / static_cast<double>(n));
        if (s < 1e-12) s = 0.0;
    }
    return stats;
}

MultiTaskDataset apply_standardization(const MultiTaskDataset& ds, const StandardizeStats& stats) {
    if (stats.mean.size() != ds.feature_dim) {
        throw ShapeError("standardize: stats for p=" + std::to_string(stats.mean.size()) +
                         " applied to p=" + std::to_string(ds.feature_dim));
    }
    MultiTaskDataset out = ds;
    for (auto& t : out.tasks)
        for (std::size_t d = 0; d < ds.feature_dim; ++d)
            for (std::size_t j = 0; j < t.size(); ++j) {
                double& v = t.features(d, j);
                v = stats.stddev[d] == 0.0 ? 0.0 : (v - stats.mean[d]) / stats.stddev[d];
            }
    return out;
}

StandardizeResult standardize(const MultiTaskDataset& train, const MultiTaskDataset& test) {
    StandardizeStats stats = fit_standardization(train);
    return {apply_standardization(train, stats), apply_standardization(test, stats),
            std::move(stats)};
}

}  // namespace hgnn
