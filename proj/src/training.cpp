#include "hgnn/training.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>

#include "hgnn/rng.hpp"

namespace hgnn {

HgnnParams backward(const HgnnModel& model, const ForwardCache& cache,
                    const std::vector<Matrix>& grad_outputs) {
    if (cache.model_version != model.version) {
        throw UsageError("backward: forward cache is stale (model version " +
                         std::to_string(model.version) + ", cache version " +
                         std::to_string(cache.model_version) + ")");
    }
    if (!cache.has_batch) throw UsageError("backward: cache has no scoring pass");
    const ModelConfig& c = model.config;
    const HgnnParams& p = model.params;
    if (grad_outputs.size() != c.num_tasks || cache.tasks.size() != c.num_tasks) {
        throw ShapeError("backward: expected one output gradient per task");
    }
    HgnnParams g = zeros_like(p);
    const std::size_t k = c.num_classes;
    const std::size_t dh = c.hidden_dim;
    const std::size_t ft = c.uses_task_embedding() ? c.task_embed_dim : 0;
    const std::size_t fc = c.uses_class_embedding() ? c.class_embed_dim : 0;

    std::vector<Vector> d_task(c.uses_task_embedding() ? c.num_tasks : 0, Vector(ft, 0.0));
    std::vector<Vector> d_class(c.uses_class_embedding() ? c.num_tasks * k : 0, Vector(fc, 0.0));

    for (std::size_t i = 0; i < c.num_tasks; ++i) {
        const TaskCache& tc = cache.tasks[i];
        const Matrix& d_out = grad_outputs[i];
        if (d_out.rows() != tc.outputs.rows() || d_out.cols() != tc.outputs.cols()) {
            throw ShapeError("backward: output gradient " + d_out.shape_str() + " for outputs " +
                             tc.outputs.shape_str());
        }
        add_inplace(g.heads[i].weight, matmul_nt(d_out, tc.augmented));
        const Vector db = row_sums(d_out);
        for (std::size_t r = 0; r < db.size(); ++r) g.heads[i].bias[r] += db[r];

        const Matrix d_aug = matmul_tn(p.heads[i].weight, d_out);
        const std::size_t n = d_aug.cols();
        Matrix d_hidden(dh, n);
        for (std::size_t l = 0; l < n; ++l) {
            for (std::size_t r = 0; r < dh; ++r) d_hidden(r, l) = d_aug(r, l);
            for (std::size_t r = 0; r < ft; ++r) d_task[i][r] += d_aug(dh + r, l);
            if (fc > 0) {
                Vector& dc = d_class[i * k + tc.batch_labels[l]];
                for (std::size_t r = 0; r < fc; ++r) dc[r] += d_aug(dh + ft + r, l);
            }
        }
        shared_transform_backward(p.shared, c.shared_activation, tc.batch_inputs, tc.batch_shared,
                                  d_hidden, g.shared);
    }

    if (!c.uses_graph()) return g;

    std::optional<Matrix> d_raw_task;
    std::optional<Matrix> d_raw_class;
    if (c.uses_task_embedding()) {
        d_raw_task = gat_backward(p.gat_task, c.attention_activation, *cache.task_gat,
                                  Matrix::from_columns(d_task), g.gat_task);
    }
    if (c.uses_class_embedding()) {
        d_raw_class = gat_backward(p.gat_class, c.attention_activation, *cache.class_gat,
                                   Matrix::from_columns(d_class), g.gat_class);
    }

    for (std::size_t i = 0; i < c.num_tasks; ++i) {
        const TaskCache& tc = cache.tasks[i];
        Matrix d_h(dh, tc.pool_inputs.cols());
        if (d_raw_task) pool_backward(tc.task_pool, d_raw_task->col(i), d_h);
        if (d_raw_class) {
            for (std::size_t j = 0; j < k; ++j) {
                // Fallback embeddings are constants.
                if (tc.class_pool[j]) pool_backward(*tc.class_pool[j], d_raw_class->col(i * k + j), d_h);
            }
        }
        const Matrix d_hat = intra_task_gnn_backward(model.params.intra[i], c.intra_activation,
                                                     tc.pool_inputs, tc.pool_shared.out, tc.adjacency,
                                                     tc.intra, d_h, g.intra[i]);
        shared_transform_backward(p.shared, c.shared_activation, tc.pool_inputs, tc.pool_shared,
                                  d_hat, g.shared);
    }
    return g;
}

LossAndGradient loss_and_gradient(const HgnnModel& model, const MultiTaskDataset& pool,
                                  const MultiTaskDataset& batch, const ForwardOptions& options) {
    ForwardCache cache = forward(model, pool, batch, options);
    LossResult loss = model_loss(model.config, cache.outputs(), batch);
    HgnnParams grad = backward(model, cache, loss.grad_outputs);
    return {loss.value, std::move(grad), std::move(cache)};
}

// ---- gradient checking ---------------------------------------------------------------

namespace {

// Discrete state of every non-smooth point in the forward pass: ReLU signs,
// max-pool winners and zero-norm guards. A coordinate whose perturbation
// changes this state sits near a kink.
std::vector<std::size_t> kink_pattern(const ModelConfig& c, const ForwardCache& cache) {
    std::vector<std::size_t> pattern;
    auto signs = [&](const Matrix& pre, Activation act) {
        if (act != Activation::relu) return;
        for (double v : pre.values()) pattern.push_back(v > 0.0 ? 1 : 0);
    };
    auto attention = [&](const AttentionLayerCache& a) {
        signs(a.pre, c.attention_activation);
        for (double r : a.norms) pattern.push_back(r < kZeroNormGuard ? 1 : 0);
    };
    for (const auto& tc : cache.tasks) {
        signs(tc.batch_shared.pre, c.shared_activation);
        if (!c.uses_graph()) continue;
        signs(tc.pool_shared.pre, c.shared_activation);
        for (const auto& pre : tc.intra.pre) signs(pre, c.intra_activation);
        if (c.uses_task_embedding()) {
            pattern.insert(pattern.end(), tc.task_pool.source.begin(), tc.task_pool.source.end());
        }
        for (const auto& cp : tc.class_pool) {
            if (cp) pattern.insert(pattern.end(), cp->source.begin(), cp->source.end());
        }
    }
    if (cache.task_gat) {
        attention(cache.task_gat->first);
        attention(cache.task_gat->second);
    }
    if (cache.class_gat) {
        attention(cache.class_gat->first);
        attention(cache.class_gat->second);
    }
    return pattern;
}

}  // namespace

std::string GradCheckReport::failing_names() const {
    std::string out;
    for (const auto& e : entries) {
        if (e.pass) continue;
        if (!out.empty()) out += ", ";
        out += e.name;
    }
    return out;
}

GradCheckReport grad_check(const HgnnModel& model, const MultiTaskDataset& data,
                           const GradCheckOptions& options) {
    const ModelConfig& c = model.config;
    LossAndGradient base = loss_and_gradient(model, data, data);
    HgnnParams analytic = std::move(base.grad);
    if (options.corrupt) options.corrupt(analytic);

    std::vector<Matrix> frozen;
    ForwardOptions fwd;
    if (c.uses_graph()) {
        for (const auto& tc : base.cache.tasks) frozen.push_back(tc.adjacency);
        fwd.frozen_adjacency = &frozen;
    }
    const auto base_pattern = kink_pattern(c, base.cache);

    HgnnModel probe = model;
    auto probe_views = parameter_views(probe.params, c);
    const auto grad_views = parameter_views(static_cast<const HgnnParams&>(analytic), c);
    const double eps = options.epsilon;
    const double floor = options.error_floor * std::max(1.0, std::abs(base.loss));

    auto loss_at = [&]() {
        const ForwardCache fc = forward(probe, data, data, fwd);
        return model_loss(c, fc.outputs(), data).value;
    };
    auto pattern_at = [&]() { return kink_pattern(c, forward(probe, data, data, fwd)); };

    GradCheckReport report;
    for (std::size_t v = 0; v < probe_views.size(); ++v) {
        if (!probe_views[v].active) continue;
        GradCheckEntry entry{probe_views[v].name};
        auto values = probe_views[v].values;
        for (std::size_t idx = 0; idx < values.size(); ++idx) {
            const double orig = values[idx];
            values[idx] = orig + options.kink_radius * eps;
            bool near_kink = pattern_at() != base_pattern;
            if (!near_kink) {
                values[idx] = orig - options.kink_radius * eps;
                near_kink = pattern_at() != base_pattern;
            }
            if (near_kink) {
                values[idx] = orig;
                ++entry.skipped;
                continue;
            }
            values[idx] = orig + eps;
            const double plus = loss_at();
            values[idx] = orig - eps;
            const double minus = loss_at();
            values[idx] = orig;

            const double numeric = (plus - minus) / (2.0 * eps);
            const double a = grad_views[v].values[idx];
            const double denom = std::max({std::abs(a), std::abs(numeric), floor});
            entry.max_rel_error = std::max(entry.max_rel_error, std::abs(a - numeric) / denom);
            ++entry.checked;
        }
        entry.pass = entry.max_rel_error < options.tolerance;
        report.pass = report.pass && entry.pass;
        report.entries.push_back(std::move(entry));
    }
    return report;
}

// ---- optimizer --------------------------------------------------------------------------

double OptimizerState::learning_rate() const {
    return config.base_lr / (1.0 + static_cast<double>(schedule_counter));
}

OptimizerState make_optimizer(const HgnnModel& model, const AdamConfig& config) {
    return {config, zeros_like(model.params), zeros_like(model.params), 0, 0};
}

void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> m,
                 std::span<double> v, double lr, std::uint64_t t, const AdamConfig& config) {
    if (params.size() != grads.size() || params.size() != m.size() || params.size() != v.size()) {
        throw ShapeError("adam_update: parameter/gradient/moment sizes differ");
    }
    if (t == 0) throw UsageError("adam_update: step index starts at 1");
    const double td = static_cast<double>(t);
    const double c1 = 1.0 - std::pow(config.beta1, td);
    const double c2 = 1.0 - std::pow(config.beta2, td);
    for (std::size_t i = 0; i < params.size(); ++i) {
        m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * grads[i];
        v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * grads[i] * grads[i];
        params[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + config.eps);
    }
}

void adam_step(OptimizerState& state, HgnnModel& model, const HgnnParams& grads) {
    const ModelConfig& c = model.config;
    auto pv = parameter_views(model.params, c);
    const auto gv = parameter_views(grads, c);
    auto mv = parameter_views(state.first_moment, c);
    auto vv = parameter_views(state.second_moment, c);
    if (gv.size() != pv.size() || mv.size() != pv.size() || vv.size() != pv.size()) {
        throw ShapeError("adam_step: gradient structure does not match the model");
    }
    const double lr = state.learning_rate();
    const std::uint64_t t = ++state.updates;
    for (std::size_t i = 0; i < pv.size(); ++i) {
        adam_update(pv[i].values, gv[i].values, mv[i].values, vv[i].values, lr, t, state.config);
    }
    if (state.config.schedule == ScheduleUnit::step) ++state.schedule_counter;
    ++model.version;
}

// ---- training loop ------------------------------------------------------------------------

bool metric_improves(Mode mode, double candidate, double incumbent) {
    return mode == Mode::classification ? candidate > incumbent : candidate < incumbent;
}

double evaluate(const HgnnModel& model, const EmbeddingSet& embeddings, const MultiTaskDataset& test) {
    if (test.mode != model.config.mode) throw UsageError("evaluate: dataset mode does not match model");
    std::size_t total = 0;
    double acc = 0.0;
    for (std::size_t i = 0; i < test.num_tasks(); ++i) {
        const TaskDataset& t = test.tasks[i];
        for (std::size_t l = 0; l < t.size(); ++l) {
            const Vector x = t.features.col(l);
            if (test.mode == Mode::classification) {
                acc += predict_class(model, embeddings, x, i) == t.labels[l] ? 1.0 : 0.0;
            } else {
                const double r = predict_regression(model, embeddings, x, i) - t.targets[l];
                acc += r * r;
            }
            ++total;
        }
    }
    return total == 0 ? 0.0 : acc / static_cast<double>(total);
}

namespace {

bool params_finite(const HgnnModel& model) {
    for (const auto& v : parameter_views(model.params, model.config)) {
        for (double x : v.values)
            if (!std::isfinite(x)) return false;
    }
    return true;
}

}  // namespace

TrainResult train(const HgnnModel& initial, const MultiTaskDataset& train_set,
                  const MultiTaskDataset* validation, const TrainConfig& config) {
    const ModelConfig& c = initial.config;
    TrainResult result{initial, {}, {}, false, 0};
    HgnnModel model = initial;
    OptimizerState opt = make_optimizer(model, config.adam);
    Rng batch_rng(derive_seed(config.seed, 0xBA7C4));

    const std::size_t m = train_set.num_tasks();
    std::size_t max_n = 0;
    for (const auto& t : train_set.tasks) max_n = std::max(max_n, t.size());
    const bool full_batch = config.batch_size == 0;
    const std::size_t steps_per_epoch =
        full_batch ? 1 : (max_n + config.batch_size - 1) / config.batch_size;
    const bool in_batch_pool = config.pooling == PoolingMode::in_batch && !full_batch;

    std::vector<Vector> last_class;
    if (in_batch_pool && c.uses_class_embedding()) {
        last_class = forward_embeddings(model, train_set).embeddings.raw_class;
    }

    HgnnModel best = model;
    std::optional<double> best_metric;
    std::size_t since_best = 0;
    std::size_t step = 0;

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        std::vector<std::vector<std::size_t>> order(m);
        for (std::size_t i = 0; i < m; ++i) {
            order[i].resize(train_set.tasks[i].size());
            std::iota(order[i].begin(), order[i].end(), 0);
            if (!full_batch) batch_rng.shuffle(order[i]);
        }
        const double lr = opt.learning_rate();
        double epoch_loss = 0.0;
        for (std::size_t s = 0; s < steps_per_epoch && !result.diverged; ++s) {
            MultiTaskDataset batch = train_set;
            if (!full_batch) {
                for (std::size_t i = 0; i < m; ++i) {
                    const std::size_t n = order[i].size();
                    const std::size_t b = std::min(config.batch_size, n);
                    std::vector<std::size_t> idx(b);
                    for (std::size_t r = 0; r < b; ++r) idx[r] = order[i][(s * config.batch_size + r) % n];
                    batch.tasks[i] = select_samples(train_set.tasks[i], idx);
                }
            }
            const MultiTaskDataset& pool = in_batch_pool ? batch : train_set;
            ForwardOptions fwd;
            if (!last_class.empty()) fwd.class_fallback = &last_class;

            const HgnnModel before = model;
            try {
                LossAndGradient lg = loss_and_gradient(model, pool, batch, fwd);
                if (!std::isfinite(lg.loss)) throw NumericError("loss is not finite");
                if (!last_class.empty()) last_class = lg.cache.embeddings.raw_class;
                adam_step(opt, model, lg.grad);
                if (!params_finite(model)) throw NumericError("parameters are not finite");
                epoch_loss += lg.loss;
                ++step;
            } catch (const NumericError&) {
                model = before;
                result.diverged = true;
            }
        }
        if (result.diverged) break;
        if (config.adam.schedule == ScheduleUnit::epoch) ++opt.schedule_counter;

        EpochRecord rec{epoch, step, epoch_loss / static_cast<double>(steps_per_epoch), std::nullopt, lr};
        if (validation) {
            const EmbeddingSet emb = compute_embeddings(model, train_set);
            const double metric = evaluate(model, emb, *validation);
            rec.val_metric = metric;
            if (!best_metric || metric_improves(c.mode, metric, *best_metric)) {
                best_metric = metric;
                best = model;
                result.best_epoch = epoch;
                since_best = 0;
            } else {
                ++since_best;
            }
        }
        result.log.push_back(rec);
        if (validation && config.patience > 0 && since_best >= config.patience) break;
    }

    if (validation && best_metric && !result.diverged) {
        result.model = std::move(best);
    } else {
        result.model = std::move(model);
        if (!validation) result.best_epoch = result.log.size();
    }
    result.embeddings = compute_embeddings(result.model, train_set);
    return result;
}

// ---- repeated runs ---------------------------------------------------------------------------

ModelConfig complete_config(ModelConfig config, const MultiTaskDataset& data) {
    config.mode = data.mode;
    config.input_dim = data.feature_dim;
    config.num_tasks = data.num_tasks();
    config.num_classes = data.mode == Mode::classification ? data.num_classes : 0;
    config.validate();
    return config;
}

ExperimentOutput run_experiment(const MultiTaskDataset& data, const ExperimentSpec& spec) {
    data.validate();
    if (spec.seeds.empty()) throw UsageError("run_experiment: no seeds");
    const ModelConfig config = complete_config(spec.model, data);
    const auto started = std::chrono::steady_clock::now();

    const std::size_t runs = spec.seeds.size();
    ExperimentOutput out;
    out.report.mode = data.mode;
    out.report.variant = config.variant;
    out.report.runs.resize(runs);
    out.results.resize(runs);
    out.stats.resize(runs);
    std::vector<std::exception_ptr> errors(runs);

    // Seeds are independent; each owns its RNG streams and model.
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t r = 0; r < static_cast<std::int64_t>(runs); ++r) {
        try {
            const std::uint64_t seed = spec.seeds[r];
            const SplitResult parts = split(data, {spec.train_proportion, derive_seed(seed, 1)});
            StandardizeResult st = standardize(parts.train, parts.test);
            MultiTaskDataset fit = st.train;
            std::optional<MultiTaskDataset> val;
            if (spec.validation_fraction > 0.0) {
                SplitResult carve = split(st.train, {1.0 - spec.validation_fraction, derive_seed(seed, 2)});
                fit = std::move(carve.train);
                val = std::move(carve.test);
            }
            TrainConfig tc = spec.train;
            tc.seed = derive_seed(seed, 4);
            TrainResult tr = train(make_model(config, derive_seed(seed, 3)), fit,
                                   val ? &*val : nullptr, tc);
            SeedRun run;
            run.seed = seed;
            run.metric = evaluate(tr.model, tr.embeddings, st.test);
            run.final_train_loss = tr.log.empty() ? 0.0 : tr.log.back().loss;
            run.epochs_run = tr.log.size();
            run.diverged = tr.diverged;
            run.log = tr.log;
            out.report.runs[r] = std::move(run);
            out.results[r] = std::move(tr);
            out.stats[r] = std::move(st.stats);
        } catch (...) {
            errors[r] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    double sum = 0.0;
    for (const auto& run : out.report.runs) sum += run.metric;
    out.report.mean = sum / static_cast<double>(runs);
    double ss = 0.0;
    for (const auto& run : out.report.runs) ss += (run.metric - out.report.mean) * (run.metric - out.report.mean);
    out.report.stddev = runs > 1 ? std::sqrt(ss / static_cast<double>(runs - 1)) : 0.0;
    out.report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return out;
}

}  // namespace hgnn
