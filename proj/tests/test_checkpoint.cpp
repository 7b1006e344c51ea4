#include <gtest/gtest.h>

#include <sstream>

#include "hgnn/checkpoint.hpp"
#include "hgnn/config.hpp"

using namespace hgnn;

namespace {

Checkpoint trained_checkpoint(Variant v, Mode mode = Mode::classification) {
    SyntheticSpec s;
    s.num_tasks = 2;
    s.num_classes = 3;
    s.feature_dim = 4;
    s.samples_per_class = 5;
    const MultiTaskDataset d = mode == Mode::classification ? generate_synthetic_mtl(s)
                                                            : generate_synthetic_regression(s);
    ModelConfig c;
    c.variant = v;
    c.hidden_dim = 6;
    c.task_embed_dim = 2;
    c.class_embed_dim = 3;
    c = complete_config(c, d);
    TrainConfig tc;
    tc.epochs = 2;
    tc.batch_size = 4;
    TrainResult r = train(make_model(c, 1), d, nullptr, tc);
    return {r.model, fit_standardization(d), r.embeddings};
}

std::string save(const Checkpoint& c) {
    std::ostringstream out;
    save_checkpoint(out, c);
    return out.str();
}

Checkpoint load(const std::string& text) {
    std::istringstream in(text);
    return load_checkpoint(in);
}

}  // namespace

TEST(Checkpoint, RoundTripIsByteIdentical) {
    for (Variant v : {Variant::baseline, Variant::task_only, Variant::class_only, Variant::full}) {
        const std::string first = save(trained_checkpoint(v));
        EXPECT_EQ(save(load(first)), first) << to_string(v);
    }
    const std::string reg = save(trained_checkpoint(Variant::full, Mode::regression));
    EXPECT_EQ(save(load(reg)), reg);
}

TEST(Checkpoint, LoadedModelPredictsIdentically) {
    const Checkpoint c = trained_checkpoint(Variant::full);
    const Checkpoint back = load(save(c));
    EXPECT_EQ(back.model.config, c.model.config);
    EXPECT_EQ(back.model.params.gat_class.first, c.model.params.gat_class.first);
    EXPECT_EQ(back.embeddings.updated_class, c.embeddings.updated_class);
    EXPECT_EQ(back.stats.mean, c.stats.mean);
    const Vector x{0.3, -1.0, 2.0, 0.5};
    for (std::size_t t = 0; t < 2; ++t)
        EXPECT_EQ(predict_class(back.model, back.embeddings, x, t), predict_class(c.model, c.embeddings, x, t));
}

TEST(Checkpoint, MalformedInputsAreParseErrors) {
    const std::string good = save(trained_checkpoint(Variant::full));
    EXPECT_THROW(load(""), ParseError);
    EXPECT_THROW(load("not-a-checkpoint\n"), ParseError);
    EXPECT_THROW(load(good.substr(0, good.size() / 2)), ParseError);

    std::string bad_number = good;
    const auto pos = bad_number.find("section shared.weight");
    ASSERT_NE(pos, std::string::npos);
    const auto line = bad_number.find('\n', pos) + 1;
    bad_number.replace(line, 1, "x");
    EXPECT_THROW(load(bad_number), ParseError);

    std::string bad_shape = good;
    const auto rows = bad_shape.find("section shared.weight ") + std::string("section shared.weight ").size();
    bad_shape.replace(rows, 1, "9");
    EXPECT_THROW(load(bad_shape), ParseError);
}

TEST(Checkpoint, ErrorNamesLine) {
    try {
        load("hgnn-checkpoint v1\nconfig {broken\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    }
}

TEST(Config, JsonRoundTrip) {
    RunConfig c;
    c.variant = Variant::class_only;
    c.synthetic.rotation_angle = 0.35;
    c.batch_size = 0;
    c.train_proportion = 0.55;
    c.theory_lambdas = {0.5, 2.0};
    c.sweep_axis = "fc";
    c.sweep_values = {2, 4};
    EXPECT_EQ(run_config_from_json(to_json(c)), c);
    const nlohmann::json reparsed = nlohmann::json::parse(to_json(c).dump());
    EXPECT_EQ(run_config_from_json(reparsed), c);
}

TEST(Config, MissingKeysKeepBase) {
    RunConfig base;
    base.epochs = 17;
    const RunConfig c = run_config_from_json(nlohmann::json::parse(R"({"model": {"dh": 12}})"), base);
    EXPECT_EQ(c.hidden_dim, 12u);
    EXPECT_EQ(c.epochs, 17u);
}

TEST(Config, BadJsonTypeIsUsageError) {
    EXPECT_THROW(run_config_from_json(nlohmann::json::parse(R"({"training": {"epochs": "many"}})")), UsageError);
    EXPECT_THROW(run_config_from_json(nlohmann::json::parse(R"({"training": {"pool": "sideways"}})")), UsageError);
}

TEST(Config, HashIgnoresOutputDirectoryOnly) {
    RunConfig a, b;
    b.out_dir = "elsewhere";
    EXPECT_EQ(config_hash(a), config_hash(b));
    EXPECT_EQ(config_hash(a).size(), 16u);
    b.first_seed = 2;
    EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Config, ValidateNamesFlag) {
    RunConfig c;
    c.train_proportion = 1.5;
    try {
        c.validate();
        FAIL();
    } catch (const UsageError& e) {
        EXPECT_NE(std::string(e.what()).find("--proportion"), std::string::npos);
    }
    c = RunConfig{};
    c.mode = Mode::regression;
    c.variant = Variant::class_only;
    EXPECT_THROW(c.validate(), UsageError);
    c = RunConfig{};
    c.theory_delta = 1.0;
    EXPECT_THROW(c.validate(), UsageError);
}

TEST(Config, ModelConfigJsonRoundTrip) {
    ModelConfig m;
    m.mode = Mode::classification;
    m.input_dim = 7;
    m.num_tasks = 3;
    m.num_classes = 4;
    m.intra_layers = 2;
    EXPECT_EQ(model_config_from_json(to_json(m)), m);
}
