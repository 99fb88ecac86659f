#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "ffcnn/experiment.hpp"
#include "ffcnn/synth_digits.hpp"
#include "ffcnn/train.hpp"

using namespace ffcnn;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    EXPECT_TRUE(in) << path;
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST(ConfigParsing, RoundTripThroughEcho) {
    const std::string text =
        "filters = 4,8\n"
        "kernel = 5\n"
        "padding = valid\n"
        "epochs = 3\n"
        "batch = 25\n"
        "lr = 0.0001\n"
        "k = 0.2\n"
        "label_set = 2\n"
        "seed = 99\n"
        "include_first_layer_loss = true\n"
        "pooling = true\n"
        "data_dir = /tmp/data\n";
    ExperimentConfig cfg = parse_config_text(text);
    EXPECT_EQ(cfg.train.filters, (std::vector<int>{4, 8}));
    EXPECT_EQ(cfg.train.kernel, 5);
    EXPECT_EQ(cfg.train.padding, Padding::Valid);
    EXPECT_EQ(cfg.train.batch, 25);
    EXPECT_EQ(cfg.train.label_set, LabelSetId::Set2);
    EXPECT_EQ(cfg.train.seed, 99u);
    EXPECT_TRUE(cfg.train.include_first_layer_loss);
    EXPECT_TRUE(cfg.train.pooling);

    // the echo is itself a parseable config describing the same experiment
    ExperimentConfig back = parse_config_text(cfg.echo());
    EXPECT_EQ(back.echo(), cfg.echo());
    EXPECT_EQ(back.hash(), cfg.hash());
}

TEST(ConfigParsing, UnknownKeyRejected) {
    try {
        parse_config_text("epochs = 3\nlearning_rate = 0.1\n", "test.cfg");
        FAIL() << "expected unknown-key error";
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("unknown config key"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("learning_rate"), std::string::npos);
    }
}

TEST(ConfigParsing, DuplicateAndMalformedRejected) {
    EXPECT_THROW(parse_config_text("epochs = 3\nepochs = 4\n"), std::runtime_error);
    EXPECT_THROW(parse_config_text("epochs\n"), std::runtime_error);
    EXPECT_THROW(parse_config_text("epochs = three\n"), std::runtime_error);
    EXPECT_THROW(parse_config_text("padding = zero\n"), std::runtime_error);
}

TEST(ConfigParsing, HashIgnoresOutDir) {
    ExperimentConfig a = parse_config_text("epochs = 3\nout_dir = A\n");
    ExperimentConfig b = parse_config_text("epochs = 3\nout_dir = B\n");
    EXPECT_EQ(a.hash(), b.hash());
    ExperimentConfig c = parse_config_text("epochs = 4\nout_dir = A\n");
    EXPECT_NE(a.hash(), c.hash());
}

TEST(SweepExpansion, CellCountEqualsGridProduct) {
    ExperimentConfig cfg = parse_config_text(
        "sweep_filters = 4 8,8 16\n"
        "sweep_kernels = 3 5\n"
        "sweep_k = 0.2 0.35 0.5\n");
    std::vector<ExperimentConfig> cells = expand_sweep(cfg);
    EXPECT_EQ(cells.size(), 3u * 2 * 3);

    // per-layer filter cells survive expansion
    EXPECT_EQ(cells[6].train.filters, (std::vector<int>{8, 8}));
    // independent seeds: master + cell index
    for (size_t i = 0; i < cells.size(); ++i) EXPECT_EQ(cells[i].train.seed, cfg.train.seed + i);
    // every cell writes to its own directory
    EXPECT_NE(cells[0].out_dir, cells[1].out_dir);
}

TEST(SweepExpansion, EmptyGridsRejected) {
    ExperimentConfig cfg = parse_config_text("epochs = 2\n");
    EXPECT_THROW(expand_sweep(cfg), std::runtime_error);
}

TEST(EndToEnd, TrainEvalDeterminism) {
    // two identical desk-scale runs must produce byte-identical metrics and
    // checkpoints (out_dir differs, so it is excluded from the echo)
    const std::string base = testing::TempDir() + "/exp_determinism";
    std::filesystem::create_directories(base + "/data");
    write_synthetic_idx(base + "/data", 3, 60000, 64);

    auto make_cfg = [&](const std::string& out) {
        ExperimentConfig cfg = parse_config_text(
            "filters = 3,3\n"
            "kernel = 3\n"
            "epochs = 2\n"
            "batch = 16\n"
            "lr = 0.0005\n"
            "k = 0.35\n"
            "seed = 12\n"
            "train_limit = 64\n"
            "val_limit = 32\n"
            "test_limit = 32\n");
        cfg.data_dir = base + "/data";
        cfg.out_dir = out;
        return cfg;
    };

    ASSERT_EQ(run_train(make_cfg(base + "/run_a")), 0);
    ASSERT_EQ(run_train(make_cfg(base + "/run_b")), 0);

    EXPECT_EQ(read_file(base + "/run_a/metrics.csv"), read_file(base + "/run_b/metrics.csv"));
    EXPECT_EQ(read_file(base + "/run_a/checkpoint.ffc"), read_file(base + "/run_b/checkpoint.ffc"));

    // eval round-trips the checkpoint
    ExperimentConfig eval_cfg = make_cfg(base + "/eval_out");
    EXPECT_EQ(run_eval(eval_cfg, base + "/run_a/checkpoint.ffc", "test", InferenceMode::Classifier), 0);
    EXPECT_TRUE(std::filesystem::exists(base + "/eval_out/confusion.csv"));
}

TEST(EndToEnd, MetricsCsvColumnsMatchSchema) {
    const std::string base = testing::TempDir() + "/exp_schema";
    std::filesystem::create_directories(base + "/data");
    write_synthetic_idx(base + "/data", 4, 60000, 32);

    ExperimentConfig cfg = parse_config_text(
        "filters = 2,2,2\n"
        "kernel = 3\n"
        "epochs = 1\n"
        "batch = 16\n"
        "train_limit = 32\n"
        "val_limit = 16\n"
        "test_limit = 16\n"
        "seed = 5\n");
    cfg.data_dir = base + "/data";
    cfg.out_dir = base + "/run";
    ASSERT_EQ(run_train(cfg), 0);

    std::ifstream in(base + "/run/metrics.csv");
    std::string line;
    bool saw_hash = false;
    while (std::getline(in, line) && line.rfind("#", 0) == 0) {
        if (line.find("config_hash=" + cfg.hash_hex()) != std::string::npos) saw_hash = true;
    }
    EXPECT_TRUE(saw_hash);
    EXPECT_EQ(line,
              "epoch,lr,network_loss,disc_loss_l1,disc_acc_l1,disc_loss_l2,disc_acc_l2,disc_loss_l3,disc_acc_l3,"
              "train_acc,val_acc");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 1);
}

TEST(EndToEnd, BpTrainWritesSameSchema) {
    const std::string base = testing::TempDir() + "/exp_bp";
    std::filesystem::create_directories(base + "/data");
    write_synthetic_idx(base + "/data", 5, 60000, 32);

    ExperimentConfig cfg = parse_config_text(
        "algo = bp\n"
        "filters = 2,2\n"
        "kernel = 3\n"
        "epochs = 1\n"
        "batch = 16\n"
        "bp_lr = 0.001\n"
        "train_limit = 48\n"
        "val_limit = 16\n"
        "test_limit = 16\n"
        "seed = 6\n");
    cfg.data_dir = base + "/data";
    cfg.out_dir = base + "/run";
    ASSERT_EQ(run_train(cfg), 0);
    const std::string metrics = read_file(base + "/run/metrics.csv");
    EXPECT_NE(metrics.find("algo=bp"), std::string::npos);
    EXPECT_NE(metrics.find("disc_loss_l2"), std::string::npos);
    // BP checkpoint loads back as a BP payload
    BpCheckpoint ckpt = load_bp_checkpoint(base + "/run/checkpoint.ffc");
    EXPECT_EQ(ckpt.net.num_layers(), 2);
}

TEST(Checkpoints, FfRoundTripPreservesNetwork) {
    TrainConfig tc;
    tc.filters = {2, 3};
    tc.kernel = 3;
    FfNetwork net(tc, 9, 9);
    Rng rng(8);
    net.init_params(rng);
    ClassifierHead head(net.feature_count(1));
    for (int64_t i = 0; i < head.weights.size(); ++i) head.weights[i] = rng.uniform(-1.0f, 1.0f);

    const std::string path = testing::TempDir() + "/ff_ckpt.ffc";
    save_ff_checkpoint(path, net, head, "epochs = 1\n");
    FfCheckpoint back = load_ff_checkpoint(path);
    EXPECT_EQ(back.config_echo, "epochs = 1\n");
    ASSERT_EQ(back.net.num_layers(), 2);
    EXPECT_EQ(back.net.input_h(), 9);
    for (int l = 0; l < 2; ++l) {
        EXPECT_EQ(back.net.layer(l).theta, net.layer(l).theta);
        for (int64_t i = 0; i < net.layer(l).weights.size(); ++i) {
            ASSERT_EQ(back.net.layer(l).weights[i], net.layer(l).weights[i]);
        }
    }
    for (int64_t i = 0; i < head.weights.size(); ++i) ASSERT_EQ(back.head.weights[i], head.weights[i]);

    // a dataset cache is not an FF checkpoint
    Dataset ds;
    ds.images = Tensor({1, 2, 2});
    ds.labels = {0};
    ds.split = "x";
    const std::string ds_path = testing::TempDir() + "/ds.ffc";
    save_dataset_cache(ds_path, ds);
    EXPECT_THROW(load_ff_checkpoint(ds_path), std::runtime_error);
}
