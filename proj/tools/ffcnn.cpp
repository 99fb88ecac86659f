// Experiment runner: train / eval / cam / sweep / compare / gen-data.
#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ffcnn/experiment.hpp"
#include "ffcnn/synth_digits.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::optional<uint64_t> seed;
    std::string out_dir;
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
    auto* opt = cmd->add_option("--config", args.config_path, "configuration file (key = value lines)");
    if (config_required) opt->required();
    cmd->add_option("--seed", args.seed, "override the config seed");
    cmd->add_option("--out", args.out_dir, "override the output directory");
    cmd->add_option("--threads", args.threads, "worker threads for kernels (0 = all cores)");
}

ffcnn::ExperimentConfig load_config(const CommonArgs& args) {
    ffcnn::ExperimentConfig cfg = ffcnn::parse_config_file(args.config_path);
    if (args.seed) cfg.train.seed = *args.seed;
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    if (args.threads > 0) cfg.threads = args.threads;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"forward-forward CNN trainer and experiment runner"};
    app.require_subcommand(1);

    CommonArgs train_args, eval_args, cam_args, sweep_args, compare_args;

    auto* train_cmd = app.add_subcommand("train", "train a network, write checkpoint + metrics CSV");
    add_common(train_cmd, train_args);

    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint: accuracy + confusion matrix");
    add_common(eval_cmd, eval_args);
    std::string eval_checkpoint, eval_split = "test", eval_mode = "classifier";
    eval_cmd->add_option("--checkpoint", eval_checkpoint, "checkpoint file")->required();
    eval_cmd->add_option("--split", eval_split, "train | val | test")->check(CLI::IsMember({"train", "val", "test"}));
    eval_cmd->add_option("--mode", eval_mode, "classifier | goodness")
        ->check(CLI::IsMember({"classifier", "goodness"}));

    auto* cam_cmd = app.add_subcommand("cam", "class activation maps for one image");
    add_common(cam_cmd, cam_args);
    std::string cam_checkpoint, cam_split = "test", cam_layers;
    int cam_index = 0;
    std::optional<int> cam_class;
    cam_cmd->add_option("--checkpoint", cam_checkpoint, "checkpoint file")->required();
    cam_cmd->add_option("--image-index", cam_index, "image index within the split")->required();
    cam_cmd->add_option("--class", cam_class, "target class (default: the true label)");
    cam_cmd->add_option("--layers", cam_layers, "comma list of layers >= 2 (default: all)");
    cam_cmd->add_option("--split", cam_split, "train | val | test")->check(CLI::IsMember({"train", "val", "test"}));

    auto* sweep_cmd = app.add_subcommand("sweep", "train every cell of the config's sweep grids");
    add_common(sweep_cmd, sweep_args);

    auto* compare_cmd = app.add_subcommand("compare", "FF vs BP under a matched architecture");
    add_common(compare_cmd, compare_args);

    auto* gen_cmd = app.add_subcommand("gen-data", "write a synthetic digit data set in IDX format");
    std::string gen_out = "data";
    uint64_t gen_seed = 7;
    int gen_train = 60000, gen_test = 10000;
    gen_cmd->add_option("--out", gen_out, "output directory");
    gen_cmd->add_option("--seed", gen_seed, "generator seed");
    gen_cmd->add_option("--train-count", gen_train, "training image count");
    gen_cmd->add_option("--test-count", gen_test, "test image count");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train_cmd->parsed()) return ffcnn::run_train(load_config(train_args));
        if (eval_cmd->parsed()) {
            return ffcnn::run_eval(load_config(eval_args), eval_checkpoint, eval_split,
                                   eval_mode == "goodness" ? ffcnn::InferenceMode::Goodness
                                                           : ffcnn::InferenceMode::Classifier);
        }
        if (cam_cmd->parsed()) {
            std::vector<int> layers;
            if (!cam_layers.empty()) {
                std::stringstream ss(cam_layers);
                std::string item;
                while (std::getline(ss, item, ',')) layers.push_back(std::stoi(item));
            }
            return ffcnn::run_cam(load_config(cam_args), cam_checkpoint, cam_index, cam_class, layers, cam_split);
        }
        if (sweep_cmd->parsed()) return ffcnn::run_sweep(load_config(sweep_args));
        if (compare_cmd->parsed()) return ffcnn::run_compare(load_config(compare_args));
        if (gen_cmd->parsed()) {
            std::filesystem::create_directories(gen_out);
            ffcnn::write_synthetic_idx(gen_out, gen_seed, gen_train, gen_test);
            std::printf("synthetic digit data set written to %s (%d train, %d test)\n", gen_out.c_str(), gen_train,
                        gen_test);
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
