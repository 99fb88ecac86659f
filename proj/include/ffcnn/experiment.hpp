#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ffcnn/data_io.hpp"
#include "ffcnn/ff_engine.hpp"
#include "ffcnn/inference.hpp"

namespace ffcnn {

// Everything a run needs: the training hyperparameters plus data paths,
// output directory, inference mode, desk-scale limits and sweep grids.
struct ExperimentConfig {
    TrainConfig train;
    std::string data_dir;
    std::string out_dir = "out";
    std::string algo = "ff";  // ff | bp
    float bp_lr = 1e-3f;
    InferenceMode inference_mode = InferenceMode::Classifier;
    int train_limit = 0;  // 0 = full split
    int val_limit = 0;
    int test_limit = 0;
    bool final_test = true;
    int threads = 0;

    // sweep grids: one entry per cell; filters cells may be per-layer lists
    std::vector<std::vector<int>> sweep_filters;
    std::vector<int> sweep_kernels;
    std::vector<int> sweep_batches;
    std::vector<float> sweep_k;
    std::vector<int> sweep_label_sets;
    int sweep_workers = 1;

    // canonical flat key=value text; excludes out_dir so identical runs into
    // different directories stay byte-identical
    std::string echo() const;
    uint64_t hash() const;
    std::string hash_hex() const;
};

// strict parser: unknown or duplicate keys are errors
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin = "config");
ExperimentConfig parse_config_file(const std::string& path);

struct LoadedData {
    Dataset train;
    Dataset val;
    Dataset test;
};

// load -> 50k/10k split -> desk-scale limits
LoadedData load_experiment_data(const ExperimentConfig& cfg);

// subcommand bodies; each returns a process exit status
int run_train(const ExperimentConfig& cfg);
int run_eval(const ExperimentConfig& cfg, const std::string& checkpoint_path, const std::string& split,
             InferenceMode mode);
int run_cam(const ExperimentConfig& cfg, const std::string& checkpoint_path, int image_index,
            std::optional<int> target_class, const std::vector<int>& layers, const std::string& split);
int run_sweep(const ExperimentConfig& cfg);
int run_compare(const ExperimentConfig& cfg);

// grid expansion for the sweep runner (cartesian product over the non-empty
// grids; empty grids pin the base value)
std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig& cfg);

}  // namespace ffcnn
