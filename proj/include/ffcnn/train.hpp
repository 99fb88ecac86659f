#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ffcnn/bp_baseline.hpp"
#include "ffcnn/data_io.hpp"
#include "ffcnn/ff_engine.hpp"
#include "ffcnn/inference.hpp"

namespace ffcnn {

struct EpochRow {
    int epoch = 0;
    float lr = 0.0f;
    double network_loss = 0.0;
    std::vector<double> disc_loss;  // one per layer
    std::vector<double> disc_acc;
    double train_acc = 0.0;  // running classifier accuracy over the epoch
    double val_acc = 0.0;    // classifier inference on the validation subset
};

struct RunMetrics {
    std::vector<EpochRow> epochs;
    double test_accuracy_pct = -1.0;  // filled by the caller's final eval
    ConfusionMatrix confusion{};
};

struct TrainHooks {
    // one-way metrics channel; rows arrive in epoch order
    std::function<void(const EpochRow&)> on_epoch;
    int val_limit = 0;  // evaluate val_acc on the first N validation images (0 = all)
};

// Runs E epochs of FF training over seeded shuffled batches with fresh
// negative labels every epoch, training the linear classifier head
// concurrently on the same lr schedule.
RunMetrics train_ff(FfNetwork& net, ClassifierHead& head, const Dataset& train, const Dataset& val,
                    const TrainConfig& config, const TrainHooks& hooks = {});

// backprop baseline on the same metrics schema (disc columns stay zero)
RunMetrics train_bp(BpNetwork& net, const Dataset& train, const Dataset& val, const TrainConfig& config,
                    const TrainHooks& hooks = {});

// metrics CSV: comment lines carry provenance, then one row per epoch
void write_metrics_csv(const std::string& path, const RunMetrics& metrics, int layer_count,
                       const std::vector<std::string>& comment_lines);

// checkpoint payloads (shared container format; see checkpoint.hpp)
void save_ff_checkpoint(const std::string& path, const FfNetwork& net, const ClassifierHead& head,
                        const std::string& config_echo);
struct FfCheckpoint {
    FfNetwork net;
    ClassifierHead head;
    std::string config_echo;
};
FfCheckpoint load_ff_checkpoint(const std::string& path);

void save_bp_checkpoint(const std::string& path, const BpNetwork& net, const std::string& config_echo);
struct BpCheckpoint {
    BpNetwork net;
    std::string config_echo;
};
BpCheckpoint load_bp_checkpoint(const std::string& path);

}  // namespace ffcnn
