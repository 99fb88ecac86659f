#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ffcnn/data_io.hpp"
#include "ffcnn/ff_engine.hpp"

namespace ffcnn {

// 10-way linear readout over the normalized activations of every layer
// except the first. Zero-initialized; trained with softmax cross-entropy.
struct ClassifierHead {
    Tensor weights;  // [10, H_total]
    Tensor bias;     // [10]
    AdamState adam_w;
    AdamState adam_b;

    ClassifierHead() = default;
    explicit ClassifierHead(int64_t feature_count);
};

// Runs the label-free image batch through the network and concatenates the
// rms-normalized activations of layers 2..L, flattened in layer order.
Tensor classifier_features(const FfNetwork& net, const Tensor& image_batch);  // [B, H_total]
Tensor classifier_features(const FfNetwork& net, const FfForward& fwd);

Tensor classifier_logits(const ClassifierHead& head, const Tensor& features);  // [B, 10]

// softmax cross-entropy Adam step; features are detached from the network
void train_classifier_step(ClassifierHead& head, const Tensor& features, const std::vector<uint8_t>& labels,
                           float lr);

// argmax over the 10 logits; ties break toward the lower label index
int predict_classifier(const ClassifierHead& head, const FfNetwork& net, const Tensor& image);

// Eq.-4 readout: forward the image once per candidate label and return the
// label with the highest summed squared activation over layers >= 2.
int predict_goodness(const FfNetwork& net, const Tensor& image, const WaveBank& bank);

// per-label goodness scores f_m for one image
std::array<double, 10> goodness_scores(const FfNetwork& net, const Tensor& image, const WaveBank& bank);

enum class InferenceMode { Classifier, Goodness };

using ConfusionMatrix = std::array<std::array<int, 10>, 10>;  // row = true, col = predicted

struct EvalResult {
    double accuracy_pct = 0.0;
    ConfusionMatrix confusion{};
    int total = 0;
};

EvalResult evaluate(const FfNetwork& net, const ClassifierHead* head, const Dataset& dataset, InferenceMode mode,
                    const WaveBank& bank);

void write_confusion_csv(const std::string& path, const ConfusionMatrix& m);
void render_confusion(const std::string& path, const ConfusionMatrix& m);

}  // namespace ffcnn
