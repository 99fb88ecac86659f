#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ffcnn/conv.hpp"
#include "ffcnn/label_codec.hpp"
#include "ffcnn/ops.hpp"
#include "ffcnn/rng.hpp"
#include "ffcnn/tensor.hpp"

namespace ffcnn {

// Which image the linear classifier consumes during training. Inference
// always uses the neutral (label-free) image, since the label is unknown.
enum class ClassifierInput { Neutral, TrueLabelTrain };

struct TrainConfig {
    std::vector<int> filters{128, 128, 128};  // per layer
    int kernel = 7;
    Padding padding = Padding::Same;
    int epochs = 200;
    int batch = 50;
    float lr = 5e-5f;
    float label_intensity = 0.35f;  // K
    LabelSetId label_set = LabelSetId::Set1;
    std::string label_map_file;  // optional override
    uint64_t seed = 1;
    bool include_first_layer_loss = false;
    bool pooling = false;
    bool sequential_steps = false;  // positive and negative in two separate updates
    ClassifierInput classifier_input = ClassifierInput::Neutral;

    void validate() const;
    LabelConfig label_config() const;
};

// One FF-trained convolutional layer: parameters, threshold and optimizer
// state. theta equals the number of activations the layer emits per sample.
struct FfLayer {
    ConvSpec spec;
    Tensor weights;  // [O,C,k,k]
    Tensor bias;     // [O]
    float theta = 0.0f;
    AdamState adam_w;
    AdamState adam_b;
    bool trainable = true;
};

// Per-batch forward record. raw holds post-ReLU activations before pooling;
// emitted is what the layer sends on (pooled when pooling is enabled) and is
// the tensor goodness is computed from; normalized is the rms-normalized
// emitted tensor the next layer consumes.
struct FfForward {
    std::vector<Tensor> inputs;
    std::vector<Tensor> raw;
    std::vector<Tensor> emitted;
    std::vector<Tensor> normalized;
    std::vector<PoolMask> pool_masks;  // empty mask when the layer has no pool
    std::vector<Tensor> goodness;      // [B] per layer
};

class FfNetwork {
   public:
    FfNetwork() = default;  // empty shell for checkpoint loading
    FfNetwork(const TrainConfig& config, int input_h, int input_w, int input_c = 1);

    // reassembles a network from checkpointed parts
    static FfNetwork from_parts(std::vector<FfLayer> layers, bool pooling, int input_h, int input_w, int input_c);

    // uniform +-sqrt(6/fan_in) weights, zero bias
    void init_params(Rng& rng);

    int num_layers() const { return static_cast<int>(layers_.size()); }
    FfLayer& layer(int i) { return layers_[static_cast<size_t>(i)]; }
    const FfLayer& layer(int i) const { return layers_[static_cast<size_t>(i)]; }
    bool pooling() const { return pooling_; }
    int input_h() const { return input_h_; }
    int input_w() const { return input_w_; }
    bool pool_after(int layer_index) const;

    // accepts [B,H,W] or [B,1,H,W]
    FfForward forward(const Tensor& batch) const;

    // total activations per sample over layers >= from_layer (0-based)
    int64_t feature_count(int from_layer) const;

   private:
    std::vector<FfLayer> layers_;
    bool pooling_ = false;
    int input_h_ = 0;
    int input_w_ = 0;
    int input_c_ = 1;
};

// g[b] = sum_i y[b,i]^2 over post-ReLU activations
Tensor layer_goodness(const Tensor& activations);

struct LayerLoss {
    Tensor probability;  // sigma(g - theta) for positive, sigma(theta - g) for negative
    Tensor loss;         // -log(probability), per sample
};

LayerLoss layer_loss(const Tensor& goodness, float theta, bool is_positive);

// mean over the batch of the per-sample sum of layer losses; the first
// layer's term is omitted unless include_first is set
double network_loss(const std::vector<Tensor>& per_layer_losses, bool include_first);

struct DiscriminationMetrics {
    double accuracy_pct = 0.0;
    double bce_loss = 0.0;
};

// > 0.5 means the layer recognizes the sample as positive data
DiscriminationMetrics discrimination_metrics(const Tensor& probabilities, const std::vector<uint8_t>& is_positive);

// constant for the first ceil(E/2) epochs, then linear cooldown
// lr(e) = (2*lr/E) * (1 + E - e); e is 1-based
float lr_schedule(int epoch, int total_epochs, float base_lr);

struct LayerGrads {
    Tensor weight_grad;
    Tensor bias_grad;
};

struct FfStepStats {
    double network_loss = 0.0;
    std::vector<DiscriminationMetrics> per_layer;  // over the pos+neg batch
};

// Layer-local gradients of the cumulative loss for a pos/neg forward pair.
// Each layer's gradient involves only its own loss term; non-trainable
// layers (the first, under exclusion) get empty gradients.
FfStepStats ff_compute_gradients(const FfNetwork& net, const FfForward& fwd, int positive_count,
                                 bool include_first, std::vector<LayerGrads>& grads);

// one combined positive+negative update (or two sequential ones)
FfStepStats ff_train_step(FfNetwork& net, const Tensor& pos_batch, const Tensor& neg_batch, float lr,
                          const TrainConfig& config);

}  // namespace ffcnn
