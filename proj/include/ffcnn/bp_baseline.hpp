#pragma once

#include <vector>

#include "ffcnn/ff_engine.hpp"
#include "ffcnn/ops.hpp"

namespace ffcnn {

// Conventionally backprop-trained CNN with the architecture mirrored from
// the FF network: same conv stack, plus a 10-way linear readout over the
// last layer's flattened activations. No label waves, no layer
// normalization.
class BpNetwork {
   public:
    BpNetwork() = default;  // empty shell for checkpoint loading
    BpNetwork(const TrainConfig& config, int input_h, int input_w, int input_c = 1);

    static BpNetwork from_parts(std::vector<FfLayer> convs, Tensor head_w, Tensor head_b, bool pooling, int input_h,
                                int input_w, int input_c);

    void init_params(Rng& rng);

    int num_layers() const { return static_cast<int>(convs_.size()); }
    FfLayer& conv(int i) { return convs_[static_cast<size_t>(i)]; }
    const FfLayer& conv(int i) const { return convs_[static_cast<size_t>(i)]; }
    Tensor& head_weights() { return head_w_; }
    const Tensor& head_weights() const { return head_w_; }
    Tensor& head_bias() { return head_b_; }
    const Tensor& head_bias() const { return head_b_; }
    int input_h() const { return input_h_; }
    int input_w() const { return input_w_; }
    bool pooling() const { return pooling_; }
    bool pool_after(int layer_index) const { return pooling_ && layer_index + 1 < num_layers(); }
    int64_t conv_param_count() const;
    int64_t feature_count() const { return feature_count_; }

    struct Forward {
        std::vector<Tensor> inputs;       // consumed by each conv layer
        std::vector<Tensor> activations;  // post-ReLU (pre-pool)
        std::vector<Tensor> emitted;      // post-pool where pooled
        std::vector<PoolMask> pool_masks;
        Tensor features;  // [B, feat] flattened last layer
        Tensor logits;    // [B, 10]
    };

    // conv -> ReLU per layer, flatten, linear readout
    Forward forward(const Tensor& batch) const;

    // softmax cross-entropy step with gradients chained through every layer
    double train_step(const Tensor& batch, const std::vector<uint8_t>& labels, float lr,
                      int* correct_out = nullptr);

    int predict(const Tensor& image) const;

   private:
    std::vector<FfLayer> convs_;
    Tensor head_w_;  // [10, feat]
    Tensor head_b_;  // [10]
    AdamState adam_head_w_;
    AdamState adam_head_b_;
    bool pooling_ = false;
    int input_h_ = 0;
    int input_w_ = 0;
    int input_c_ = 1;
    int64_t feature_count_ = 0;
};

}  // namespace ffcnn
