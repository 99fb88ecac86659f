#include "ffcnn/bp_baseline.hpp"

#include <cmath>
#include <stdexcept>

#include "ffcnn/conv.hpp"
#include "ffcnn/parallel.hpp"

namespace ffcnn {

BpNetwork::BpNetwork(const TrainConfig& config, int input_h, int input_w, int input_c)
    : pooling_(config.pooling), input_h_(input_h), input_w_(input_w), input_c_(input_c) {
    int c = input_c;
    int h = input_h;
    int w = input_w;
    for (size_t i = 0; i < config.filters.size(); ++i) {
        FfLayer layer;
        layer.spec = ConvSpec{c, config.filters[i], config.kernel, config.padding};
        layer.spec.validate();
        layer.weights = Tensor({layer.spec.out_channels, c, config.kernel, config.kernel});
        layer.bias = Tensor({layer.spec.out_channels});
        layer.adam_w = AdamState(layer.weights.shape());
        layer.adam_b = AdamState(layer.bias.shape());
        h = layer.spec.out_extent(h);
        w = layer.spec.out_extent(w);
        if (pooling_ && i + 1 < config.filters.size()) {
            h /= 2;
            w /= 2;
        }
        convs_.push_back(std::move(layer));
        c = config.filters[i];
    }
    feature_count_ = static_cast<int64_t>(c) * h * w;
    head_w_ = Tensor({10, static_cast<int>(feature_count_)});
    head_b_ = Tensor({10});
    adam_head_w_ = AdamState(head_w_.shape());
    adam_head_b_ = AdamState(head_b_.shape());
}

BpNetwork BpNetwork::from_parts(std::vector<FfLayer> convs, Tensor head_w, Tensor head_b, bool pooling, int input_h,
                                int input_w, int input_c) {
    BpNetwork net;
    net.convs_ = std::move(convs);
    net.head_w_ = std::move(head_w);
    net.head_b_ = std::move(head_b);
    net.adam_head_w_ = AdamState(net.head_w_.shape());
    net.adam_head_b_ = AdamState(net.head_b_.shape());
    net.pooling_ = pooling;
    net.input_h_ = input_h;
    net.input_w_ = input_w;
    net.input_c_ = input_c;
    net.feature_count_ = net.head_w_.dim(1);
    return net;
}

void BpNetwork::init_params(Rng& rng) {
    for (auto& layer : convs_) {
        const float fan_in = static_cast<float>(layer.spec.in_channels) * layer.spec.kernel * layer.spec.kernel;
        const float bound = std::sqrt(6.0f / fan_in);
        for (int64_t i = 0; i < layer.weights.size(); ++i) layer.weights[i] = rng.uniform(-bound, bound);
        layer.bias.fill(0.0f);
    }
    const float bound = std::sqrt(6.0f / static_cast<float>(feature_count_));
    for (int64_t i = 0; i < head_w_.size(); ++i) head_w_[i] = rng.uniform(-bound, bound);
    head_b_.fill(0.0f);
}

int64_t BpNetwork::conv_param_count() const {
    int64_t n = 0;
    for (const auto& layer : convs_) n += layer.weights.size() + layer.bias.size();
    return n;
}

BpNetwork::Forward BpNetwork::forward(const Tensor& batch) const {
    Tensor x = batch;
    if (x.rank() == 3) x = Tensor({x.dim(0), 1, x.dim(1), x.dim(2)}, x.vec());
    if (x.rank() != 4 || x.dim(1) != input_c_) {
        throw std::invalid_argument("bp_forward: expected [B," + std::to_string(input_c_) + ",H,W], got " +
                                    batch.shape_str());
    }
    Forward fwd;
    const int batch_n = x.dim(0);
    for (int l = 0; l < num_layers(); ++l) {
        const FfLayer& layer = convs_[static_cast<size_t>(l)];
        fwd.inputs.push_back(x);
        Tensor y = relu(conv2d_forward(x, layer.weights, layer.bias, layer.spec));
        if (pool_after(l)) {
            Pool2Result pooled = maxpool2(y);
            fwd.activations.push_back(std::move(y));
            fwd.pool_masks.push_back(std::move(pooled.mask));
            fwd.emitted.push_back(std::move(pooled.output));
        } else {
            fwd.emitted.push_back(y);
            fwd.activations.push_back(std::move(y));
            fwd.pool_masks.emplace_back();
        }
        x = fwd.emitted.back();
    }
    fwd.features = Tensor({batch_n, static_cast<int>(feature_count_)}, x.vec());

    // linear readout
    fwd.logits = Tensor({batch_n, 10});
    const float* f_p = fwd.features.data();
    const float* w_p = head_w_.data();
    float* l_p = fwd.logits.data();
    parallel_for(batch_n, [&](int64_t lo, int64_t hi) {
        for (int64_t b = lo; b < hi; ++b) {
            const float* f_row = f_p + b * feature_count_;
            for (int cls = 0; cls < 10; ++cls) {
                const float* w_row = w_p + static_cast<size_t>(cls) * feature_count_;
                double acc = 0.0;
                for (int64_t i = 0; i < feature_count_; ++i) acc += static_cast<double>(w_row[i]) * f_row[i];
                l_p[b * 10 + cls] = static_cast<float>(acc + head_b_[cls]);
            }
        }
    });
    return fwd;
}

double BpNetwork::train_step(const Tensor& batch, const std::vector<uint8_t>& labels, float lr, int* correct_out) {
    Forward fwd = forward(batch);
    const int batch_n = fwd.logits.dim(0);
    if (static_cast<int>(labels.size()) != batch_n) {
        throw std::invalid_argument("bp_train: label count " + std::to_string(labels.size()) + " != batch extent " +
                                    std::to_string(batch_n));
    }

    // softmax cross-entropy and dlogits = (softmax - onehot)/B
    Tensor dlogits({batch_n, 10});
    double loss = 0.0;
    int correct = 0;
    for (int b = 0; b < batch_n; ++b) {
        const float* row = fwd.logits.data() + static_cast<size_t>(b) * 10;
        float peak = row[0];
        int best = 0;
        for (int c = 1; c < 10; ++c) {
            if (row[c] > peak) {
                peak = row[c];
                best = c;
            }
        }
        if (best == labels[static_cast<size_t>(b)]) ++correct;
        double sum = 0.0;
        for (int c = 0; c < 10; ++c) sum += std::exp(static_cast<double>(row[c]) - peak);
        const int truth = labels[static_cast<size_t>(b)];
        loss += -(static_cast<double>(row[truth]) - peak - std::log(sum));
        for (int c = 0; c < 10; ++c) {
            const double p = std::exp(static_cast<double>(row[c]) - peak) / sum;
            dlogits.at(b, c) = static_cast<float>((p - (c == truth ? 1.0 : 0.0)) / batch_n);
        }
    }
    loss /= batch_n;
    if (correct_out) *correct_out = correct;

    // head gradients and feature gradient
    Tensor head_wg({10, static_cast<int>(feature_count_)});
    Tensor head_bg({10});
    const float* f_p = fwd.features.data();
    parallel_for(10, [&](int64_t lo, int64_t hi) {
        for (int64_t c = lo; c < hi; ++c) {
            float* wg_row = head_wg.data() + c * feature_count_;
            double bacc = 0.0;
            for (int b = 0; b < batch_n; ++b) {
                const float d = dlogits.at(b, static_cast<int>(c));
                bacc += d;
                const float* f_row = f_p + static_cast<size_t>(b) * feature_count_;
                for (int64_t i = 0; i < feature_count_; ++i) wg_row[i] += d * f_row[i];
            }
            head_bg[c] = static_cast<float>(bacc);
        }
    });

    Tensor dfeat({batch_n, static_cast<int>(feature_count_)});
    const float* w_p = head_w_.data();
    parallel_for(batch_n, [&](int64_t lo, int64_t hi) {
        for (int64_t b = lo; b < hi; ++b) {
            float* df_row = dfeat.data() + b * feature_count_;
            for (int cls = 0; cls < 10; ++cls) {
                const float d = dlogits.at(static_cast<int>(b), cls);
                const float* w_row = w_p + static_cast<size_t>(cls) * feature_count_;
                for (int64_t i = 0; i < feature_count_; ++i) df_row[i] += d * w_row[i];
            }
        }
    });

    // chain back through the conv stack
    Tensor upstream(fwd.emitted.back().shape(), dfeat.vec());
    std::vector<ConvParamGrad> grads(static_cast<size_t>(num_layers()));
    for (int l = num_layers() - 1; l >= 0; --l) {
        const FfLayer& layer = convs_[static_cast<size_t>(l)];
        if (pool_after(l)) upstream = maxpool2_backward(fwd.pool_masks[static_cast<size_t>(l)], upstream);
        Tensor dz = relu_backward(fwd.activations[static_cast<size_t>(l)], upstream);
        grads[static_cast<size_t>(l)] = conv2d_weight_grad(fwd.inputs[static_cast<size_t>(l)], dz, layer.spec);
        if (l > 0) upstream = conv2d_input_grad(layer.weights, dz, layer.spec);
    }

    adam_step(head_w_, head_wg, adam_head_w_, lr);
    adam_step(head_b_, head_bg, adam_head_b_, lr);
    for (int l = 0; l < num_layers(); ++l) {
        FfLayer& layer = convs_[static_cast<size_t>(l)];
        adam_step(layer.weights, grads[static_cast<size_t>(l)].weight_grad, layer.adam_w, lr);
        adam_step(layer.bias, grads[static_cast<size_t>(l)].bias_grad, layer.adam_b, lr);
    }
    return loss;
}

int BpNetwork::predict(const Tensor& image) const {
    Tensor batch({1, image.dim(0), image.dim(1)}, image.vec());
    Forward fwd = forward(batch);
    const float* row = fwd.logits.data();
    int best = 0;
    for (int c = 1; c < 10; ++c) {
        if (row[c] > row[best]) best = c;
    }
    return best;
}

}  // namespace ffcnn
