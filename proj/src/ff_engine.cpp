#include "ffcnn/ff_engine.hpp"

#include <cmath>
#include <stdexcept>

#include "ffcnn/parallel.hpp"

namespace ffcnn {

void TrainConfig::validate() const {
    if (filters.empty()) throw std::invalid_argument("config: filters list is empty");
    for (int f : filters) {
        if (f < 1) throw std::invalid_argument("config: filter count " + std::to_string(f) + " must be >= 1");
    }
    if (kernel < 1 || kernel % 2 == 0) {
        throw std::invalid_argument("config: kernel " + std::to_string(kernel) + " must be odd");
    }
    if (epochs < 1) throw std::invalid_argument("config: epochs must be >= 1");
    if (batch < 1) throw std::invalid_argument("config: batch must be >= 1");
    if (!(lr > 0.0f)) throw std::invalid_argument("config: lr must be > 0");
    if (label_intensity < 0.0f || label_intensity > 1.0f) {
        throw std::invalid_argument("config: label intensity K outside [0,1]");
    }
    if (filters.size() == 1 && !include_first_layer_loss) {
        throw std::invalid_argument("config: a single-layer network with the first-layer loss excluded has no trainable signal");
    }
}

LabelConfig TrainConfig::label_config() const {
    LabelSet set = label_map_file.empty() ? LabelSet::from_id(label_set) : LabelSet::from_file(label_map_file);
    return LabelConfig(set, label_intensity);
}

FfNetwork::FfNetwork(const TrainConfig& config, int input_h, int input_w, int input_c)
    : pooling_(config.pooling), input_h_(input_h), input_w_(input_w), input_c_(input_c) {
    config.validate();
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
        layer.trainable = config.include_first_layer_loss || i > 0;

        h = layer.spec.out_extent(h);
        w = layer.spec.out_extent(w);
        if (h < 1 || w < 1) {
            throw std::invalid_argument("network: layer " + std::to_string(i + 1) +
                                        " output extent collapsed to zero (valid padding too deep)");
        }
        if (pooling_ && i + 1 < config.filters.size()) {
            h /= 2;
            w /= 2;
        }
        // theta = activation count the layer emits per sample
        layer.theta = static_cast<float>(static_cast<int64_t>(layer.spec.out_channels) * h * w);
        layers_.push_back(std::move(layer));
        c = config.filters[i];
    }
}

FfNetwork FfNetwork::from_parts(std::vector<FfLayer> layers, bool pooling, int input_h, int input_w, int input_c) {
    FfNetwork net;
    net.layers_ = std::move(layers);
    net.pooling_ = pooling;
    net.input_h_ = input_h;
    net.input_w_ = input_w;
    net.input_c_ = input_c;
    return net;
}

void FfNetwork::init_params(Rng& rng) {
    for (auto& layer : layers_) {
        const float fan_in = static_cast<float>(layer.spec.in_channels) * layer.spec.kernel * layer.spec.kernel;
        const float bound = std::sqrt(6.0f / fan_in);
        for (int64_t i = 0; i < layer.weights.size(); ++i) layer.weights[i] = rng.uniform(-bound, bound);
        layer.bias.fill(0.0f);
    }
}

bool FfNetwork::pool_after(int layer_index) const {
    return pooling_ && layer_index + 1 < num_layers();
}

FfForward FfNetwork::forward(const Tensor& batch) const {
    Tensor x = batch;
    if (x.rank() == 3) {
        x = Tensor({x.dim(0), 1, x.dim(1), x.dim(2)}, x.vec());
    }
    if (x.rank() != 4 || x.dim(1) != input_c_) {
        throw std::invalid_argument("forward: expected [B," + std::to_string(input_c_) + ",H,W], got " +
                                    batch.shape_str());
    }

    FfForward fwd;
    const int n = num_layers();
    fwd.inputs.reserve(n);
    for (int l = 0; l < n; ++l) {
        const FfLayer& layer = layers_[static_cast<size_t>(l)];
        fwd.inputs.push_back(x);
        Tensor z = conv2d_forward(x, layer.weights, layer.bias, layer.spec);
        Tensor y = relu(z);
        if (pool_after(l)) {
            Pool2Result pooled = maxpool2(y);
            fwd.raw.push_back(std::move(y));
            fwd.pool_masks.push_back(std::move(pooled.mask));
            fwd.emitted.push_back(std::move(pooled.output));
        } else {
            fwd.emitted.push_back(y);
            fwd.raw.push_back(std::move(y));
            fwd.pool_masks.emplace_back();
        }
        RmsNormResult norm = rms_normalize(fwd.emitted.back());
        fwd.goodness.push_back(layer_goodness(fwd.emitted.back()));
        fwd.normalized.push_back(std::move(norm.normalized));
        x = fwd.normalized.back();
    }
    return fwd;
}

int64_t FfNetwork::feature_count(int from_layer) const {
    int h = input_h_;
    int w = input_w_;
    int64_t total = 0;
    for (int l = 0; l < num_layers(); ++l) {
        h = layers_[static_cast<size_t>(l)].spec.out_extent(h);
        w = layers_[static_cast<size_t>(l)].spec.out_extent(w);
        if (pool_after(l)) {
            h /= 2;
            w /= 2;
        }
        if (l >= from_layer) total += static_cast<int64_t>(layers_[static_cast<size_t>(l)].spec.out_channels) * h * w;
    }
    return total;
}

Tensor layer_goodness(const Tensor& activations) {
    if (activations.rank() < 2) {
        throw std::invalid_argument("layer_goodness: need a sample axis, got shape " + activations.shape_str());
    }
    const int batch = activations.dim(0);
    const int64_t n_flat = activations.size() / batch;
    Tensor g({batch});
    const float* p = activations.data();
    float* g_p = g.data();
    parallel_for(batch, [&](int64_t lo, int64_t hi) {
        for (int64_t b = lo; b < hi; ++b) {
            const float* row = p + b * n_flat;
            double acc = 0.0;
            for (int64_t i = 0; i < n_flat; ++i) acc += static_cast<double>(row[i]) * row[i];
            g_p[b] = static_cast<float>(acc);
        }
    });
    return g;
}

namespace {

// numerically stable sigma(x) and -log(sigma(x))
inline double stable_sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double softplus_neg(double x) {  // -log(sigma(x)) = log(1 + exp(-x))
    if (x > 0.0) return std::log1p(std::exp(-x));
    return -x + std::log1p(std::exp(x));
}

}  // namespace

LayerLoss layer_loss(const Tensor& goodness, float theta, bool is_positive) {
    if (!(theta > 0.0f)) {
        throw std::invalid_argument("layer_loss: theta " + std::to_string(theta) + " must be > 0");
    }
    const int batch = goodness.dim(0);
    LayerLoss out{Tensor({batch}), Tensor({batch})};
    const float* g = goodness.data();
    for (int b = 0; b < batch; ++b) {
        const double x = is_positive ? static_cast<double>(g[b]) - theta : theta - static_cast<double>(g[b]);
        out.probability[b] = static_cast<float>(stable_sigmoid(x));
        out.loss[b] = static_cast<float>(softplus_neg(x));
    }
    return out;
}

double network_loss(const std::vector<Tensor>& per_layer_losses, bool include_first) {
    if (per_layer_losses.size() < 2 && !include_first) {
        throw std::invalid_argument("network_loss: a single-layer network with the first layer excluded has no loss");
    }
    if (per_layer_losses.empty()) throw std::invalid_argument("network_loss: no layers");
    const int batch = per_layer_losses[0].dim(0);
    double total = 0.0;
    for (size_t l = include_first ? 0 : 1; l < per_layer_losses.size(); ++l) {
        const Tensor& t = per_layer_losses[l];
        for (int b = 0; b < batch; ++b) total += t[b];
    }
    return total / batch;
}

DiscriminationMetrics discrimination_metrics(const Tensor& probabilities, const std::vector<uint8_t>& is_positive) {
    const int batch = probabilities.dim(0);
    if (static_cast<int>(is_positive.size()) != batch) {
        throw std::invalid_argument("discrimination_metrics: flag count " + std::to_string(is_positive.size()) +
                                    " != batch extent " + std::to_string(batch));
    }
    DiscriminationMetrics m;
    int correct = 0;
    double bce = 0.0;
    for (int b = 0; b < batch; ++b) {
        const double p = probabilities[b];
        const bool says_positive = p > 0.5;
        if (says_positive == (is_positive[static_cast<size_t>(b)] != 0)) ++correct;
        const double p_true = is_positive[static_cast<size_t>(b)] ? p : 1.0 - p;
        bce += -std::log(std::max(p_true, 1e-12));
    }
    m.accuracy_pct = 100.0 * correct / batch;
    m.bce_loss = bce / batch;
    return m;
}

float lr_schedule(int epoch, int total_epochs, float base_lr) {
    if (epoch < 1 || epoch > total_epochs) {
        throw std::invalid_argument("lr_schedule: epoch " + std::to_string(epoch) + " outside 1.." +
                                    std::to_string(total_epochs));
    }
    const int half = (total_epochs + 1) / 2;
    if (epoch <= half) return base_lr;
    return 2.0f * base_lr / static_cast<float>(total_epochs) * static_cast<float>(1 + total_epochs - epoch);
}

FfStepStats ff_compute_gradients(const FfNetwork& net, const FfForward& fwd, int positive_count,
                                 bool include_first, std::vector<LayerGrads>& grads) {
    const int n = net.num_layers();
    const int total = fwd.goodness[0].dim(0);
    grads.assign(static_cast<size_t>(n), LayerGrads{});

    std::vector<Tensor> losses;
    FfStepStats stats;

    std::vector<uint8_t> flags(static_cast<size_t>(total));
    for (int b = 0; b < total; ++b) flags[static_cast<size_t>(b)] = b < positive_count ? 1 : 0;

    for (int l = 0; l < n; ++l) {
        const FfLayer& layer = net.layer(l);
        const Tensor& g = fwd.goodness[static_cast<size_t>(l)];

        // membership probability sigma(g - theta) for the >0.5 rule, and the
        // per-sample loss with the positive/negative sign folded in
        Tensor prob_positive({total});
        Tensor loss({total});
        for (int b = 0; b < total; ++b) {
            const double margin = static_cast<double>(g[b]) - layer.theta;
            prob_positive[b] = static_cast<float>(stable_sigmoid(margin));
            loss[b] = static_cast<float>(softplus_neg(flags[static_cast<size_t>(b)] ? margin : -margin));
        }
        losses.push_back(loss);
        stats.per_layer.push_back(discrimination_metrics(prob_positive, flags));

        const bool contributes = include_first || l > 0;
        if (!contributes) continue;

        // dL/dg = -s * (1 - sigma(s*(g-theta))) / total for the batch-mean loss
        const Tensor& emitted = fwd.emitted[static_cast<size_t>(l)];
        const int64_t n_flat = emitted.size() / total;
        Tensor d_emitted(emitted.shape());
        const float* e_p = emitted.data();
        float* de_p = d_emitted.data();
        const float theta = layer.theta;
        const float* g_p = g.data();
        parallel_for(total, [&](int64_t lo, int64_t hi) {
            for (int64_t b = lo; b < hi; ++b) {
                const double sign = b < positive_count ? 1.0 : -1.0;
                const double margin = static_cast<double>(g_p[b]) - theta;
                // 1 - sigma(s*x) = sigma(-s*x), computed directly
                const double dg = -sign * stable_sigmoid(-sign * margin) / total;
                const float scale = static_cast<float>(2.0 * dg);  // d(sum y^2)/dy = 2y
                const float* e_row = e_p + b * n_flat;
                float* de_row = de_p + b * n_flat;
                for (int64_t i = 0; i < n_flat; ++i) de_row[i] = scale * e_row[i];
            }
        });

        Tensor d_raw = net.pool_after(l)
                           ? maxpool2_backward(fwd.pool_masks[static_cast<size_t>(l)], d_emitted)
                           : std::move(d_emitted);
        // raw is post-ReLU; positive entries mark where the pre-activation was positive
        Tensor dz = relu_backward(fwd.raw[static_cast<size_t>(l)], d_raw);
        ConvParamGrad pg = conv2d_weight_grad(fwd.inputs[static_cast<size_t>(l)], dz, layer.spec);
        grads[static_cast<size_t>(l)].weight_grad = std::move(pg.weight_grad);
        grads[static_cast<size_t>(l)].bias_grad = std::move(pg.bias_grad);
    }
    stats.network_loss = network_loss(losses, include_first);
    return stats;
}

namespace {

Tensor concat_batches(const Tensor& a, const Tensor& b) {
    if (a.rank() != b.rank()) {
        throw std::invalid_argument("concat: rank mismatch " + a.shape_str() + " vs " + b.shape_str());
    }
    for (int i = 1; i < a.rank(); ++i) {
        if (a.dim(i) != b.dim(i)) {
            throw std::invalid_argument("concat: extent mismatch at dim " + std::to_string(i) + ": " + a.shape_str() +
                                        " vs " + b.shape_str());
        }
    }
    std::vector<int> shape = a.shape();
    shape[0] = a.dim(0) + b.dim(0);
    std::vector<float> data;
    data.reserve(static_cast<size_t>(a.size() + b.size()));
    data.insert(data.end(), a.vec().begin(), a.vec().end());
    data.insert(data.end(), b.vec().begin(), b.vec().end());
    return Tensor(shape, std::move(data));
}

void apply_grads(FfNetwork& net, const std::vector<LayerGrads>& grads, float lr, bool include_first) {
    for (int l = 0; l < net.num_layers(); ++l) {
        if (!include_first && l == 0) continue;  // frozen first layer
        FfLayer& layer = net.layer(l);
        adam_step(layer.weights, grads[static_cast<size_t>(l)].weight_grad, layer.adam_w, lr);
        adam_step(layer.bias, grads[static_cast<size_t>(l)].bias_grad, layer.adam_b, lr);
    }
}

}  // namespace

FfStepStats ff_train_step(FfNetwork& net, const Tensor& pos_batch, const Tensor& neg_batch, float lr,
                          const TrainConfig& config) {
    std::vector<LayerGrads> grads;
    if (config.sequential_steps) {
        // two subsequent updates: positive data first, then negative
        FfForward fwd_pos = net.forward(pos_batch);
        FfStepStats s1 = ff_compute_gradients(net, fwd_pos, pos_batch.dim(0), config.include_first_layer_loss, grads);
        apply_grads(net, grads, lr, config.include_first_layer_loss);

        FfForward fwd_neg = net.forward(neg_batch);
        FfStepStats s2 = ff_compute_gradients(net, fwd_neg, 0, config.include_first_layer_loss, grads);
        apply_grads(net, grads, lr, config.include_first_layer_loss);

        FfStepStats out;
        out.network_loss = 0.5 * (s1.network_loss + s2.network_loss);
        for (size_t l = 0; l < s1.per_layer.size(); ++l) {
            DiscriminationMetrics m;
            m.accuracy_pct = 0.5 * (s1.per_layer[l].accuracy_pct + s2.per_layer[l].accuracy_pct);
            m.bce_loss = 0.5 * (s1.per_layer[l].bce_loss + s2.per_layer[l].bce_loss);
            out.per_layer.push_back(m);
        }
        return out;
    }

    Tensor combined = concat_batches(pos_batch, neg_batch);
    FfForward fwd = net.forward(combined);
    FfStepStats stats = ff_compute_gradients(net, fwd, pos_batch.dim(0), config.include_first_layer_loss, grads);
    apply_grads(net, grads, lr, config.include_first_layer_loss);
    return stats;
}

}  // namespace ffcnn
