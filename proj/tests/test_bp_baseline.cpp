#include <gtest/gtest.h>

#include <cmath>

#include "ffcnn/bp_baseline.hpp"
#include "oracles.hpp"

using namespace ffcnn;

namespace {

TrainConfig toy_config(std::vector<int> filters = {2, 2, 2}, int kernel = 3) {
    TrainConfig cfg;
    cfg.filters = std::move(filters);
    cfg.kernel = kernel;
    cfg.epochs = 1;
    cfg.batch = 4;
    cfg.lr = 1e-3f;
    cfg.seed = 3;
    return cfg;
}

// full forward in double for finite differences: conv+relu chain, flatten,
// linear head, softmax cross-entropy
double bp_loss_ref(const BpNetwork& net, const Tensor& batch, const std::vector<uint8_t>& labels,
                   int perturb_layer, int64_t perturb_index, double delta) {
    const int batch_n = batch.dim(0);
    const int h = batch.dim(1);
    const int w = batch.dim(2);
    std::vector<double> x = oracle::to_double(batch);
    int cur_c = 1, cur_h = h, cur_w = w;
    for (int l = 0; l < net.num_layers(); ++l) {
        const FfLayer& layer = net.conv(l);
        std::vector<double> weights = oracle::to_double(layer.weights);
        if (l == perturb_layer) weights[static_cast<size_t>(perturb_index)] += delta;
        x = oracle::conv_relu_ref(x, batch_n, cur_c, cur_h, cur_w, weights, layer.spec.out_channels,
                                  layer.spec.kernel, oracle::to_double(layer.bias),
                                  layer.spec.padding == Padding::Same);
        cur_c = layer.spec.out_channels;
        cur_h = layer.spec.out_extent(cur_h);
        cur_w = layer.spec.out_extent(cur_w);
    }
    const size_t feat = static_cast<size_t>(cur_c) * cur_h * cur_w;
    double total = 0.0;
    for (int b = 0; b < batch_n; ++b) {
        double logits[10];
        for (int c = 0; c < 10; ++c) {
            double acc = net.head_bias()[c];
            for (size_t i = 0; i < feat; ++i) acc += static_cast<double>(net.head_weights().at(c, static_cast<int>(i))) * x[b * feat + i];
            logits[c] = acc;
        }
        double peak = logits[0];
        for (int c = 1; c < 10; ++c) peak = std::max(peak, logits[c]);
        double sum = 0.0;
        for (int c = 0; c < 10; ++c) sum += std::exp(logits[c] - peak);
        total += -(logits[labels[static_cast<size_t>(b)]] - peak - std::log(sum));
    }
    return total / batch_n;
}

}  // namespace

TEST(BpForward, ZeroImageZeroBiasGivesZeroLogits) {
    TrainConfig cfg = toy_config();
    BpNetwork net(cfg, 8, 8);
    Rng rng(cfg.seed);
    net.init_params(rng);
    net.head_bias().fill(0.0f);
    Tensor batch({1, 8, 8});
    BpNetwork::Forward fwd = net.forward(batch);
    for (int c = 0; c < 10; ++c) EXPECT_EQ(fwd.logits[c], 0.0f);
}

TEST(BpForward, LogitsLinearInHeadWeights) {
    TrainConfig cfg = toy_config();
    BpNetwork net(cfg, 8, 8);
    Rng rng(5);
    net.init_params(rng);
    net.head_bias().fill(0.0f);
    Rng data_rng(1);
    Tensor batch = oracle::random_tensor({1, 8, 8}, data_rng, 0.0f, 1.0f);
    Tensor base = net.forward(batch).logits;
    for (int64_t i = 0; i < net.head_weights().size(); ++i) net.head_weights()[i] *= 3.0f;
    Tensor scaled = net.forward(batch).logits;
    for (int c = 0; c < 10; ++c) EXPECT_NEAR(scaled[c], 3.0f * base[c], 1e-4f * std::max(1.0f, std::fabs(base[c])));
}

TEST(BpForward, MatchesDoubleOracle) {
    TrainConfig cfg = toy_config({2, 2}, 3);
    BpNetwork net(cfg, 6, 6);
    Rng rng(7);
    net.init_params(rng);
    Rng data_rng(2);
    Tensor batch = oracle::random_tensor({2, 6, 6}, data_rng, 0.0f, 1.0f);
    BpNetwork::Forward fwd = net.forward(batch);

    std::vector<double> x = oracle::to_double(batch);
    x = oracle::conv_relu_ref(x, 2, 1, 6, 6, oracle::to_double(net.conv(0).weights), 2, 3,
                              oracle::to_double(net.conv(0).bias), true);
    x = oracle::conv_relu_ref(x, 2, 2, 6, 6, oracle::to_double(net.conv(1).weights), 2, 3,
                              oracle::to_double(net.conv(1).bias), true);
    for (int b = 0; b < 2; ++b) {
        for (int c = 0; c < 10; ++c) {
            double acc = net.head_bias()[c];
            for (int i = 0; i < 72; ++i) acc += static_cast<double>(net.head_weights().at(c, i)) * x[b * 72 + i];
            EXPECT_LE(oracle::rel_err(fwd.logits.at(b, c), acc, 1e-5), 1e-4);
        }
    }
}

TEST(BpTrain, EndToEndGradientMatchesFiniteDifferences) {
    // gradient of the total loss w.r.t. the FIRST layer's weights must chain
    // correctly through the whole stack
    TrainConfig cfg = toy_config({2, 2, 2}, 3);
    BpNetwork net(cfg, 6, 6);
    Rng rng(11);
    net.init_params(rng);
    Rng data_rng(3);
    Tensor batch = oracle::random_tensor({3, 6, 6}, data_rng, 0.0f, 1.0f);
    std::vector<uint8_t> labels{1, 5, 8};

    // capture the analytic layer-1 gradient by replaying the internal path:
    // run a step on a copy with tiny lr and recover grad from the Adam
    // moment (first step: m = 0.1 * g)
    BpNetwork probe = net;
    probe.train_step(batch, labels, 1e-12f);
    const Tensor& m1 = probe.conv(0).adam_w.m;

    const double h = 1e-3;
    for (int64_t i = 0; i < net.conv(0).weights.size(); ++i) {
        const double fd =
            (bp_loss_ref(net, batch, labels, 0, i, h) - bp_loss_ref(net, batch, labels, 0, i, -h)) / (2.0 * h);
        const double analytic = static_cast<double>(m1[i]) / 0.1;  // invert the beta1 factor
        EXPECT_LE(oracle::rel_err(analytic, fd, 1e-5), 1e-3) << "weight " << i;
    }
}

TEST(BpTrain, LossDecreasesOnFixedBatch) {
    TrainConfig cfg = toy_config({3, 3}, 3);
    BpNetwork net(cfg, 8, 8);
    Rng rng(13);
    net.init_params(rng);
    Rng data_rng(4);
    Tensor batch = oracle::random_tensor({8, 8, 8}, data_rng, 0.0f, 1.0f);
    std::vector<uint8_t> labels{0, 1, 2, 3, 4, 5, 6, 7};
    const double first = net.train_step(batch, labels, 1e-3f);
    double last = first;
    for (int step = 0; step < 30; ++step) last = net.train_step(batch, labels, 1e-3f);
    EXPECT_LT(last, first);
}

TEST(BpNetwork, ConvParameterCountMatchesFfNetwork) {
    TrainConfig cfg = toy_config({16, 16, 16}, 5);
    BpNetwork bp(cfg, 28, 28);
    FfNetwork ff(cfg, 28, 28);
    int64_t ff_params = 0;
    for (int l = 0; l < ff.num_layers(); ++l) {
        ff_params += ff.layer(l).weights.size() + ff.layer(l).bias.size();
    }
    EXPECT_EQ(bp.conv_param_count(), ff_params);
}

TEST(BpNetwork, PoolingMirrorsFfTopology) {
    TrainConfig cfg = toy_config({2, 2, 2}, 3);
    cfg.pooling = true;
    BpNetwork net(cfg, 28, 28);
    EXPECT_EQ(net.feature_count(), 2 * 7 * 7);
    Rng rng(15);
    net.init_params(rng);
    Rng data_rng(5);
    Tensor batch = oracle::random_tensor({2, 28, 28}, data_rng, 0.0f, 1.0f);
    BpNetwork::Forward fwd = net.forward(batch);
    EXPECT_EQ(fwd.logits.shape(), (std::vector<int>{2, 10}));
    std::vector<uint8_t> labels{3, 4};
    EXPECT_NO_THROW(net.train_step(batch, labels, 1e-3f));
}
