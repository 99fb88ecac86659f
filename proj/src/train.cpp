#include "ffcnn/train.hpp"

#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "ffcnn/checkpoint.hpp"

namespace ffcnn {

namespace {

// child stream tags off the master seed
enum StreamTag : uint64_t { kInitStream = 1, kShuffleStream = 2, kNegativeStream = 3 };

Tensor gather_images(const Dataset& ds, const std::vector<int>& order, int begin, int count) {
    const int h = ds.images.dim(1);
    const int w = ds.images.dim(2);
    const int64_t plane = static_cast<int64_t>(h) * w;
    Tensor out({count, h, w});
    for (int i = 0; i < count; ++i) {
        const int src = order[static_cast<size_t>(begin + i)];
        std::copy(ds.images.data() + src * plane, ds.images.data() + (src + 1) * plane, out.data() + i * plane);
    }
    return out;
}

std::vector<uint8_t> gather_labels(const Dataset& ds, const std::vector<int>& order, int begin, int count) {
    std::vector<uint8_t> out(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) out[static_cast<size_t>(i)] = ds.labels[static_cast<size_t>(order[static_cast<size_t>(begin + i)])];
    return out;
}

double eval_val_classifier(const FfNetwork& net, const ClassifierHead& head, const Dataset& val, int limit,
                           const WaveBank& bank) {
    const Dataset subset = limit > 0 ? val.take(limit) : val;
    return evaluate(net, &head, subset, InferenceMode::Classifier, bank).accuracy_pct;
}

}  // namespace

RunMetrics train_ff(FfNetwork& net, ClassifierHead& head, const Dataset& train, const Dataset& val,
                    const TrainConfig& config, const TrainHooks& hooks) {
    config.validate();
    const LabelConfig label_config = config.label_config();
    const WaveBank bank(label_config, net.input_h(), net.input_w());

    RunMetrics metrics;
    const int n_train = train.size();
    const int n_layers = net.num_layers();

    std::vector<int> order(static_cast<size_t>(n_train));
    for (int e = 1; e <= config.epochs; ++e) {
        const float lr = lr_schedule(e, config.epochs, config.lr);
        Rng shuffle_rng = Rng(config.seed).split(kShuffleStream).split(static_cast<uint64_t>(e));
        Rng neg_rng = Rng(config.seed).split(kNegativeStream).split(static_cast<uint64_t>(e));
        std::iota(order.begin(), order.end(), 0);
        shuffle_rng.shuffle(order);

        double loss_sum = 0.0;
        std::vector<double> disc_loss(static_cast<size_t>(n_layers), 0.0);
        std::vector<double> disc_acc(static_cast<size_t>(n_layers), 0.0);
        int steps = 0;
        int64_t train_correct = 0;
        int64_t train_seen = 0;

        for (int begin = 0; begin < n_train; begin += config.batch) {
            const int count = std::min(config.batch, n_train - begin);
            Tensor images = gather_images(train, order, begin, count);
            std::vector<uint8_t> labels = gather_labels(train, order, begin, count);

            PosNegBatch pn = build_pos_neg(images, labels, bank, neg_rng);
            FfStepStats stats = ff_train_step(net, pn.positive, pn.negative, lr, config);
            loss_sum += stats.network_loss;
            for (int l = 0; l < n_layers; ++l) {
                disc_loss[static_cast<size_t>(l)] += stats.per_layer[static_cast<size_t>(l)].bce_loss;
                disc_acc[static_cast<size_t>(l)] += stats.per_layer[static_cast<size_t>(l)].accuracy_pct;
            }
            ++steps;

            // concurrent linear-classifier training on detached features
            Tensor class_input;
            if (config.classifier_input == ClassifierInput::Neutral) {
                class_input = images;
            } else {
                class_input = pn.positive;
            }
            Tensor features = classifier_features(net, class_input);
            Tensor logits = classifier_logits(head, features);
            for (int i = 0; i < count; ++i) {
                const float* row = logits.data() + static_cast<size_t>(i) * 10;
                int best = 0;
                for (int c = 1; c < 10; ++c) {
                    if (row[c] > row[best]) best = c;
                }
                if (best == labels[static_cast<size_t>(i)]) ++train_correct;
            }
            train_seen += count;
            train_classifier_step(head, features, labels, lr);
        }

        EpochRow row;
        row.epoch = e;
        row.lr = lr;
        row.network_loss = loss_sum / steps;
        for (int l = 0; l < n_layers; ++l) {
            row.disc_loss.push_back(disc_loss[static_cast<size_t>(l)] / steps);
            row.disc_acc.push_back(disc_acc[static_cast<size_t>(l)] / steps);
        }
        row.train_acc = train_seen > 0 ? 100.0 * static_cast<double>(train_correct) / static_cast<double>(train_seen) : 0.0;
        row.val_acc = val.size() > 0 ? eval_val_classifier(net, head, val, hooks.val_limit, bank) : 0.0;
        metrics.epochs.push_back(row);
        if (hooks.on_epoch) hooks.on_epoch(row);
    }
    return metrics;
}

RunMetrics train_bp(BpNetwork& net, const Dataset& train, const Dataset& val, const TrainConfig& config,
                    const TrainHooks& hooks) {
    config.validate();
    RunMetrics metrics;
    const int n_train = train.size();
    const int n_layers = net.num_layers();

    std::vector<int> order(static_cast<size_t>(n_train));
    for (int e = 1; e <= config.epochs; ++e) {
        const float lr = lr_schedule(e, config.epochs, config.lr);
        Rng shuffle_rng = Rng(config.seed).split(kShuffleStream).split(static_cast<uint64_t>(e));
        std::iota(order.begin(), order.end(), 0);
        shuffle_rng.shuffle(order);

        double loss_sum = 0.0;
        int steps = 0;
        int64_t train_correct = 0;
        int64_t train_seen = 0;
        for (int begin = 0; begin < n_train; begin += config.batch) {
            const int count = std::min(config.batch, n_train - begin);
            Tensor images = gather_images(train, order, begin, count);
            std::vector<uint8_t> labels = gather_labels(train, order, begin, count);
            int correct = 0;
            loss_sum += net.train_step(images, labels, lr, &correct);
            train_correct += correct;
            train_seen += count;
            ++steps;
        }

        EpochRow row;
        row.epoch = e;
        row.lr = lr;
        row.network_loss = loss_sum / steps;
        row.disc_loss.assign(static_cast<size_t>(n_layers), 0.0);
        row.disc_acc.assign(static_cast<size_t>(n_layers), 0.0);
        row.train_acc = train_seen > 0 ? 100.0 * static_cast<double>(train_correct) / static_cast<double>(train_seen) : 0.0;
        if (val.size() > 0) {
            const Dataset subset = hooks.val_limit > 0 ? val.take(hooks.val_limit) : val;
            int correct = 0;
            for (int i = 0; i < subset.size(); ++i) {
                if (net.predict(subset.image(i)) == subset.labels[static_cast<size_t>(i)]) ++correct;
            }
            row.val_acc = 100.0 * correct / subset.size();
        }
        metrics.epochs.push_back(row);
        if (hooks.on_epoch) hooks.on_epoch(row);
    }
    return metrics;
}

void write_metrics_csv(const std::string& path, const RunMetrics& metrics, int layer_count,
                       const std::vector<std::string>& comment_lines) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write metrics CSV " + path);
    for (const auto& line : comment_lines) out << "# " << line << "\n";
    out << "epoch,lr,network_loss";
    for (int l = 1; l <= layer_count; ++l) out << ",disc_loss_l" << l << ",disc_acc_l" << l;
    out << ",train_acc,val_acc\n";
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.9g", v);
        return std::string(buf);
    };
    for (const auto& row : metrics.epochs) {
        out << row.epoch << "," << num(row.lr) << "," << num(row.network_loss);
        for (int l = 0; l < layer_count; ++l) {
            out << "," << num(row.disc_loss[static_cast<size_t>(l)]) << "," << num(row.disc_acc[static_cast<size_t>(l)]);
        }
        out << "," << num(row.train_acc) << "," << num(row.val_acc) << "\n";
    }
    if (!out) throw std::runtime_error("write failed for metrics CSV " + path);
}

namespace {

void write_layer(ContainerWriter& w, const FfLayer& layer) {
    w.u32(static_cast<uint32_t>(layer.spec.in_channels));
    w.u32(static_cast<uint32_t>(layer.spec.out_channels));
    w.u32(static_cast<uint32_t>(layer.spec.kernel));
    w.u32(layer.spec.padding == Padding::Same ? 0 : 1);
    w.f32(layer.theta);
    w.u32(layer.trainable ? 1 : 0);
    w.f32_array(layer.weights.data(), layer.weights.size());
    w.f32_array(layer.bias.data(), layer.bias.size());
}

FfLayer read_layer(ContainerReader& r) {
    FfLayer layer;
    layer.spec.in_channels = static_cast<int>(r.u32());
    layer.spec.out_channels = static_cast<int>(r.u32());
    layer.spec.kernel = static_cast<int>(r.u32());
    layer.spec.padding = r.u32() == 0 ? Padding::Same : Padding::Valid;
    layer.theta = r.f32();
    layer.trainable = r.u32() != 0;
    layer.weights = Tensor({layer.spec.out_channels, layer.spec.in_channels, layer.spec.kernel, layer.spec.kernel});
    r.f32_array(layer.weights.data(), layer.weights.size());
    layer.bias = Tensor({layer.spec.out_channels});
    r.f32_array(layer.bias.data(), layer.bias.size());
    layer.adam_w = AdamState(layer.weights.shape());
    layer.adam_b = AdamState(layer.bias.shape());
    return layer;
}

}  // namespace

void save_ff_checkpoint(const std::string& path, const FfNetwork& net, const ClassifierHead& head,
                        const std::string& config_echo) {
    ContainerWriter w;
    w.u32(static_cast<uint32_t>(net.input_h()));
    w.u32(static_cast<uint32_t>(net.input_w()));
    w.u32(net.pooling() ? 1 : 0);
    w.u32(static_cast<uint32_t>(net.num_layers()));
    for (int l = 0; l < net.num_layers(); ++l) write_layer(w, net.layer(l));
    const bool has_head = head.weights.size() > 0;
    w.u32(has_head ? 1 : 0);
    if (has_head) {
        w.tensor(head.weights);
        w.tensor(head.bias);
    }
    w.save(path, PayloadType::FfNetwork, config_echo);
}

FfCheckpoint load_ff_checkpoint(const std::string& path) {
    ContainerReader r(path);
    if (r.type() != PayloadType::FfNetwork) {
        throw std::runtime_error(path + ": container does not hold an FF network payload");
    }
    const int h = static_cast<int>(r.u32());
    const int w = static_cast<int>(r.u32());
    const bool pooling = r.u32() != 0;
    const int n = static_cast<int>(r.u32());
    std::vector<FfLayer> layers;
    layers.reserve(static_cast<size_t>(n));
    for (int l = 0; l < n; ++l) layers.push_back(read_layer(r));
    const int input_c = layers.empty() ? 1 : layers[0].spec.in_channels;

    FfCheckpoint ckpt;
    ckpt.net = FfNetwork::from_parts(std::move(layers), pooling, h, w, input_c);
    if (r.u32() != 0) {
        ckpt.head.weights = r.tensor();
        ckpt.head.bias = r.tensor();
        ckpt.head.adam_w = AdamState(ckpt.head.weights.shape());
        ckpt.head.adam_b = AdamState(ckpt.head.bias.shape());
    }
    ckpt.config_echo = r.config_echo();
    return ckpt;
}

void save_bp_checkpoint(const std::string& path, const BpNetwork& net, const std::string& config_echo) {
    ContainerWriter w;
    w.u32(static_cast<uint32_t>(net.input_h()));
    w.u32(static_cast<uint32_t>(net.input_w()));
    w.u32(net.pooling() ? 1 : 0);
    w.u32(static_cast<uint32_t>(net.num_layers()));
    for (int l = 0; l < net.num_layers(); ++l) write_layer(w, net.conv(l));
    w.tensor(net.head_weights());
    w.tensor(net.head_bias());
    w.save(path, PayloadType::BpNetwork, config_echo);
}

BpCheckpoint load_bp_checkpoint(const std::string& path) {
    ContainerReader r(path);
    if (r.type() != PayloadType::BpNetwork) {
        throw std::runtime_error(path + ": container does not hold a BP network payload");
    }
    const int h = static_cast<int>(r.u32());
    const int w = static_cast<int>(r.u32());
    const bool pooling = r.u32() != 0;
    const int n = static_cast<int>(r.u32());
    std::vector<FfLayer> convs;
    for (int l = 0; l < n; ++l) convs.push_back(read_layer(r));
    Tensor head_w = r.tensor();
    Tensor head_b = r.tensor();
    const int input_c = convs.empty() ? 1 : convs[0].spec.in_channels;

    BpCheckpoint ckpt;
    ckpt.config_echo = r.config_echo();
    ckpt.net = BpNetwork::from_parts(std::move(convs), std::move(head_w), std::move(head_b), pooling, h, w, input_c);
    return ckpt;
}

}  // namespace ffcnn
