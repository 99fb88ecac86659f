#include "ffcnn/inference.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "ffcnn/image.hpp"
#include "ffcnn/parallel.hpp"

namespace ffcnn {

ClassifierHead::ClassifierHead(int64_t feature_count)
    : weights({10, static_cast<int>(feature_count)}),
      bias({10}),
      adam_w(weights.shape()),
      adam_b(bias.shape()) {}

Tensor classifier_features(const FfNetwork& net, const FfForward& fwd) {
    const int batch = fwd.normalized[0].dim(0);
    const int64_t h_total = net.feature_count(1);
    Tensor features({batch, static_cast<int>(h_total)});
    float* f_p = features.data();
    int64_t offset = 0;
    for (int l = 1; l < net.num_layers(); ++l) {
        const Tensor& norm = fwd.normalized[static_cast<size_t>(l)];
        const int64_t n_flat = norm.size() / batch;
        const float* n_p = norm.data();
        for (int b = 0; b < batch; ++b) {
            std::copy(n_p + b * n_flat, n_p + (b + 1) * n_flat, f_p + b * h_total + offset);
        }
        offset += n_flat;
    }
    return features;
}

Tensor classifier_features(const FfNetwork& net, const Tensor& image_batch) {
    FfForward fwd = net.forward(image_batch);
    return classifier_features(net, fwd);
}

Tensor classifier_logits(const ClassifierHead& head, const Tensor& features) {
    const int batch = features.dim(0);
    const int64_t h_total = features.dim(1);
    if (head.weights.dim(1) != features.dim(1)) {
        throw std::invalid_argument("classifier: feature extent " + std::to_string(features.dim(1)) +
                                    " != head weight extent " + std::to_string(head.weights.dim(1)));
    }
    Tensor logits({batch, 10});
    const float* f_p = features.data();
    const float* w_p = head.weights.data();
    const float* b_p = head.bias.data();
    float* l_p = logits.data();
    parallel_for(batch, [&](int64_t lo, int64_t hi) {
        for (int64_t b = lo; b < hi; ++b) {
            const float* f_row = f_p + b * h_total;
            for (int cls = 0; cls < 10; ++cls) {
                const float* w_row = w_p + static_cast<size_t>(cls) * h_total;
                double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
                int64_t i = 0;
                for (; i + 8 <= h_total; i += 8) {
                    for (int l = 0; l < 8; ++l) acc[l] += static_cast<double>(w_row[i + l]) * f_row[i + l];
                }
                for (; i < h_total; ++i) acc[i & 7] += static_cast<double>(w_row[i]) * f_row[i];
                const double dot = ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
                l_p[b * 10 + cls] = static_cast<float>(dot + b_p[cls]);
            }
        }
    });
    return logits;
}

namespace {

// softmax probabilities per row, numerically shifted
void softmax_rows(Tensor& logits) {
    const int batch = logits.dim(0);
    float* p = logits.data();
    for (int b = 0; b < batch; ++b) {
        float* row = p + static_cast<size_t>(b) * 10;
        float peak = row[0];
        for (int c = 1; c < 10; ++c) peak = row[c] > peak ? row[c] : peak;
        double sum = 0.0;
        for (int c = 0; c < 10; ++c) sum += std::exp(static_cast<double>(row[c]) - peak);
        for (int c = 0; c < 10; ++c) {
            row[c] = static_cast<float>(std::exp(static_cast<double>(row[c]) - peak) / sum);
        }
    }
}

int argmax10(const float* row) {
    int best = 0;
    for (int c = 1; c < 10; ++c) {
        if (row[c] > row[best]) best = c;  // strict: ties keep the lower index
    }
    return best;
}

}  // namespace

void train_classifier_step(ClassifierHead& head, const Tensor& features, const std::vector<uint8_t>& labels,
                           float lr) {
    const int batch = features.dim(0);
    if (static_cast<int>(labels.size()) != batch) {
        throw std::invalid_argument("classifier step: label count " + std::to_string(labels.size()) +
                                    " != batch extent " + std::to_string(batch));
    }
    Tensor probs = classifier_logits(head, features);
    softmax_rows(probs);

    // d(logit)[b,c] = (softmax - onehot) / batch
    const int64_t h_total = features.dim(1);
    Tensor dlogits({batch, 10});
    for (int b = 0; b < batch; ++b) {
        for (int c = 0; c < 10; ++c) {
            const float onehot = labels[static_cast<size_t>(b)] == c ? 1.0f : 0.0f;
            dlogits.at(b, c) = (probs.at(b, c) - onehot) / static_cast<float>(batch);
        }
    }

    Tensor wg({10, static_cast<int>(h_total)});
    Tensor bg({10});
    const float* f_p = features.data();
    float* wg_p = wg.data();
    parallel_for(10, [&](int64_t lo, int64_t hi) {
        for (int64_t c = lo; c < hi; ++c) {
            float* wg_row = wg_p + c * h_total;
            double bacc = 0.0;
            for (int b = 0; b < batch; ++b) {
                const float d = dlogits.at(b, static_cast<int>(c));
                bacc += d;
                const float* f_row = f_p + static_cast<size_t>(b) * h_total;
                for (int64_t i = 0; i < h_total; ++i) wg_row[i] += d * f_row[i];
            }
            bg[c] = static_cast<float>(bacc);
        }
    });
    adam_step(head.weights, wg, head.adam_w, lr);
    adam_step(head.bias, bg, head.adam_b, lr);
}

int predict_classifier(const ClassifierHead& head, const FfNetwork& net, const Tensor& image) {
    Tensor batch({1, image.dim(0), image.dim(1)}, image.vec());
    Tensor logits = classifier_logits(head, classifier_features(net, batch));
    return argmax10(logits.data());
}

std::array<double, 10> goodness_scores(const FfNetwork& net, const Tensor& image, const WaveBank& bank) {
    Tensor replicas = replicate_all_labels(image, bank);  // [10,H,W]
    FfForward fwd = net.forward(replicas);
    std::array<double, 10> f{};
    for (int l = 1; l < net.num_layers(); ++l) {
        const Tensor& g = fwd.goodness[static_cast<size_t>(l)];
        for (int m = 0; m < 10; ++m) f[static_cast<size_t>(m)] += g[m];
    }
    return f;
}

int predict_goodness(const FfNetwork& net, const Tensor& image, const WaveBank& bank) {
    const std::array<double, 10> f = goodness_scores(net, image, bank);
    int best = 0;
    for (int m = 1; m < 10; ++m) {
        if (f[static_cast<size_t>(m)] > f[static_cast<size_t>(best)]) best = m;
    }
    return best;
}

EvalResult evaluate(const FfNetwork& net, const ClassifierHead* head, const Dataset& dataset, InferenceMode mode,
                    const WaveBank& bank) {
    if (mode == InferenceMode::Classifier && head == nullptr) {
        throw std::invalid_argument("evaluate: classifier mode needs a trained head");
    }
    const int total = dataset.size();
    std::vector<int> predicted(static_cast<size_t>(total));

    if (mode == InferenceMode::Classifier) {
        // batch the forward passes; kernels parallelize internally
        const int chunk = 200;
        const int h = dataset.images.dim(1);
        const int w = dataset.images.dim(2);
        const int64_t plane = static_cast<int64_t>(h) * w;
        for (int begin = 0; begin < total; begin += chunk) {
            const int count = std::min(chunk, total - begin);
            Tensor batch({count, h, w},
                         std::vector<float>(dataset.images.data() + begin * plane,
                                            dataset.images.data() + (begin + count) * plane));
            Tensor logits = classifier_logits(*head, classifier_features(net, batch));
            for (int i = 0; i < count; ++i) {
                predicted[static_cast<size_t>(begin + i)] = argmax10(logits.data() + static_cast<size_t>(i) * 10);
            }
        }
    } else {
        for (int i = 0; i < total; ++i) {
            predicted[static_cast<size_t>(i)] = predict_goodness(net, dataset.image(i), bank);
        }
    }

    EvalResult res;
    res.total = total;
    int correct = 0;
    for (int i = 0; i < total; ++i) {
        const int truth = dataset.labels[static_cast<size_t>(i)];
        res.confusion[static_cast<size_t>(truth)][static_cast<size_t>(predicted[static_cast<size_t>(i)])]++;
        if (predicted[static_cast<size_t>(i)] == truth) ++correct;
    }
    res.accuracy_pct = total > 0 ? 100.0 * correct / total : 0.0;
    return res;
}

void write_confusion_csv(const std::string& path, const ConfusionMatrix& m) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "true\\pred";
    for (int c = 0; c < 10; ++c) out << "," << c;
    out << "\n";
    for (int r = 0; r < 10; ++r) {
        out << r;
        for (int c = 0; c < 10; ++c) out << "," << m[static_cast<size_t>(r)][static_cast<size_t>(c)];
        out << "\n";
    }
}

void render_confusion(const std::string& path, const ConfusionMatrix& m) {
    // 10x10 heat map, log-scaled so off-diagonal structure stays visible
    const int cell = 24;
    Image img(10 * cell, 10 * cell);
    int peak = 1;
    for (const auto& row : m) {
        for (int v : row) peak = v > peak ? v : peak;
    }
    const double log_peak = std::log1p(static_cast<double>(peak));
    for (int r = 0; r < 10; ++r) {
        for (int c = 0; c < 10; ++c) {
            const double t = std::log1p(static_cast<double>(m[static_cast<size_t>(r)][static_cast<size_t>(c)])) / log_peak;
            const uint8_t red = static_cast<uint8_t>(255.0 * (1.0 - t));
            const uint8_t green = static_cast<uint8_t>(255.0 * (1.0 - 0.6 * t));
            const uint8_t blue = 255;
            for (int y = r * cell; y < (r + 1) * cell; ++y) {
                for (int x = c * cell; x < (c + 1) * cell; ++x) img.set(x, y, red, green, blue);
            }
        }
    }
    img.write_ppm(path);
}

}  // namespace ffcnn
