#include "ffcnn/label_codec.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace ffcnn {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

LabelSet LabelSet::set1() {
    LabelSet s;
    s.id = LabelSetId::Set1;
    const float freqs[3] = {2.0f, 4.0f, 6.0f};
    for (int l = 0; l < 10; ++l) {
        s.specs[l] = {l, static_cast<float>(l % 4) * 45.0f, freqs[l / 4], 0.0f};
    }
    return s;
}

LabelSet LabelSet::set2() {
    LabelSet s;
    s.id = LabelSetId::Set2;
    for (int l = 0; l < 10; ++l) {
        s.specs[l] = {l, static_cast<float>(l) * 18.0f, 4.0f, 0.0f};
    }
    return s;
}

LabelSet LabelSet::from_id(LabelSetId id) { return id == LabelSetId::Set1 ? set1() : set2(); }

LabelSet LabelSet::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("label map: cannot open " + path);
    LabelSet s;
    s.id = LabelSetId::Set1;
    std::array<bool, 10> seen{};
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        int label;
        float orient, freq, phase;
        if (!(ls >> label >> orient >> freq >> phase)) {
            throw std::runtime_error("label map " + path + ": bad line \"" + line + "\"");
        }
        if (label < 0 || label > 9) throw std::runtime_error("label map " + path + ": label out of range 0..9");
        if (seen[label]) throw std::runtime_error("label map " + path + ": duplicate label " + std::to_string(label));
        seen[label] = true;
        s.specs[label] = {label, orient, freq, phase};
        ++rows;
    }
    if (rows != 10) throw std::runtime_error("label map " + path + ": expected 10 entries, got " + std::to_string(rows));
    return s;
}

LabelConfig::LabelConfig(LabelSet s, float k) : set(std::move(s)), intensity(k) {
    if (k < 0.0f || k > 1.0f) {
        throw std::invalid_argument("label intensity K " + std::to_string(k) + " outside [0,1]");
    }
}

Tensor make_wave(const WaveLabelSpec& spec, int height, int width) {
    if (height < 2 || width < 2) {
        throw std::invalid_argument("make_wave: extents must be >= 2, got " + std::to_string(height) + "x" +
                                    std::to_string(width));
    }
    Tensor wave({height, width});
    const double a = static_cast<double>(spec.orientation_deg) * kPi / 180.0;
    const double cos_a = std::cos(a);
    const double sin_a = std::sin(a);
    const double scale = 2.0 * kPi * static_cast<double>(spec.frequency) / static_cast<double>(width);
    float* p = wave.data();
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double arg = scale * (x * cos_a + y * sin_a) + spec.phase_rad;
            p[static_cast<size_t>(y) * width + x] = static_cast<float>((std::cos(arg) + 1.0) * 0.5);
        }
    }
    return wave;
}

Tensor superpose(const Tensor& image, const Tensor& wave, float k) {
    if (!image.same_shape(wave)) {
        throw std::invalid_argument("superpose: image shape " + image.shape_str() + " != wave shape " +
                                    wave.shape_str());
    }
    if (k < 0.0f || k > 1.0f) {
        throw std::invalid_argument("superpose: K " + std::to_string(k) + " outside [0,1]");
    }
    Tensor out(image.shape());
    const float* im = image.data();
    const float* wv = wave.data();
    float* o = out.data();
    const int64_t n = image.size();

    float lo = 0.0f, hi = 0.0f;
    for (int64_t i = 0; i < n; ++i) {
        const float v = (1.0f - k) * im[i] + k * wv[i];
        o[i] = v;
        if (i == 0 || v < lo) lo = v;
        if (i == 0 || v > hi) hi = v;
    }
    const float range = hi - lo;
    if (range <= 0.0f) {
        out.fill(0.0f);
        return out;
    }
    const float inv = 1.0f / range;
    for (int64_t i = 0; i < n; ++i) o[i] = (o[i] - lo) * inv;
    return out;
}

WaveBank::WaveBank(const LabelConfig& config, int height, int width) : intensity(config.intensity) {
    for (int l = 0; l < 10; ++l) waves[l] = make_wave(config.set.specs[l], height, width);
}

static void check_batch(const Tensor& images, const std::vector<uint8_t>& labels) {
    if (images.rank() != 3) {
        throw std::invalid_argument("build_pos_neg: images must be [B,H,W], got " + images.shape_str());
    }
    if (static_cast<int>(labels.size()) != images.dim(0)) {
        throw std::invalid_argument("build_pos_neg: label count " + std::to_string(labels.size()) +
                                    " != batch extent " + std::to_string(images.dim(0)));
    }
    for (uint8_t l : labels) {
        if (l > 9) throw std::invalid_argument("build_pos_neg: label " + std::to_string(l) + " out of range 0..9");
    }
}

PosNegBatch build_pos_neg(const Tensor& images, const std::vector<uint8_t>& true_labels, const WaveBank& bank,
                          Rng& rng) {
    check_batch(images, true_labels);
    const int batch = images.dim(0);
    const int h = images.dim(1);
    const int w = images.dim(2);
    const int64_t plane = static_cast<int64_t>(h) * w;

    PosNegBatch out{Tensor({batch, h, w}), Tensor({batch, h, w}), {}};
    out.neg_labels.resize(static_cast<size_t>(batch));

    for (int b = 0; b < batch; ++b) {
        const int truth = true_labels[static_cast<size_t>(b)];
        // skip over the true label so the draw is uniform on the 9 wrong ones
        int wrong = rng.uniform_int(9);
        if (wrong >= truth) ++wrong;
        out.neg_labels[static_cast<size_t>(b)] = static_cast<uint8_t>(wrong);

        Tensor image({h, w}, std::vector<float>(images.data() + b * plane, images.data() + (b + 1) * plane));
        Tensor pos = superpose(image, bank.waves[static_cast<size_t>(truth)], bank.intensity);
        Tensor neg = superpose(image, bank.waves[static_cast<size_t>(wrong)], bank.intensity);
        std::copy(pos.data(), pos.data() + plane, out.positive.data() + b * plane);
        std::copy(neg.data(), neg.data() + plane, out.negative.data() + b * plane);
    }
    return out;
}

PosNegBatch build_pos_neg(const Tensor& images, const std::vector<uint8_t>& true_labels, const LabelConfig& config,
                          Rng& rng) {
    check_batch(images, true_labels);
    WaveBank bank(config, images.dim(1), images.dim(2));
    return build_pos_neg(images, true_labels, bank, rng);
}

Tensor replicate_all_labels(const Tensor& image, const WaveBank& bank) {
    if (image.rank() != 2) {
        throw std::invalid_argument("replicate_all_labels: image must be [H,W], got " + image.shape_str());
    }
    const int h = image.dim(0);
    const int w = image.dim(1);
    const int64_t plane = static_cast<int64_t>(h) * w;
    Tensor out({10, h, w});
    for (int l = 0; l < 10; ++l) {
        Tensor s = superpose(image, bank.waves[static_cast<size_t>(l)], bank.intensity);
        std::copy(s.data(), s.data() + plane, out.data() + l * plane);
    }
    return out;
}

Tensor replicate_all_labels(const Tensor& image, const LabelConfig& config) {
    WaveBank bank(config, image.dim(0), image.dim(1));
    return replicate_all_labels(image, bank);
}

}  // namespace ffcnn
