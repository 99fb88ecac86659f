#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ffcnn/rng.hpp"
#include "ffcnn/tensor.hpp"

namespace ffcnn {

// One plane-wave label: a single Fourier mode identified by orientation and
// frequency (cycles per image width). Phase is configurable but fixed at 0
// for both built-in sets.
struct WaveLabelSpec {
    int label = 0;
    float orientation_deg = 0.0f;
    float frequency = 2.0f;
    float phase_rad = 0.0f;
};

enum class LabelSetId { Set1 = 1, Set2 = 2 };

struct LabelSet {
    LabelSetId id = LabelSetId::Set1;
    std::array<WaveLabelSpec, 10> specs;

    // four orientations {0,45,90,135} deg crossed with frequencies {2,4,6}:
    // label l -> orientation (l % 4) * 45 deg, frequency by l / 4
    static LabelSet set1();
    // one frequency (4 cycles/width), ten equidistant orientations l * 18 deg
    static LabelSet set2();
    static LabelSet from_id(LabelSetId id);
    // override file: 10 lines of "label orientation_deg frequency_cycles phase_rad"
    static LabelSet from_file(const std::string& path);
};

struct LabelConfig {
    LabelSet set;
    float intensity = 0.35f;  // K in [0,1]

    LabelConfig() : set(LabelSet::set1()) {}
    LabelConfig(LabelSet s, float k);
};

// wave[y,x] = (cos(2*pi*f*(x*cos(a) + y*sin(a))/W + phase) + 1) / 2
Tensor make_wave(const WaveLabelSpec& spec, int height, int width);

// (1-K)*image + K*wave, then per-image min-max rescale to [0,1]
// (all zeros when max == min)
Tensor superpose(const Tensor& image, const Tensor& wave, float k);

// the ten label waves of a set at a fixed image size, label order 0..9
struct WaveBank {
    std::array<Tensor, 10> waves;
    float intensity = 0.35f;

    WaveBank() = default;
    WaveBank(const LabelConfig& config, int height, int width);
};

struct PosNegBatch {
    Tensor positive;                  // [B,H,W]
    Tensor negative;                  // [B,H,W]
    std::vector<uint8_t> neg_labels;  // the randomly drawn wrong labels
};

// positive[i] = image superposed with its true label wave, negative[i] with a
// label drawn uniformly from the 9 wrong ones
PosNegBatch build_pos_neg(const Tensor& images, const std::vector<uint8_t>& true_labels, const WaveBank& bank,
                          Rng& rng);
PosNegBatch build_pos_neg(const Tensor& images, const std::vector<uint8_t>& true_labels, const LabelConfig& config,
                          Rng& rng);

// the 10 superpositions of one image with every label wave, label order 0..9
Tensor replicate_all_labels(const Tensor& image, const WaveBank& bank);
Tensor replicate_all_labels(const Tensor& image, const LabelConfig& config);

}  // namespace ffcnn
