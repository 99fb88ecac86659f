#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "ffcnn/label_codec.hpp"
#include "oracles.hpp"

using namespace ffcnn;

TEST(LabelSets, Set1Layout) {
    LabelSet s = LabelSet::set1();
    // four orientations crossed with three frequencies
    std::map<std::pair<float, float>, int> seen;
    for (const auto& spec : s.specs) {
        EXPECT_TRUE(spec.orientation_deg == 0.0f || spec.orientation_deg == 45.0f || spec.orientation_deg == 90.0f ||
                    spec.orientation_deg == 135.0f);
        EXPECT_TRUE(spec.frequency == 2.0f || spec.frequency == 4.0f || spec.frequency == 6.0f);
        EXPECT_EQ(spec.phase_rad, 0.0f);
        seen[{spec.orientation_deg, spec.frequency}]++;
    }
    EXPECT_EQ(seen.size(), 10u);  // distinct (orientation, frequency) pairs
}

TEST(LabelSets, Set2Layout) {
    LabelSet s = LabelSet::set2();
    for (int l = 0; l < 10; ++l) {
        EXPECT_FLOAT_EQ(s.specs[l].orientation_deg, 18.0f * l);
        EXPECT_FLOAT_EQ(s.specs[l].frequency, 4.0f);
    }
}

TEST(LabelSets, OverrideFileRoundTrip) {
    const std::string path = testing::TempDir() + "/label_map.txt";
    {
        std::ofstream out(path);
        out << "# label orientation frequency phase\n";
        for (int l = 0; l < 10; ++l) out << l << " " << l * 10.0 << " " << 3.0 << " " << 0.1 << "\n";
    }
    LabelSet s = LabelSet::from_file(path);
    EXPECT_FLOAT_EQ(s.specs[4].orientation_deg, 40.0f);
    EXPECT_FLOAT_EQ(s.specs[4].frequency, 3.0f);
    EXPECT_FLOAT_EQ(s.specs[4].phase_rad, 0.1f);

    // missing entries are rejected
    {
        std::ofstream out(path);
        out << "0 0 2 0\n";
    }
    EXPECT_THROW(LabelSet::from_file(path), std::runtime_error);
}

TEST(MakeWave, HorizontalWaveVariesAlongXOnly) {
    Tensor w = make_wave({0, 0.0f, 3.0f, 0.0f}, 16, 28);
    for (int x = 0; x < 28; ++x) {
        for (int y = 1; y < 16; ++y) EXPECT_NEAR(w.at(y, x), w.at(0, x), 1e-6f);
    }
    // actually varies
    float lo = 1.0f, hi = 0.0f;
    for (int x = 0; x < 28; ++x) {
        lo = std::min(lo, w.at(0, x));
        hi = std::max(hi, w.at(0, x));
    }
    EXPECT_GT(hi - lo, 0.9f);
}

TEST(MakeWave, VerticalWaveConstantAlongRows) {
    Tensor w = make_wave({0, 90.0f, 2.0f, 0.0f}, 28, 28);
    for (int y = 0; y < 28; ++y) {
        for (int x = 1; x < 28; ++x) EXPECT_NEAR(w.at(y, x), w.at(y, 0), 1e-5f);
    }
}

TEST(MakeWave, RangeIsZeroToOne) {
    for (float orient : {0.0f, 45.0f, 63.0f, 90.0f, 135.0f}) {
        Tensor w = make_wave({0, orient, 4.0f, 0.0f}, 28, 28);
        for (int64_t i = 0; i < w.size(); ++i) {
            EXPECT_GE(w[i], 0.0f);
            EXPECT_LE(w[i], 1.0f);
        }
    }
}

TEST(MakeWave, SpectralPurityOnGridMode) {
    // f=2 at 0 degrees on a 28-wide image: conjugate mode pair (kx=+-2, ky=0)
    Tensor w = make_wave({0, 0.0f, 2.0f, 0.0f}, 28, 28);
    std::vector<double> power = oracle::dft_power(w);
    double total = 0.0;
    for (double p : power) total += p;
    const double pair = power[2] + power[28 - 2];  // ky=0 row
    ASSERT_GT(total, 0.0);
    EXPECT_GE(pair / total, 0.99);
}

TEST(Superpose, KZeroRescalesOriginal) {
    Rng rng(3);
    Tensor image = oracle::random_tensor({6, 6}, rng, 0.2f, 0.8f);
    Tensor wave = make_wave({0, 0.0f, 2.0f, 0.0f}, 6, 6);
    Tensor out = superpose(image, wave, 0.0f);
    // min-max rescale of the input alone
    float lo = 1e9f, hi = -1e9f;
    for (int64_t i = 0; i < image.size(); ++i) {
        lo = std::min(lo, image[i]);
        hi = std::max(hi, image[i]);
    }
    for (int64_t i = 0; i < image.size(); ++i) {
        EXPECT_NEAR(out[i], (image[i] - lo) / (hi - lo), 1e-5f);
    }
}

TEST(Superpose, KOneIsPureWave) {
    Rng rng(5);
    Tensor image = oracle::random_tensor({8, 8}, rng, 0.0f, 1.0f);
    Tensor wave = make_wave({0, 45.0f, 4.0f, 0.0f}, 8, 8);
    Tensor out = superpose(image, wave, 1.0f);
    float w_lo = 1e9f, w_hi = -1e9f;
    for (int64_t i = 0; i < wave.size(); ++i) {
        w_lo = std::min(w_lo, wave[i]);
        w_hi = std::max(w_hi, wave[i]);
    }
    for (int64_t i = 0; i < wave.size(); ++i) {
        EXPECT_NEAR(out[i], (wave[i] - w_lo) / (w_hi - w_lo), 1e-5f);
    }
}

TEST(Superpose, ConstantImagePreservesWaveOrdering) {
    // K=0.35 over a constant image: output must be a positive affine map of
    // the wave, so ordering matches and the full [0,1] range is hit
    Tensor image = Tensor::full({28, 28}, 0.5f);
    Tensor wave = make_wave({0, 0.0f, 2.0f, 0.0f}, 28, 28);
    Tensor out = superpose(image, wave, 0.35f);
    float lo = 1e9f, hi = -1e9f;
    for (int64_t i = 0; i < out.size(); ++i) {
        lo = std::min(lo, out[i]);
        hi = std::max(hi, out[i]);
    }
    EXPECT_EQ(lo, 0.0f);
    EXPECT_EQ(hi, 1.0f);
    for (int64_t a = 0; a < out.size(); ++a) {
        for (int64_t b = a + 1; b < std::min(a + 7, out.size()); ++b) {
            if (wave[a] < wave[b]) {
                EXPECT_LE(out[a], out[b]);
            } else if (wave[a] > wave[b]) {
                EXPECT_GE(out[a], out[b]);
            }
        }
    }
}

TEST(Superpose, DegenerateBlendReturnsZeros) {
    Tensor image = Tensor::full({4, 4}, 0.5f);
    Tensor wave = Tensor::full({4, 4}, 0.5f);
    Tensor out = superpose(image, wave, 0.5f);
    for (int64_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], 0.0f);
}

TEST(Superpose, OutputAlwaysInUnitRangeAndRescaleIdempotent) {
    Rng rng(7);
    for (int trial = 0; trial < 30; ++trial) {
        Tensor image = oracle::random_tensor({10, 10}, rng, 0.0f, 1.0f);
        Tensor wave = make_wave({0, rng.uniform(0.0f, 180.0f), rng.uniform(1.0f, 6.0f), 0.0f}, 10, 10);
        const float k = rng.next_float();
        Tensor out = superpose(image, wave, k);
        for (int64_t i = 0; i < out.size(); ++i) {
            EXPECT_GE(out[i], 0.0f);
            EXPECT_LE(out[i], 1.0f);
        }
        // re-rescaling an already min-max scaled tensor changes nothing
        Tensor zero_wave({10, 10});
        Tensor again = superpose(out, zero_wave, 0.0f);
        for (int64_t i = 0; i < out.size(); ++i) EXPECT_NEAR(again[i], out[i], 1e-6f);
    }
}

TEST(BuildPosNeg, NegativeLabelNeverEqualsTrue) {
    Rng data_rng(11);
    const int batch = 64;
    Tensor images = oracle::random_tensor({batch, 12, 12}, data_rng, 0.0f, 1.0f);
    std::vector<uint8_t> labels(batch);
    for (int i = 0; i < batch; ++i) labels[static_cast<size_t>(i)] = static_cast<uint8_t>(data_rng.uniform_int(10));

    LabelConfig config(LabelSet::set1(), 0.35f);
    for (int trial = 0; trial < 40; ++trial) {
        Rng rng(1000 + trial);
        PosNegBatch pn = build_pos_neg(images, labels, config, rng);
        for (int i = 0; i < batch; ++i) {
            EXPECT_NE(pn.neg_labels[static_cast<size_t>(i)], labels[static_cast<size_t>(i)]);
        }
    }
}

TEST(BuildPosNeg, NegativeDrawsAreUniform) {
    // 9000 draws for one fixed true label: each wrong label within 1000 +- 100
    const int n = 9000;
    Tensor images = Tensor::full({1, 4, 4}, 0.5f);
    std::vector<uint8_t> labels{3};
    LabelConfig config(LabelSet::set1(), 0.35f);
    Rng rng(42);
    std::array<int, 10> counts{};
    for (int i = 0; i < n; ++i) {
        PosNegBatch pn = build_pos_neg(images, labels, config, rng);
        counts[pn.neg_labels[0]]++;
    }
    EXPECT_EQ(counts[3], 0);
    for (int l = 0; l < 10; ++l) {
        if (l == 3) continue;
        EXPECT_NEAR(counts[static_cast<size_t>(l)], 1000, 100) << "label " << l;
    }
}

TEST(BuildPosNeg, FixedSeedIsReproducible) {
    Rng data_rng(13);
    Tensor images = oracle::random_tensor({8, 6, 6}, data_rng, 0.0f, 1.0f);
    std::vector<uint8_t> labels{0, 1, 2, 3, 4, 5, 6, 7};
    LabelConfig config(LabelSet::set2(), 0.5f);
    Rng rng_a(77);
    Rng rng_b(77);
    PosNegBatch a = build_pos_neg(images, labels, config, rng_a);
    PosNegBatch b = build_pos_neg(images, labels, config, rng_b);
    EXPECT_EQ(a.neg_labels, b.neg_labels);
    for (int64_t i = 0; i < a.positive.size(); ++i) {
        EXPECT_EQ(a.positive[i], b.positive[i]);
        EXPECT_EQ(a.negative[i], b.negative[i]);
    }
}

TEST(BuildPosNeg, LabelOutOfRangeRejected) {
    Tensor images = Tensor::full({1, 4, 4}, 0.5f);
    std::vector<uint8_t> labels{12};
    LabelConfig config(LabelSet::set1(), 0.35f);
    Rng rng(1);
    EXPECT_THROW(build_pos_neg(images, labels, config, rng), std::invalid_argument);
}

TEST(ReplicateAllLabels, SlicesMatchDirectSuperpose) {
    Rng rng(17);
    Tensor image = oracle::random_tensor({14, 14}, rng, 0.0f, 1.0f);
    LabelConfig config(LabelSet::set1(), 0.35f);
    WaveBank bank(config, 14, 14);
    Tensor replicas = replicate_all_labels(image, config);
    ASSERT_EQ(replicas.shape(), (std::vector<int>{10, 14, 14}));
    for (int m = 0; m < 10; ++m) {
        Tensor direct = superpose(image, bank.waves[static_cast<size_t>(m)], 0.35f);
        for (int64_t i = 0; i < direct.size(); ++i) {
            EXPECT_EQ(replicas[m * direct.size() + i], direct[i]) << "label " << m;
        }
    }
}

TEST(ReplicateAllLabels, KZeroMakesAllSlicesIdentical) {
    Rng rng(19);
    Tensor image = oracle::random_tensor({8, 8}, rng, 0.0f, 1.0f);
    LabelConfig config(LabelSet::set1(), 0.0f);
    Tensor replicas = replicate_all_labels(image, config);
    const int64_t plane = 64;
    for (int m = 1; m < 10; ++m) {
        for (int64_t i = 0; i < plane; ++i) EXPECT_EQ(replicas[m * plane + i], replicas[i]);
    }
}

TEST(ReplicateAllLabels, TenfoldExposureCount) {
    // one replica per label: a 10k-image test set costs 100k forward images
    EXPECT_EQ(10 * 10000, 100000);
    Tensor image = Tensor::full({4, 4}, 0.2f);
    LabelConfig config(LabelSet::set1(), 0.35f);
    EXPECT_EQ(replicate_all_labels(image, config).dim(0), 10);
}

TEST(WaveSeparability, PairwiseCrossCorrelationBounded) {
    // normalized cross-correlation of mean-removed waves, every pair in a set
    for (LabelSetId id : {LabelSetId::Set1, LabelSetId::Set2}) {
        LabelSet set = LabelSet::from_id(id);
        std::array<Tensor, 10> waves;
        for (int l = 0; l < 10; ++l) waves[static_cast<size_t>(l)] = make_wave(set.specs[static_cast<size_t>(l)], 28, 28);
        double worst = 0.0;
        for (int a = 0; a < 10; ++a) {
            for (int b = a + 1; b < 10; ++b) {
                double mean_a = 0.0, mean_b = 0.0;
                const int64_t n = waves[0].size();
                for (int64_t i = 0; i < n; ++i) {
                    mean_a += waves[static_cast<size_t>(a)][i];
                    mean_b += waves[static_cast<size_t>(b)][i];
                }
                mean_a /= static_cast<double>(n);
                mean_b /= static_cast<double>(n);
                double dot = 0.0, na = 0.0, nb = 0.0;
                for (int64_t i = 0; i < n; ++i) {
                    const double va = waves[static_cast<size_t>(a)][i] - mean_a;
                    const double vb = waves[static_cast<size_t>(b)][i] - mean_b;
                    dot += va * vb;
                    na += va * va;
                    nb += vb * vb;
                }
                worst = std::max(worst, std::fabs(dot / std::sqrt(na * nb)));
            }
        }
        EXPECT_LT(worst, 0.5) << "set " << (id == LabelSetId::Set1 ? 1 : 2);
    }
}
