#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "ffcnn/cam.hpp"
#include "ffcnn/image.hpp"
#include "oracles.hpp"

using namespace ffcnn;

namespace {

struct CamFixture {
    FfNetwork net;
    ClassifierHead head;
    Tensor image;
};

CamFixture make_fixture(uint64_t seed, int h = 10, int w = 10) {
    TrainConfig cfg;
    cfg.filters = {2, 3, 2};
    cfg.kernel = 3;
    cfg.seed = seed;
    CamFixture fx{FfNetwork(cfg, h, w), ClassifierHead(0), Tensor({h, w})};
    Rng rng(seed);
    fx.net.init_params(rng);
    fx.head = ClassifierHead(fx.net.feature_count(1));
    for (int64_t i = 0; i < fx.head.weights.size(); ++i) fx.head.weights[i] = rng.uniform(-0.2f, 0.2f);
    for (int64_t i = 0; i < fx.head.bias.size(); ++i) fx.head.bias[i] = rng.uniform(-0.1f, 0.1f);
    Rng data_rng(seed + 1);
    fx.image = oracle::random_tensor({h, w}, data_rng, 0.0f, 1.0f);
    return fx;
}

}  // namespace

TEST(LayerCam, ZeroHeadGivesZeroMap) {
    CamFixture fx = make_fixture(3);
    fx.head.weights.fill(0.0f);
    CamMap cam = layer_cam(fx.net, fx.head, fx.image, 4, 2);
    for (int64_t i = 0; i < cam.values.size(); ++i) EXPECT_EQ(cam.values[i], 0.0f);
}

TEST(LayerCam, LayerOneRejected) {
    CamFixture fx = make_fixture(5);
    EXPECT_THROW(layer_cam(fx.net, fx.head, fx.image, 0, 1), std::invalid_argument);
    EXPECT_THROW(layer_cam(fx.net, fx.head, fx.image, 0, 4), std::invalid_argument);
}

TEST(LayerCam, LogitDecompositionIdentity) {
    // sum over layers >= 2 of the map total plus the class bias equals the
    // classifier logit, for every class
    CamFixture fx = make_fixture(7);
    Tensor batch({1, fx.image.dim(0), fx.image.dim(1)}, fx.image.vec());
    Tensor logits = classifier_logits(fx.head, classifier_features(fx.net, batch));

    for (int cls = 0; cls < 10; ++cls) {
        double total = 0.0;
        for (int l = 2; l <= fx.net.num_layers(); ++l) {
            CamMap cam = layer_cam(fx.net, fx.head, fx.image, cls, l);
            for (int64_t i = 0; i < cam.values.size(); ++i) total += cam.values[i];
        }
        total += fx.head.bias[cls];
        EXPECT_LE(oracle::rel_err(total, logits[cls], 1e-4), 1e-4) << "class " << cls;
    }
}

TEST(LayerCam, LinearInHeadWeights) {
    CamFixture fx = make_fixture(9);
    CamMap base = layer_cam(fx.net, fx.head, fx.image, 2, 2);
    ClassifierHead doubled = fx.head;
    for (int64_t i = 0; i < doubled.weights.size(); ++i) doubled.weights[i] *= 2.0f;
    CamMap twice = layer_cam(fx.net, doubled, fx.image, 2, 2);
    for (int64_t i = 0; i < base.values.size(); ++i) {
        EXPECT_NEAR(twice.values[i], 2.0f * base.values[i], 1e-5f * std::max(1.0f, std::fabs(base.values[i])));
    }
}

TEST(CombinedCam, ElementwiseSumAndShapeGuard) {
    CamFixture fx = make_fixture(11);
    CamMap l2 = layer_cam(fx.net, fx.head, fx.image, 1, 2);
    CamMap l3 = layer_cam(fx.net, fx.head, fx.image, 1, 3);
    CamMap combined = combined_cam({l2, l3});
    for (int64_t i = 0; i < combined.values.size(); ++i) {
        EXPECT_FLOAT_EQ(combined.values[i], l2.values[i] + l3.values[i]);
    }
    EXPECT_EQ(combined.layers, (std::vector<int>{2, 3}));

    CamMap wrong{Tensor({4, 4}), 1, {2}};
    EXPECT_THROW(combined_cam({l2, wrong}), std::invalid_argument);
}

TEST(RenderCam, ZeroMapIsUniformNeutral) {
    const std::string path = testing::TempDir() + "/cam_zero.ppm";
    CamMap cam{Tensor({6, 6}), 0, {2}};
    render_cam(cam, nullptr, path);
    Image img = Image::read_ppm(path);
    for (int y = 0; y < 6; ++y) {
        for (int x = 0; x < 6; ++x) {
            EXPECT_EQ(img.red(x, y), 255);
            EXPECT_EQ(img.green(x, y), 255);
            EXPECT_EQ(img.blue(x, y), 255);
        }
    }
}

TEST(RenderCam, SignFlipSwapsPinkAndYellow) {
    Rng rng(13);
    CamMap cam{oracle::random_tensor({5, 5}, rng, -1.0f, 1.0f), 0, {2}};
    CamMap flipped{Tensor(cam.values.shape()), 0, {2}};
    for (int64_t i = 0; i < cam.values.size(); ++i) flipped.values[i] = -cam.values[i];

    const std::string p1 = testing::TempDir() + "/cam_a.ppm";
    const std::string p2 = testing::TempDir() + "/cam_b.ppm";
    render_cam(cam, nullptr, p1);
    render_cam(flipped, nullptr, p2);
    Image a = Image::read_ppm(p1);
    Image b = Image::read_ppm(p2);
    for (int y = 0; y < 5; ++y) {
        for (int x = 0; x < 5; ++x) {
            // yellow has G > B, pink has G < B; the flip swaps them exactly
            const int ga = a.green(x, y) - a.blue(x, y);
            const int gb = b.green(x, y) - b.blue(x, y);
            if (std::abs(ga) > 2) EXPECT_LT(ga * gb, 0);
        }
    }
}

TEST(RenderCam, RoundTripRecoversSignPattern) {
    Rng rng(15);
    CamMap cam{oracle::random_tensor({8, 8}, rng, -2.0f, 2.0f), 3, {2, 3}};
    float peak = 0.0f;
    for (int64_t i = 0; i < cam.values.size(); ++i) peak = std::max(peak, std::fabs(cam.values[i]));

    Tensor image = oracle::random_tensor({8, 8}, rng, 0.0f, 1.0f);
    for (float alpha : {0.0f, 0.45f}) {
        const std::string path = testing::TempDir() + "/cam_rt.ppm";
        render_cam(cam, &image, path, alpha);
        Image img = Image::read_ppm(path);
        for (int y = 0; y < 8; ++y) {
            for (int x = 0; x < 8; ++x) {
                const float v = cam.values.at(y, x);
                if (std::fabs(v) < 0.08f * peak) continue;  // below quantization floor
                const int sign_from_color = img.green(x, y) > img.blue(x, y) ? 1 : -1;
                EXPECT_EQ(sign_from_color, v > 0 ? 1 : -1) << "pixel " << x << "," << y << " alpha " << alpha;
            }
        }
    }
}

TEST(WriteCamCsv, GridShapeAndHeader) {
    CamMap cam{Tensor({3, 4}), 6, {2, 3}};
    cam.values.at(1, 2) = -0.5f;
    const std::string path = testing::TempDir() + "/cam.csv";
    write_cam_csv(path, cam);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    EXPECT_NE(header.find("class=6"), std::string::npos);
    EXPECT_NE(header.find("layers=2+3"), std::string::npos);
    int rows = 0;
    std::string line;
    while (std::getline(in, line)) {
        EXPECT_EQ(std::count(line.begin(), line.end(), ','), 3);
        ++rows;
    }
    EXPECT_EQ(rows, 3);
}
