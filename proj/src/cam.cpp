#include "ffcnn/cam.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "ffcnn/image.hpp"

namespace ffcnn {

CamMap layer_cam(const FfNetwork& net, const ClassifierHead& head, const Tensor& image, int target_class,
                 int layer_index) {
    if (layer_index < 2 || layer_index > net.num_layers()) {
        throw std::invalid_argument("layer_cam: layer " + std::to_string(layer_index) +
                                    " invalid; the classifier reads layers 2.." + std::to_string(net.num_layers()));
    }
    if (target_class < 0 || target_class > 9) {
        throw std::invalid_argument("layer_cam: class " + std::to_string(target_class) + " outside 0..9");
    }

    Tensor batch({1, image.dim(0), image.dim(1)}, image.vec());
    FfForward fwd = net.forward(batch);

    // feature offset of this layer inside the concatenated classifier input
    int64_t offset = 0;
    for (int l = 1; l < layer_index - 1; ++l) {
        offset += fwd.normalized[static_cast<size_t>(l)].size();
    }

    const Tensor& norm = fwd.normalized[static_cast<size_t>(layer_index - 1)];  // [1,C,H,W]
    const int ch = norm.dim(1);
    const int h = norm.dim(2);
    const int w = norm.dim(3);
    const int64_t plane = static_cast<int64_t>(h) * w;

    CamMap cam{Tensor({h, w}), target_class, {layer_index}};
    const float* n_p = norm.data();
    const float* w_row = head.weights.data() + static_cast<size_t>(target_class) * head.weights.dim(1) + offset;
    float* c_p = cam.values.data();
    for (int64_t i = 0; i < plane; ++i) {
        double acc = 0.0;
        for (int c = 0; c < ch; ++c) {
            acc += static_cast<double>(w_row[c * plane + i]) * n_p[c * plane + i];
        }
        c_p[i] = static_cast<float>(acc);
    }
    return cam;
}

CamMap combined_cam(const std::vector<CamMap>& maps) {
    if (maps.empty()) throw std::invalid_argument("combined_cam: no maps");
    CamMap out{Tensor(maps[0].values.shape()), maps[0].target_class, {}};
    for (const CamMap& m : maps) {
        if (!m.values.same_shape(out.values)) {
            throw std::invalid_argument("combined_cam: shape " + m.values.shape_str() + " != " +
                                        out.values.shape_str());
        }
        if (m.target_class != out.target_class) {
            throw std::invalid_argument("combined_cam: maps target different classes");
        }
        for (int64_t i = 0; i < out.values.size(); ++i) out.values[i] += m.values[i];
        out.layers.insert(out.layers.end(), m.layers.begin(), m.layers.end());
    }
    return out;
}

namespace {

// t in [-1,1]: pink (255,64,160) <- white (255,255,255) -> yellow (255,220,0)
void diverging_color(float t, uint8_t& r, uint8_t& g, uint8_t& b) {
    auto lerp = [](float a, float bb, float u) { return a + (bb - a) * u; };
    if (t >= 0.0f) {
        r = 255;
        g = static_cast<uint8_t>(lerp(255.0f, 220.0f, t) + 0.5f);
        b = static_cast<uint8_t>(lerp(255.0f, 0.0f, t) + 0.5f);
    } else {
        r = 255;
        g = static_cast<uint8_t>(lerp(255.0f, 64.0f, -t) + 0.5f);
        b = static_cast<uint8_t>(lerp(255.0f, 160.0f, -t) + 0.5f);
    }
}

float bilinear(const Tensor& t, float fy, float fx) {
    const int h = t.dim(0);
    const int w = t.dim(1);
    const int y0 = std::min(static_cast<int>(fy), h - 1);
    const int x0 = std::min(static_cast<int>(fx), w - 1);
    const int y1 = std::min(y0 + 1, h - 1);
    const int x1 = std::min(x0 + 1, w - 1);
    const float dy = fy - y0;
    const float dx = fx - x0;
    return t.at(y0, x0) * (1 - dy) * (1 - dx) + t.at(y0, x1) * (1 - dy) * dx + t.at(y1, x0) * dy * (1 - dx) +
           t.at(y1, x1) * dy * dx;
}

}  // namespace

void render_cam(const CamMap& cam, const Tensor* image, const std::string& path, float image_alpha) {
    const int out_h = image ? image->dim(0) : cam.values.dim(0);
    const int out_w = image ? image->dim(1) : cam.values.dim(1);

    float peak = 0.0f;
    for (int64_t i = 0; i < cam.values.size(); ++i) {
        const float a = std::fabs(cam.values[i]);
        if (a > peak) peak = a;
    }
    const float inv = peak > 0.0f ? 1.0f / peak : 0.0f;

    Image img(out_w, out_h);
    const int ch = cam.values.dim(0);
    const int cw = cam.values.dim(1);
    for (int y = 0; y < out_h; ++y) {
        for (int x = 0; x < out_w; ++x) {
            float v;
            if (ch == out_h && cw == out_w) {
                v = cam.values.at(y, x);
            } else {
                // raw map kept as data; resizing is a rendering convenience
                const float fy = (static_cast<float>(y) + 0.5f) * ch / out_h - 0.5f;
                const float fx = (static_cast<float>(x) + 0.5f) * cw / out_w - 0.5f;
                v = bilinear(cam.values, std::max(fy, 0.0f), std::max(fx, 0.0f));
            }
            uint8_t r, g, b;
            diverging_color(v * inv, r, g, b);
            if (image && image_alpha > 0.0f) {
                const float gray = 255.0f * (*image).at(y, x);
                r = static_cast<uint8_t>((1 - image_alpha) * r + image_alpha * gray + 0.5f);
                g = static_cast<uint8_t>((1 - image_alpha) * g + image_alpha * gray + 0.5f);
                b = static_cast<uint8_t>((1 - image_alpha) * b + image_alpha * gray + 0.5f);
            }
            img.set(x, y, r, g, b);
        }
    }
    img.write_ppm(path);
}

void write_cam_csv(const std::string& path, const CamMap& cam) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "# cam class=" << cam.target_class << " layers=";
    for (size_t i = 0; i < cam.layers.size(); ++i) out << (i ? "+" : "") << cam.layers[i];
    out << "\n";
    const int h = cam.values.dim(0);
    const int w = cam.values.dim(1);
    char buf[32];
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            std::snprintf(buf, sizeof(buf), "%.9g", cam.values.at(y, x));
            out << (x ? "," : "") << buf;
        }
        out << "\n";
    }
}

}  // namespace ffcnn
