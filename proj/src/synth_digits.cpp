#include "ffcnn/synth_digits.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace ffcnn {

namespace {

struct Pt {
    float x, y;
};
using Stroke = std::vector<Pt>;

Stroke ellipse(float cx, float cy, float rx, float ry, int points = 20, float start = 0.0f, float sweep = 6.2831853f) {
    Stroke s;
    for (int i = 0; i <= points; ++i) {
        const float a = start + sweep * static_cast<float>(i) / points;
        s.push_back({cx + rx * std::cos(a), cy + ry * std::sin(a)});
    }
    return s;
}

// glyph skeletons in a normalized box, x right, y down
std::vector<Stroke> glyph(int digit, Rng& rng) {
    std::vector<Stroke> g;
    switch (digit) {
        case 0:
            g.push_back(ellipse(0.50f, 0.50f, 0.25f, 0.36f));
            break;
        case 1:
            g.push_back({{0.36f, 0.26f}, {0.52f, 0.12f}, {0.52f, 0.88f}});
            if (rng.next_float() < 0.4f) g.push_back({{0.36f, 0.88f}, {0.68f, 0.88f}});
            break;
        case 2:
            g.push_back({{0.24f, 0.32f},
                         {0.30f, 0.16f},
                         {0.50f, 0.10f},
                         {0.70f, 0.17f},
                         {0.75f, 0.34f},
                         {0.62f, 0.54f},
                         {0.42f, 0.70f},
                         {0.25f, 0.88f}});
            g.push_back({{0.25f, 0.88f}, {0.78f, 0.88f}});
            break;
        case 3:
            g.push_back({{0.26f, 0.18f}, {0.46f, 0.10f}, {0.66f, 0.17f}, {0.71f, 0.31f}, {0.60f, 0.44f}, {0.46f, 0.49f}});
            g.push_back({{0.46f, 0.49f}, {0.66f, 0.55f}, {0.74f, 0.70f}, {0.63f, 0.85f}, {0.42f, 0.90f}, {0.24f, 0.81f}});
            break;
        case 4:
            g.push_back({{0.56f, 0.10f}, {0.22f, 0.60f}, {0.80f, 0.60f}});
            g.push_back({{0.62f, 0.30f}, {0.62f, 0.90f}});
            break;
        case 5:
            g.push_back({{0.72f, 0.12f}, {0.32f, 0.12f}, {0.29f, 0.45f}});
            g.push_back({{0.29f, 0.45f}, {0.50f, 0.40f}, {0.68f, 0.48f}, {0.74f, 0.64f}, {0.65f, 0.82f}, {0.44f, 0.90f}, {0.25f, 0.82f}});
            break;
        case 6:
            g.push_back({{0.66f, 0.10f}, {0.46f, 0.22f}, {0.32f, 0.42f}, {0.27f, 0.62f}});
            g.push_back(ellipse(0.48f, 0.68f, 0.21f, 0.20f));
            break;
        case 7:
            g.push_back({{0.22f, 0.14f}, {0.78f, 0.14f}, {0.42f, 0.88f}});
            if (rng.next_float() < 0.35f) g.push_back({{0.34f, 0.50f}, {0.64f, 0.50f}});
            break;
        case 8:
            g.push_back(ellipse(0.50f, 0.30f, 0.20f, 0.18f));
            g.push_back(ellipse(0.50f, 0.68f, 0.23f, 0.20f));
            break;
        case 9:
            g.push_back(ellipse(0.50f, 0.32f, 0.21f, 0.20f));
            g.push_back({{0.71f, 0.34f}, {0.67f, 0.62f}, {0.56f, 0.88f}});
            break;
        default:
            throw std::invalid_argument("render_digit: digit " + std::to_string(digit) + " outside 0..9");
    }
    return g;
}

float segment_distance(float px, float py, Pt a, Pt b) {
    const float vx = b.x - a.x;
    const float vy = b.y - a.y;
    const float wx = px - a.x;
    const float wy = py - a.y;
    const float vv = vx * vx + vy * vy;
    float t = vv > 0.0f ? (wx * vx + wy * vy) / vv : 0.0f;
    t = std::clamp(t, 0.0f, 1.0f);
    const float dx = px - (a.x + t * vx);
    const float dy = py - (a.y + t * vy);
    return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

Tensor render_digit(int digit, Rng& rng) {
    std::vector<Stroke> strokes = glyph(digit, rng);

    // random affine about the glyph center
    const float rot = rng.uniform(-0.21f, 0.21f);  // ~±12 deg
    const float sx = rng.uniform(0.80f, 1.12f);
    const float sy = rng.uniform(0.80f, 1.12f);
    const float shear = rng.uniform(-0.20f, 0.20f);
    const float tx = rng.uniform(-0.07f, 0.07f);
    const float ty = rng.uniform(-0.07f, 0.07f);
    const float ca = std::cos(rot);
    const float sa = std::sin(rot);
    for (auto& s : strokes) {
        for (auto& p : s) {
            float x = p.x - 0.5f;
            float y = p.y - 0.5f;
            x += shear * y;
            const float xr = ca * x - sa * y;
            const float yr = sa * x + ca * y;
            p.x = 0.5f + sx * xr + tx;
            p.y = 0.5f + sy * yr + ty;
            // jitter individual control points slightly
            p.x += rng.uniform(-0.012f, 0.012f);
            p.y += rng.uniform(-0.012f, 0.012f);
        }
    }

    const float half_width = rng.uniform(0.95f, 1.75f);  // pixels
    const float peak = rng.uniform(0.78f, 1.0f);
    const float soft = 0.85f;

    Tensor img({28, 28});
    for (int y = 0; y < 28; ++y) {
        for (int x = 0; x < 28; ++x) {
            // normalized box maps onto a 22px glyph area with a 3px margin
            const float nx = (static_cast<float>(x) - 3.0f) / 22.0f;
            const float ny = (static_cast<float>(y) - 3.0f) / 22.0f;
            float d = 1e9f;
            for (const auto& s : strokes) {
                for (size_t i = 0; i + 1 < s.size(); ++i) {
                    d = std::min(d, segment_distance(nx, ny, s[i], s[i + 1]));
                }
            }
            const float dpx = d * 22.0f;
            const float v = std::clamp((half_width - dpx) / soft + 1.0f, 0.0f, 1.0f);
            img.at(y, x) = peak * v;
        }
    }

    // light blur, then pixel noise
    const float k = rng.uniform(0.18f, 0.30f);
    Tensor tmp({28, 28});
    for (int y = 0; y < 28; ++y) {
        for (int x = 0; x < 28; ++x) {
            const float left = x > 0 ? img.at(y, x - 1) : 0.0f;
            const float right = x < 27 ? img.at(y, x + 1) : 0.0f;
            tmp.at(y, x) = (img.at(y, x) + k * (left + right)) / (1.0f + 2.0f * k);
        }
    }
    for (int y = 0; y < 28; ++y) {
        for (int x = 0; x < 28; ++x) {
            const float up = y > 0 ? tmp.at(y - 1, x) : 0.0f;
            const float down = y < 27 ? tmp.at(y + 1, x) : 0.0f;
            float v = (tmp.at(y, x) + k * (up + down)) / (1.0f + 2.0f * k);
            v += rng.uniform(-0.025f, 0.025f);
            img.at(y, x) = std::clamp(v, 0.0f, 1.0f);
        }
    }
    return img;
}

namespace {

void write_be32(std::ofstream& out, uint32_t v) {
    const uint8_t b[4] = {static_cast<uint8_t>(v >> 24), static_cast<uint8_t>(v >> 16), static_cast<uint8_t>(v >> 8),
                          static_cast<uint8_t>(v)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

void write_split(const std::string& images_path, const std::string& labels_path, uint64_t seed, uint64_t stream,
                 int count) {
    std::ofstream images(images_path, std::ios::binary | std::ios::trunc);
    std::ofstream labels(labels_path, std::ios::binary | std::ios::trunc);
    if (!images || !labels) {
        throw std::runtime_error("cannot write dataset files " + images_path + " / " + labels_path);
    }
    write_be32(images, 0x00000803);
    write_be32(images, static_cast<uint32_t>(count));
    write_be32(images, 28);
    write_be32(images, 28);
    write_be32(labels, 0x00000801);
    write_be32(labels, static_cast<uint32_t>(count));

    std::vector<uint8_t> pixel_row(28 * 28);
    for (int i = 0; i < count; ++i) {
        Rng rng = Rng(seed).split(stream).split(static_cast<uint64_t>(i));
        const int digit = rng.uniform_int(10);
        Tensor img = render_digit(digit, rng);
        for (int p = 0; p < 28 * 28; ++p) {
            pixel_row[static_cast<size_t>(p)] = static_cast<uint8_t>(std::lround(img[p] * 255.0f));
        }
        images.write(reinterpret_cast<const char*>(pixel_row.data()), 28 * 28);
        const uint8_t l = static_cast<uint8_t>(digit);
        labels.write(reinterpret_cast<const char*>(&l), 1);
    }
    if (!images || !labels) {
        throw std::runtime_error("write failed for dataset files in " + images_path);
    }
}

}  // namespace

void write_synthetic_idx(const std::string& dir, uint64_t seed, int train_count, int test_count) {
    write_split(dir + "/train-images-idx3-ubyte", dir + "/train-labels-idx1-ubyte", seed, 1, train_count);
    write_split(dir + "/t10k-images-idx3-ubyte", dir + "/t10k-labels-idx1-ubyte", seed, 2, test_count);
}

}  // namespace ffcnn
