// Test-only reference implementations, deliberately independent of the main
// kernels: naive scalar loops on 64-bit values. These are the yardsticks the
// production code is measured against, so keep them boring.
#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "ffcnn/conv.hpp"
#include "ffcnn/rng.hpp"
#include "ffcnn/tensor.hpp"

namespace oracle {

// brute-force triple-loop convolution in double precision
inline std::vector<double> conv2d_ref(const std::vector<double>& input, int batch, int ch_in, int h, int w,
                                      const std::vector<double>& weights, int ch_out, int k, double bias_or_zero,
                                      const std::vector<double>& bias, bool same_padding) {
    const int oh = same_padding ? h : h - k + 1;
    const int ow = same_padding ? w : w - k + 1;
    const int off = same_padding ? k / 2 : 0;
    std::vector<double> out(static_cast<size_t>(batch) * ch_out * oh * ow, 0.0);
    for (int b = 0; b < batch; ++b) {
        for (int o = 0; o < ch_out; ++o) {
            for (int y = 0; y < oh; ++y) {
                for (int x = 0; x < ow; ++x) {
                    double acc = bias.empty() ? bias_or_zero : bias[static_cast<size_t>(o)];
                    for (int c = 0; c < ch_in; ++c) {
                        for (int i = 0; i < k; ++i) {
                            for (int j = 0; j < k; ++j) {
                                const int iy = y + i - off;
                                const int ix = x + j - off;
                                if (iy < 0 || iy >= h || ix < 0 || ix >= w) continue;
                                const double in_v =
                                    input[((static_cast<size_t>(b) * ch_in + c) * h + iy) * w + ix];
                                const double w_v =
                                    weights[((static_cast<size_t>(o) * ch_in + c) * k + i) * k + j];
                                acc += in_v * w_v;
                            }
                        }
                    }
                    out[((static_cast<size_t>(b) * ch_out + o) * oh + y) * ow + x] = acc;
                }
            }
        }
    }
    return out;
}

inline std::vector<double> to_double(const ffcnn::Tensor& t) {
    std::vector<double> out(static_cast<size_t>(t.size()));
    for (int64_t i = 0; i < t.size(); ++i) out[static_cast<size_t>(i)] = t[i];
    return out;
}

// forward + ReLU in double, for finite-difference shadows
inline std::vector<double> conv_relu_ref(const std::vector<double>& input, int batch, int ch_in, int h, int w,
                                         const std::vector<double>& weights, int ch_out, int k,
                                         const std::vector<double>& bias, bool same_padding) {
    std::vector<double> out = conv2d_ref(input, batch, ch_in, h, w, weights, ch_out, k, 0.0, bias, same_padding);
    for (double& v : out) v = v > 0.0 ? v : 0.0;
    return out;
}

// relative error with a floor so exact zero pairs compare as equal
inline double rel_err(double a, double b, double floor = 1e-6) {
    const double denom = std::max(std::abs(a), std::abs(b));
    if (denom < floor) return std::abs(a - b) < floor ? 0.0 : std::abs(a - b) / floor;
    return std::abs(a - b) / denom;
}

// naive 2D DFT power spectrum of (values - mean), for spectral-purity checks
inline std::vector<double> dft_power(const ffcnn::Tensor& img) {
    const int h = img.dim(0);
    const int w = img.dim(1);
    double mean = 0.0;
    for (int64_t i = 0; i < img.size(); ++i) mean += img[i];
    mean /= static_cast<double>(img.size());

    std::vector<double> power(static_cast<size_t>(h) * w, 0.0);
    for (int ky = 0; ky < h; ++ky) {
        for (int kx = 0; kx < w; ++kx) {
            std::complex<double> acc(0.0, 0.0);
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    const double phase = -2.0 * M_PI * (static_cast<double>(kx) * x / w + static_cast<double>(ky) * y / h);
                    acc += (static_cast<double>(img.at(y, x)) - mean) * std::complex<double>(std::cos(phase), std::sin(phase));
                }
            }
            power[static_cast<size_t>(ky) * w + kx] = std::norm(acc);
        }
    }
    return power;
}

inline ffcnn::Tensor random_tensor(std::vector<int> shape, ffcnn::Rng& rng, float lo = -1.0f, float hi = 1.0f) {
    ffcnn::Tensor t(std::move(shape));
    for (int64_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
    return t;
}

}  // namespace oracle
