#include "ffcnn/conv.hpp"

#include <atomic>
#include <stdexcept>
#include <string>

#include "ffcnn/parallel.hpp"

namespace ffcnn {

namespace {

std::atomic<uint64_t> g_mac_count{0};

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

void check_forward_shapes(const Tensor& input, const Tensor& weights, const Tensor& bias, const ConvSpec& spec) {
    spec.validate();
    require(input.rank() == 4, "conv2d: input rank " + std::to_string(input.rank()) + " != 4, shape " + input.shape_str());
    require(weights.rank() == 4, "conv2d: weights rank != 4, shape " + weights.shape_str());
    require(bias.rank() == 1, "conv2d: bias rank != 1, shape " + bias.shape_str());
    require(input.dim(1) == spec.in_channels,
            "conv2d: input channel extent " + std::to_string(input.dim(1)) + " != spec.in_channels " +
                std::to_string(spec.in_channels));
    require(weights.dim(0) == spec.out_channels,
            "conv2d: weights out-channel extent " + std::to_string(weights.dim(0)) + " != spec.out_channels " +
                std::to_string(spec.out_channels));
    require(weights.dim(1) == spec.in_channels,
            "conv2d: weights in-channel extent " + std::to_string(weights.dim(1)) + " != spec.in_channels " +
                std::to_string(spec.in_channels));
    require(weights.dim(2) == spec.kernel && weights.dim(3) == spec.kernel,
            "conv2d: weights kernel extents " + std::to_string(weights.dim(2)) + "x" + std::to_string(weights.dim(3)) +
                " != spec.kernel " + std::to_string(spec.kernel));
    require(bias.dim(0) == spec.out_channels,
            "conv2d: bias extent " + std::to_string(bias.dim(0)) + " != spec.out_channels " +
                std::to_string(spec.out_channels));
    require(spec.out_extent(input.dim(2)) >= 1 && spec.out_extent(input.dim(3)) >= 1,
            "conv2d: spatial extents " + std::to_string(input.dim(2)) + "x" + std::to_string(input.dim(3)) +
                " too small for kernel " + std::to_string(spec.kernel) + " in valid mode");
}

}  // namespace

void ConvSpec::validate() const {
    if (kernel < 1 || kernel % 2 == 0) {
        throw std::invalid_argument("ConvSpec: kernel " + std::to_string(kernel) + " must be odd and >= 1");
    }
    if (in_channels < 1 || out_channels < 1) {
        throw std::invalid_argument("ConvSpec: channel counts must be >= 1");
    }
}

Tensor conv2d_forward(const Tensor& input, const Tensor& weights, const Tensor& bias, const ConvSpec& spec) {
    check_forward_shapes(input, weights, bias, spec);

    const int batch = input.dim(0);
    const int ch_in = spec.in_channels;
    const int ch_out = spec.out_channels;
    const int h = input.dim(2);
    const int w = input.dim(3);
    const int k = spec.kernel;
    const int oh = spec.out_extent(h);
    const int ow = spec.out_extent(w);
    // window origin offset: same padding centers the kernel, valid anchors it
    const int off = spec.padding == Padding::Same ? k / 2 : 0;

    Tensor out({batch, ch_out, oh, ow});
    g_mac_count.fetch_add(static_cast<uint64_t>(batch) * ch_out * oh * ow * ch_in * k * k,
                          std::memory_order_relaxed);

    const float* in_p = input.data();
    const float* w_p = weights.data();
    const float* b_p = bias.data();
    float* out_p = out.data();

    parallel_for(static_cast<int64_t>(batch) * ch_out, [&](int64_t lo, int64_t hi) {
        for (int64_t bo = lo; bo < hi; ++bo) {
            const int b = static_cast<int>(bo / ch_out);
            const int o = static_cast<int>(bo % ch_out);
            float* out_plane = out_p + (static_cast<size_t>(b) * ch_out + o) * oh * ow;
            const float bias_o = b_p[o];
            for (int64_t i = 0; i < static_cast<int64_t>(oh) * ow; ++i) out_plane[i] = bias_o;
            for (int c = 0; c < ch_in; ++c) {
                const float* in_plane = in_p + (static_cast<size_t>(b) * ch_in + c) * h * w;
                const float* w_oc = w_p + (static_cast<size_t>(o) * ch_in + c) * k * k;
                for (int y = 0; y < oh; ++y) {
                    float* out_row = out_plane + static_cast<size_t>(y) * ow;
                    for (int i = 0; i < k; ++i) {
                        const int iy = y + i - off;
                        if (iy < 0 || iy >= h) continue;
                        const float* in_row = in_plane + static_cast<size_t>(iy) * w;
                        const float* w_row = w_oc + static_cast<size_t>(i) * k;
                        for (int j = 0; j < k; ++j) {
                            const int shift = j - off;
                            const float ws = w_row[j];
                            // clip x so ix = x + shift stays in [0, w)
                            const int x0 = shift < 0 ? -shift : 0;
                            const int x1 = w - shift < ow ? w - shift : ow;
                            const float* src = in_row + shift;
                            for (int x = x0; x < x1; ++x) out_row[x] += ws * src[x];
                        }
                    }
                }
            }
        }
    });
    return out;
}

ConvParamGrad conv2d_weight_grad(const Tensor& input, const Tensor& upstream_grad, const ConvSpec& spec) {
    spec.validate();
    require(input.rank() == 4, "conv2d_weight_grad: input rank != 4, shape " + input.shape_str());
    require(upstream_grad.rank() == 4, "conv2d_weight_grad: upstream rank != 4, shape " + upstream_grad.shape_str());
    require(upstream_grad.dim(0) == input.dim(0),
            "conv2d_weight_grad: upstream batch extent " + std::to_string(upstream_grad.dim(0)) +
                " != input batch extent " + std::to_string(input.dim(0)));
    require(input.dim(1) == spec.in_channels,
            "conv2d_weight_grad: input channel extent " + std::to_string(input.dim(1)) + " != spec.in_channels " +
                std::to_string(spec.in_channels));
    require(upstream_grad.dim(1) == spec.out_channels,
            "conv2d_weight_grad: upstream channel extent " + std::to_string(upstream_grad.dim(1)) +
                " != spec.out_channels " + std::to_string(spec.out_channels));
    require(upstream_grad.dim(2) == spec.out_extent(input.dim(2)) && upstream_grad.dim(3) == spec.out_extent(input.dim(3)),
            "conv2d_weight_grad: upstream spatial extents " + std::to_string(upstream_grad.dim(2)) + "x" +
                std::to_string(upstream_grad.dim(3)) + " do not match forward output for input " + input.shape_str());

    const int batch = input.dim(0);
    const int ch_in = spec.in_channels;
    const int ch_out = spec.out_channels;
    const int h = input.dim(2);
    const int w = input.dim(3);
    const int k = spec.kernel;
    const int oh = upstream_grad.dim(2);
    const int ow = upstream_grad.dim(3);
    const int off = spec.padding == Padding::Same ? k / 2 : 0;

    ConvParamGrad grad{Tensor({ch_out, ch_in, k, k}), Tensor({ch_out})};
    const float* in_p = input.data();
    const float* g_p = upstream_grad.data();
    float* wg_p = grad.weight_grad.data();

    // one (o,c) kernel plane per task; inner order b, y ascending with a
    // fixed 8-lane x reduction so results do not depend on the worker count
    parallel_for(static_cast<int64_t>(ch_out) * ch_in, [&](int64_t lo, int64_t hi) {
        for (int64_t oc = lo; oc < hi; ++oc) {
            const int o = static_cast<int>(oc / ch_in);
            const int c = static_cast<int>(oc % ch_in);
            float* wg = wg_p + static_cast<size_t>(oc) * k * k;
            for (int i = 0; i < k; ++i) {
                for (int j = 0; j < k; ++j) {
                    const int sy = i - off;
                    const int sx = j - off;
                    double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
                    for (int b = 0; b < batch; ++b) {
                        const float* g_plane = g_p + (static_cast<size_t>(b) * ch_out + o) * oh * ow;
                        const float* in_plane = in_p + (static_cast<size_t>(b) * ch_in + c) * h * w;
                        for (int y = 0; y < oh; ++y) {
                            const int iy = y + sy;
                            if (iy < 0 || iy >= h) continue;
                            const float* g_row = g_plane + static_cast<size_t>(y) * ow;
                            const float* in_row = in_plane + static_cast<size_t>(iy) * w + sx;
                            const int x0 = sx < 0 ? -sx : 0;
                            const int x1 = w - sx < ow ? w - sx : ow;
                            int x = x0;
                            for (; x + 8 <= x1; x += 8) {
                                for (int l = 0; l < 8; ++l) {
                                    acc[l] += static_cast<double>(g_row[x + l]) * in_row[x + l];
                                }
                            }
                            for (; x < x1; ++x) acc[(x - x0) & 7] += static_cast<double>(g_row[x]) * in_row[x];
                        }
                    }
                    double total = ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
                    wg[static_cast<size_t>(i) * k + j] = static_cast<float>(total);
                }
            }
        }
    });

    float* bg_p = grad.bias_grad.data();
    parallel_for(ch_out, [&](int64_t lo, int64_t hi) {
        for (int64_t o = lo; o < hi; ++o) {
            double acc = 0.0;
            for (int b = 0; b < batch; ++b) {
                const float* g_plane = g_p + (static_cast<size_t>(b) * ch_out + o) * oh * ow;
                for (int64_t i = 0; i < static_cast<int64_t>(oh) * ow; ++i) acc += g_plane[i];
            }
            bg_p[o] = static_cast<float>(acc);
        }
    });
    return grad;
}

Tensor conv2d_input_grad(const Tensor& weights, const Tensor& upstream_grad, const ConvSpec& spec) {
    spec.validate();
    require(weights.rank() == 4, "conv2d_input_grad: weights rank != 4, shape " + weights.shape_str());
    require(upstream_grad.rank() == 4, "conv2d_input_grad: upstream rank != 4, shape " + upstream_grad.shape_str());
    require(weights.dim(0) == spec.out_channels && weights.dim(1) == spec.in_channels,
            "conv2d_input_grad: weights channel extents " + weights.shape_str() + " do not match spec " +
                std::to_string(spec.out_channels) + "x" + std::to_string(spec.in_channels));
    require(weights.dim(2) == spec.kernel && weights.dim(3) == spec.kernel,
            "conv2d_input_grad: weights kernel extent != spec.kernel " + std::to_string(spec.kernel));
    require(upstream_grad.dim(1) == spec.out_channels,
            "conv2d_input_grad: upstream channel extent " + std::to_string(upstream_grad.dim(1)) +
                " != spec.out_channels " + std::to_string(spec.out_channels));

    const int batch = upstream_grad.dim(0);
    const int ch_in = spec.in_channels;
    const int ch_out = spec.out_channels;
    const int k = spec.kernel;
    const int oh = upstream_grad.dim(2);
    const int ow = upstream_grad.dim(3);
    // recover input spatial extents from the forward geometry
    const int h = spec.padding == Padding::Same ? oh : oh + k - 1;
    const int w = spec.padding == Padding::Same ? ow : ow + k - 1;
    const int off = spec.padding == Padding::Same ? k / 2 : 0;

    Tensor out({batch, ch_in, h, w});
    const float* g_p = upstream_grad.data();
    const float* w_p = weights.data();
    float* out_p = out.data();

    // dL/din[b,c,iy,ix] = sum_{o,i,j} w[o,c,i,j] * g[b,o,iy-i+off,ix-j+off]
    parallel_for(static_cast<int64_t>(batch) * ch_in, [&](int64_t lo, int64_t hi) {
        for (int64_t bc = lo; bc < hi; ++bc) {
            const int b = static_cast<int>(bc / ch_in);
            const int c = static_cast<int>(bc % ch_in);
            float* out_plane = out_p + static_cast<size_t>(bc) * h * w;
            for (int o = 0; o < ch_out; ++o) {
                const float* g_plane = g_p + (static_cast<size_t>(b) * ch_out + o) * oh * ow;
                const float* w_oc = w_p + (static_cast<size_t>(o) * ch_in + c) * k * k;
                for (int iy = 0; iy < h; ++iy) {
                    float* out_row = out_plane + static_cast<size_t>(iy) * w;
                    for (int i = 0; i < k; ++i) {
                        const int gy = iy - i + off;
                        if (gy < 0 || gy >= oh) continue;
                        const float* g_row = g_plane + static_cast<size_t>(gy) * ow;
                        for (int j = 0; j < k; ++j) {
                            const int shift = j - off;  // gx = ix - shift
                            const float ws = w_oc[static_cast<size_t>(i) * k + j];
                            const int x0 = shift > 0 ? shift : 0;
                            const int x1 = ow + shift < w ? ow + shift : w;
                            const float* src = g_row - shift;
                            for (int x = x0; x < x1; ++x) out_row[x] += ws * src[x];
                        }
                    }
                }
            }
        }
    });
    return out;
}

uint64_t conv_mac_count() { return g_mac_count.load(std::memory_order_relaxed); }
void reset_conv_mac_count() { g_mac_count.store(0, std::memory_order_relaxed); }

}  // namespace ffcnn
