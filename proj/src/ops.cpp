#include "ffcnn/ops.hpp"

#include <cmath>
#include <stdexcept>

#include "ffcnn/parallel.hpp"

namespace ffcnn {

Tensor relu(const Tensor& input) {
    Tensor out(input.shape());
    const float* in_p = input.data();
    float* out_p = out.data();
    const int64_t n = input.size();
    for (int64_t i = 0; i < n; ++i) out_p[i] = in_p[i] > 0.0f ? in_p[i] : 0.0f;
    return out;
}

Tensor relu_backward(const Tensor& input, const Tensor& upstream_grad) {
    if (!input.same_shape(upstream_grad)) {
        throw std::invalid_argument("relu_backward: input shape " + input.shape_str() +
                                    " != upstream shape " + upstream_grad.shape_str());
    }
    Tensor out(input.shape());
    const float* in_p = input.data();
    const float* g_p = upstream_grad.data();
    float* out_p = out.data();
    const int64_t n = input.size();
    for (int64_t i = 0; i < n; ++i) out_p[i] = in_p[i] > 0.0f ? g_p[i] : 0.0f;
    return out;
}

RmsNormResult rms_normalize(const Tensor& activations) {
    if (activations.rank() < 2) {
        throw std::invalid_argument("rms_normalize: need a sample axis, got shape " + activations.shape_str());
    }
    const int batch = activations.dim(0);
    const int64_t n_flat = activations.size() / batch;

    RmsNormResult res{Tensor(activations.shape()), Tensor({batch})};
    const float* in_p = activations.data();
    float* out_p = res.normalized.data();
    float* rms_p = res.rms.data();

    parallel_for(batch, [&](int64_t lo, int64_t hi) {
        for (int64_t b = lo; b < hi; ++b) {
            const float* row = in_p + b * n_flat;
            double sum_sq = 0.0;
            for (int64_t i = 0; i < n_flat; ++i) sum_sq += static_cast<double>(row[i]) * row[i];
            const float rms = static_cast<float>(std::sqrt(sum_sq / static_cast<double>(n_flat) + kRmsEps));
            rms_p[b] = rms;
            const float inv = 1.0f / rms;
            float* out_row = out_p + b * n_flat;
            for (int64_t i = 0; i < n_flat; ++i) out_row[i] = row[i] * inv;
        }
    });
    return res;
}

Pool2Result maxpool2(const Tensor& input) {
    if (input.rank() != 4) {
        throw std::invalid_argument("maxpool2: input rank != 4, shape " + input.shape_str());
    }
    const int batch = input.dim(0);
    const int ch = input.dim(1);
    const int h = input.dim(2);
    const int w = input.dim(3);
    const int oh = h / 2;
    const int ow = w / 2;
    if (oh < 1 || ow < 1) {
        throw std::invalid_argument("maxpool2: spatial extents " + input.shape_str() + " too small for 2x2 windows");
    }

    Pool2Result res{Tensor({batch, ch, oh, ow}), PoolMask{input.shape(), {}}};
    res.mask.argmax.assign(static_cast<size_t>(res.output.size()), 0);

    const float* in_p = input.data();
    float* out_p = res.output.data();
    int64_t* am_p = res.mask.argmax.data();

    parallel_for(static_cast<int64_t>(batch) * ch, [&](int64_t lo, int64_t hi) {
        for (int64_t bc = lo; bc < hi; ++bc) {
            const float* plane = in_p + bc * h * w;
            float* out_plane = out_p + bc * oh * ow;
            int64_t* am_plane = am_p + bc * oh * ow;
            for (int y = 0; y < oh; ++y) {
                for (int x = 0; x < ow; ++x) {
                    const int iy = 2 * y;
                    const int ix = 2 * x;
                    int64_t best = static_cast<int64_t>(iy) * w + ix;
                    float best_v = plane[best];
                    const int64_t cand[3] = {static_cast<int64_t>(iy) * w + ix + 1,
                                             static_cast<int64_t>(iy + 1) * w + ix,
                                             static_cast<int64_t>(iy + 1) * w + ix + 1};
                    for (int64_t c : cand) {
                        if (plane[c] > best_v) {
                            best_v = plane[c];
                            best = c;
                        }
                    }
                    out_plane[static_cast<size_t>(y) * ow + x] = best_v;
                    am_plane[static_cast<size_t>(y) * ow + x] = bc * h * w + best;
                }
            }
        }
    });
    return res;
}

Tensor maxpool2_backward(const PoolMask& mask, const Tensor& upstream_grad) {
    const int64_t n_out = static_cast<int64_t>(mask.argmax.size());
    if (upstream_grad.size() != n_out) {
        throw std::invalid_argument("maxpool2_backward: upstream size " + std::to_string(upstream_grad.size()) +
                                    " != mask element count " + std::to_string(n_out));
    }
    Tensor out(mask.input_shape);
    const float* g_p = upstream_grad.data();
    float* out_p = out.data();
    for (int64_t i = 0; i < n_out; ++i) out_p[mask.argmax[static_cast<size_t>(i)]] += g_p[i];
    return out;
}

void adam_step(Tensor& params, const Tensor& grads, AdamState& state, float lr) {
    if (!params.same_shape(grads)) {
        throw std::invalid_argument("adam_step: params shape " + params.shape_str() + " != grads shape " +
                                    grads.shape_str());
    }
    if (!params.same_shape(state.m)) {
        throw std::invalid_argument("adam_step: state shape " + state.m.shape_str() + " != params shape " +
                                    params.shape_str());
    }
    state.step += 1;
    const double bc1 = 1.0 - std::pow(static_cast<double>(state.beta1), static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(static_cast<double>(state.beta2), static_cast<double>(state.step));
    const float b1 = state.beta1;
    const float b2 = state.beta2;
    const float inv_bc1 = static_cast<float>(1.0 / bc1);
    const float inv_bc2 = static_cast<float>(1.0 / bc2);

    float* p = params.data();
    float* m = state.m.data();
    float* v = state.v.data();
    const float* g = grads.data();
    const int64_t n = params.size();
    for (int64_t i = 0; i < n; ++i) {
        m[i] = b1 * m[i] + (1.0f - b1) * g[i];
        v[i] = b2 * v[i] + (1.0f - b2) * g[i] * g[i];
        const float m_hat = m[i] * inv_bc1;
        const float v_hat = v[i] * inv_bc2;
        p[i] -= lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
}

}  // namespace ffcnn
