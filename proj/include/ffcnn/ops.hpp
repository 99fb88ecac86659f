#pragma once

#include <cstdint>
#include <vector>

#include "ffcnn/tensor.hpp"

namespace ffcnn {

// max(0, x) elementwise
Tensor relu(const Tensor& input);

// passes upstream where input > 0, zero elsewhere (subgradient at 0 is 0)
Tensor relu_backward(const Tensor& input, const Tensor& upstream_grad);

struct RmsNormResult {
    Tensor normalized;  // same shape as input
    Tensor rms;         // [B]
};

// Per-sample y / sqrt(mean(y^2) + eps). Dim 0 is the sample axis; remaining
// dims are flattened. eps guards the all-zero sample.
RmsNormResult rms_normalize(const Tensor& activations);

constexpr float kRmsEps = 1e-8f;

struct PoolMask {
    std::vector<int> input_shape;
    std::vector<int64_t> argmax;  // flat input index per output element
};

struct Pool2Result {
    Tensor output;
    PoolMask mask;
};

// 2x2 window maxima, stride 2. Odd trailing extents are truncated.
// Ties resolve to the first element in row-major window order.
Pool2Result maxpool2(const Tensor& input);

// routes each upstream value to its window's argmax position
Tensor maxpool2_backward(const PoolMask& mask, const Tensor& upstream_grad);

struct AdamState {
    Tensor m;  // first moment
    Tensor v;  // second moment
    int64_t step = 0;
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float eps = 1e-8f;

    AdamState() = default;
    explicit AdamState(const std::vector<int>& param_shape) : m(param_shape), v(param_shape) {}
};

// standard Adam update with bias correction
void adam_step(Tensor& params, const Tensor& grads, AdamState& state, float lr);

}  // namespace ffcnn
