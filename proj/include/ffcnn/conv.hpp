#pragma once

#include <cstdint>

#include "ffcnn/tensor.hpp"

namespace ffcnn {

enum class Padding { Same, Valid };

// Stride-1 square-kernel convolution geometry.
struct ConvSpec {
    int in_channels = 1;
    int out_channels = 1;
    int kernel = 3;
    Padding padding = Padding::Same;

    void validate() const;
    int out_extent(int in) const { return padding == Padding::Same ? in : in - kernel + 1; }
};

// out[b,o,y,x] = bias[o] + sum_{c,i,j} input[b,c,y+i-k/2,x+j-k/2] * weights[o,c,i,j]
// (same padding; valid mode shifts the window instead of zero-filling).
// Per-output-element summation runs c, then i, then j ascending.
Tensor conv2d_forward(const Tensor& input, const Tensor& weights, const Tensor& bias, const ConvSpec& spec);

struct ConvParamGrad {
    Tensor weight_grad;
    Tensor bias_grad;
};

// dL/dweights and dL/dbias given dL/dactivations, summed over the batch in
// sample-index-ascending order.
ConvParamGrad conv2d_weight_grad(const Tensor& input, const Tensor& upstream_grad, const ConvSpec& spec);

// dL/dinput: full correlation of the upstream gradient with flipped kernels.
Tensor conv2d_input_grad(const Tensor& weights, const Tensor& upstream_grad, const ConvSpec& spec);

// Multiply-accumulate accounting for the inference-cost comparison.
// Counts conv2d_forward MACs only.
uint64_t conv_mac_count();
void reset_conv_mac_count();

}  // namespace ffcnn
