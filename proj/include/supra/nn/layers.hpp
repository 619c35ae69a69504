#pragma once

#include <cstdint>
#include <vector>

#include "supra/nn/tensor.hpp"

// Layer primitives of the segmentation network. Each forward has a matching
// backward taking the upstream gradient. Convolutions are "same" with zero
// padding k/2; weights are (out, in, k, k).

namespace supra::nn {

Tensor conv_forward(const Tensor& input, const Tensor& weight, const Tensor& bias);

struct ConvGrads {
    Tensor input;
    Tensor weight;
    Tensor bias;
};
ConvGrads conv_backward(const Tensor& input, const Tensor& weight, const Tensor& grad_out);

Tensor relu_forward(const Tensor& input);
/// `output` is the forward result; output > 0 exactly where input > 0.
Tensor relu_backward(const Tensor& output, const Tensor& grad_out);

struct PoolResult {
    Tensor output;
    /// Flat input index of each output's maximum (first in raster order on ties).
    std::vector<std::uint32_t> argmax;
};
/// 2x2 stride-2 max pooling; odd trailing rows/cols are dropped.
PoolResult maxpool_forward(const Tensor& input);
Tensor maxpool_backward(const Shape& input_shape, const std::vector<std::uint32_t>& argmax, const Tensor& grad_out);

Tensor upsample_forward(const Tensor& input);
Tensor upsample_backward(const Tensor& grad_out);

Tensor concat_forward(const Tensor& a, const Tensor& b);
/// Splits the gradient into the first `a_channels` channels and the rest.
std::pair<Tensor, Tensor> concat_backward(const Tensor& grad_out, int a_channels);

Tensor sigmoid_forward(const Tensor& input);
Tensor sigmoid_backward(const Tensor& output, const Tensor& grad_out);

} // namespace supra::nn
