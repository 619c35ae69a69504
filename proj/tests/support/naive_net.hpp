#pragma once

#include <string>
#include <vector>

#include "supra/nn/model.hpp"

namespace supra::testing {

/// Plain nested-loop reference for the segmentation network, independent of
/// the library's layer kernels. `signature` receives every ReLU sign and
/// max-pool winner so callers can detect when a perturbation crosses a kink.
struct NaiveNet {
    nn::ModelConfig cfg;

    std::vector<double> forward(const nn::ParamSet& params, const nn::Tensor& image,
                                std::vector<int>* signature = nullptr) const;
};

/// Direct "same" convolution with zero padding.
nn::Tensor naive_conv(const nn::Tensor& in, const nn::Tensor& w, const nn::Tensor& b);

} // namespace supra::testing
