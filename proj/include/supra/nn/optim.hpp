#pragma once

#include "supra/nn/model.hpp"

namespace supra::nn {

struct AdamHyper {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Bias-corrected Adam update in place; increments params.step.
void adam_step(ParamSet& params, const GradientSet& grads, double lr, const AdamHyper& hyper = {});

} // namespace supra::nn
