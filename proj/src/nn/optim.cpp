#include "supra/nn/optim.hpp"

#include <cmath>

namespace supra::nn {

void adam_step(ParamSet& params, const GradientSet& grads, double lr, const AdamHyper& hyper) {
    if (grads.grads.size() != params.params.size())
        throw ParamError("adam_step: " + std::to_string(grads.grads.size()) + " gradients for " +
                         std::to_string(params.params.size()) + " parameters");
    for (std::size_t i = 0; i < grads.grads.size(); ++i)
        if (grads.grads[i].shape != params.params[i].value.shape)
            throw ParamError("adam_step: gradient " + to_string(grads.grads[i].shape) + " does not match parameter " +
                             params.params[i].name + " " + to_string(params.params[i].value.shape));

    const auto t = static_cast<double>(++params.step);
    const double c1 = 1.0 - std::pow(hyper.beta1, t);
    const double c2 = 1.0 - std::pow(hyper.beta2, t);
    for (std::size_t i = 0; i < grads.grads.size(); ++i) {
        auto& p = params.params[i];
        const auto& g = grads.grads[i].data;
        for (std::size_t j = 0; j < g.size(); ++j) {
            double& m = p.m.data[j];
            double& v = p.v.data[j];
            m = hyper.beta1 * m + (1.0 - hyper.beta1) * g[j];
            v = hyper.beta2 * v + (1.0 - hyper.beta2) * g[j] * g[j];
            const double m_hat = m / c1;
            const double v_hat = v / c2;
            p.value.data[j] -= lr * m_hat / (std::sqrt(v_hat) + hyper.epsilon);
        }
    }
}

} // namespace supra::nn
