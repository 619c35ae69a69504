#include "supra/slicloss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace supra::loss {

namespace {

template <class P>
void check_shape(const slic::SuperpixelLabelMap& labels, const Raster<P>& r, const char* what) {
    if (!labels.same_shape(r))
        throw ParamError(std::string(what) + ": label map " + std::to_string(labels.width()) + "x" +
                         std::to_string(labels.height()) + " does not match mask " + std::to_string(r.width()) +
                         "x" + std::to_string(r.height()));
}

} // namespace

void LossConfig::validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ParamError("loss: lambda must be >= 0");
    if (!(tau > 0.5 && tau <= 1.0)) throw ParamError("loss: tau must lie in (0.5, 1]");
    if (!(soft_ramp_low < tau) || !(soft_ramp_low >= 0.0))
        throw ParamError("loss: soft_ramp_low must lie in [0, tau)");
}

ConsistencyReport hard_consistency(const slic::SuperpixelLabelMap& labels, const BinMask& mask, double tau) {
    check_shape(labels, mask, "hard_consistency");
    if (!(tau > 0.5 && tau <= 1.0)) throw ParamError("hard_consistency: tau must lie in (0.5, 1]");
    const std::size_t segments = labels.num_segments();
    std::vector<std::size_t> fg(segments, 0), area(segments, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        ++area[labels[i]];
        fg[labels[i]] += mask[i] ? 1 : 0;
    }
    ConsistencyReport report;
    report.num_segments = segments;
    report.per_segment_occupancy.resize(segments);
    std::size_t consistent = 0;
    for (std::size_t j = 0; j < segments; ++j) {
        const std::size_t majority = std::max(fg[j], area[j] - fg[j]);
        report.per_segment_occupancy[j] = static_cast<double>(majority) / static_cast<double>(area[j]);
        if (report.per_segment_occupancy[j] >= tau) ++consistent;
    }
    report.consistent_fraction = segments ? static_cast<double>(consistent) / static_cast<double>(segments) : 1.0;
    report.penalty = 1.0 - report.consistent_fraction;
    return report;
}

ValueGrad soft_consistency(const slic::SuperpixelLabelMap& labels, const ProbMask& probs, const LossConfig& cfg) {
    check_shape(labels, probs, "soft_consistency");
    cfg.validate();
    const std::size_t segments = labels.num_segments();
    std::vector<double> sum(segments, 0.0);
    std::vector<std::size_t> area(segments, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        sum[labels[i]] += probs[i];
        ++area[labels[i]];
    }

    const double span = cfg.tau - cfg.soft_ramp_low;
    std::vector<double> seg_grad(segments, 0.0);
    double value = 0.0;
    for (std::size_t j = 0; j < segments; ++j) {
        const double mean = sum[j] / static_cast<double>(area[j]);
        const double occupancy = std::max(mean, 1.0 - mean);
        const double ramp = (cfg.tau - occupancy) / span;
        value += std::clamp(ramp, 0.0, 1.0);
        if (ramp > 0.0 && ramp < 1.0 && mean != 0.5) {
            const double d_occ_d_mean = mean > 0.5 ? 1.0 : -1.0;
            seg_grad[j] = -d_occ_d_mean / span / static_cast<double>(area[j]);
        }
    }
    const double inv_segments = 1.0 / static_cast<double>(segments);
    ValueGrad out;
    out.value = value * inv_segments;
    out.grad.resize(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) out.grad[i] = seg_grad[labels[i]] * inv_segments;
    return out;
}

ValueGrad bce(const ProbMask& probs, const BinMask& target) {
    require_same_shape(probs, target, "bce");
    const std::size_t n = probs.size();
    if (n == 0) throw ParamError("bce: empty mask");
    const double inv_n = 1.0 / static_cast<double>(n);
    ValueGrad out;
    out.grad.resize(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double p = probs[i];
        const bool clamped = p < kBceEpsilon || p > 1.0 - kBceEpsilon;
        const double q = std::clamp(p, kBceEpsilon, 1.0 - kBceEpsilon);
        if (target[i]) {
            sum -= std::log(q);
            out.grad[i] = clamped ? 0.0 : -inv_n / q;
        } else {
            sum -= std::log1p(-q);
            out.grad[i] = clamped ? 0.0 : inv_n / (1.0 - q);
        }
    }
    out.value = sum * inv_n;
    return out;
}

double combine(double bce_value, double consistency, double lambda) noexcept {
    return (bce_value + lambda * consistency) / (1.0 + lambda);
}

SlicLossResult slic_loss(const ProbMask& probs, const BinMask& target, const slic::SuperpixelLabelMap& labels,
                         const LossConfig& cfg) {
    require_same_shape(probs, target, "slic_loss");
    check_shape(labels, probs, "slic_loss");
    cfg.validate();
    const auto b = bce(probs, target);
    const auto c = soft_consistency(labels, probs, cfg);

    SlicLossResult out;
    out.breakdown = {b.value, c.value, combine(b.value, c.value, cfg.lambda), cfg.lambda};
    out.grad.resize(b.grad.size());
    for (std::size_t i = 0; i < out.grad.size(); ++i) out.grad[i] = combine(b.grad[i], c.grad[i], cfg.lambda);
    return out;
}

LossBreakdown hard_slic_loss(const ProbMask& probs, const BinMask& target, const slic::SuperpixelLabelMap& labels,
                             const LossConfig& cfg, double t) {
    require_same_shape(probs, target, "hard_slic_loss");
    check_shape(labels, probs, "hard_slic_loss");
    cfg.validate();
    const double b = bce(probs, target).value;
    const double c = hard_consistency(labels, threshold(probs, t), cfg.tau).penalty;
    return {b, c, combine(b, c, cfg.lambda), cfg.lambda};
}

} // namespace supra::loss
