#pragma once

#include <vector>

#include "supra/image.hpp"
#include "supra/slic.hpp"

// Superpixel-consistency measure and the compound segmentation loss
//
//     total = (BCE(y, y') + lambda * C(x, y')) / (1 + lambda)
//
// where C is the fraction of superpixels that are NOT dominated by a single
// class (occupancy of the majority class below tau), so that minimising the
// loss maximises consistency with the superpixel grid.
//
// Two forms of C exist. The hard form counts thresholded pixels and is used for
// reporting and grid-search scoring. The soft form replaces the per-segment
// hard decision with a linear ramp on the mean predicted probability and is
// what training differentiates:
//
//     o_j = max(mean_j(p), 1 - mean_j(p))
//     c_j = clamp((tau - o_j) / (tau - ramp_low), 0, 1)
//     C   = mean_j c_j
//
// At binary probabilities with o_j outside (ramp_low, tau) both forms agree.

namespace supra::loss {

struct LossConfig {
    double lambda = 0.75;
    double tau = 0.8;
    double soft_ramp_low = 0.5;

    void validate() const;
};

struct ConsistencyReport {
    std::size_t num_segments = 0;
    double consistent_fraction = 0;
    double penalty = 0;
    /// max(f_j, 1 - f_j) per segment, in [0.5, 1].
    std::vector<double> per_segment_occupancy;
};

struct LossBreakdown {
    double bce = 0;
    double consistency = 0;
    double total = 0;
    double lambda = 0;
};

/// Value plus d(value)/d(p_i) for every pixel.
struct ValueGrad {
    double value = 0;
    std::vector<double> grad;
};

inline constexpr double kBceEpsilon = 1e-7;

ConsistencyReport hard_consistency(const slic::SuperpixelLabelMap& labels, const BinMask& mask, double tau);

ValueGrad soft_consistency(const slic::SuperpixelLabelMap& labels, const ProbMask& probs, const LossConfig& cfg);

/// Mean binary cross-entropy with probabilities clamped to [eps, 1-eps].
/// The gradient is zero wherever the clamp is active.
ValueGrad bce(const ProbMask& probs, const BinMask& target);

/// (bce + lambda * c) / (1 + lambda)
double combine(double bce_value, double consistency, double lambda) noexcept;

struct SlicLossResult {
    LossBreakdown breakdown;
    std::vector<double> grad;
};

SlicLossResult slic_loss(const ProbMask& probs, const BinMask& target, const slic::SuperpixelLabelMap& labels,
                         const LossConfig& cfg);

/// Loss with the hard measure on probs thresholded at t. No gradient.
LossBreakdown hard_slic_loss(const ProbMask& probs, const BinMask& target, const slic::SuperpixelLabelMap& labels,
                             const LossConfig& cfg, double t);

} // namespace supra::loss
