#pragma once

#include <random>
#include <utility>

#include "supra/image.hpp"

namespace supra::nn {

/// Maximum strengths of the random geometric augmentation.
struct AugConfig {
    bool hflip = true;
    double rotation_frac = 0.20; ///< fraction of 180 degrees
    double shift_frac = 0.05;    ///< fraction of width / height
    double shear_frac = 0.05;    ///< shear angle in radians
    double zoom_frac = 0.05;     ///< scale in [1-z, 1+z]

    void validate() const;
    bool is_identity() const noexcept {
        return !hflip && rotation_frac == 0 && shift_frac == 0 && shear_frac == 0 && zoom_frac == 0;
    }
};

/// One concrete transform. Output pixel q samples the input at
/// flip(A^-1 (q - c - shift) + c), c the image centre, A = R(angle) Sh(shear) Z(zoom).
struct AffineParams {
    bool flip = false;
    double angle = 0;   ///< radians
    double shift_x = 0; ///< pixels
    double shift_y = 0;
    double shear = 0; ///< radians
    double zoom = 1;
};

using Rng = std::mt19937_64;

AffineParams sample_affine(const AugConfig& cfg, int width, int height, Rng& rng);

/// Image: bilinear, mask: nearest; both with symmetric reflect padding.
std::pair<RgbImage, BinMask> apply_affine(const RgbImage& image, const BinMask& mask, const AffineParams& t);

std::pair<RgbImage, BinMask> augment(const RgbImage& image, const BinMask& mask, const AugConfig& cfg, Rng& rng);

} // namespace supra::nn
