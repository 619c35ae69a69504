#include "supra/nn/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace supra::nn {

namespace {

// Symmetric extension: ... c b a | a b c ... | c b a ...
int reflect(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * n;
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - 1 - i;
}

struct Inverse {
    double m00, m01, m10, m11;
};

Inverse inverse_matrix(const AffineParams& t) {
    // A = R * Sh * Z with Sh = [[1, -sin s], [0, cos s]].
    const double c = std::cos(t.angle), s = std::sin(t.angle);
    const double sh_a = -std::sin(t.shear), sh_d = std::cos(t.shear);
    const double a00 = c * t.zoom, a01 = (c * sh_a - s * sh_d) * t.zoom;
    const double a10 = s * t.zoom, a11 = (s * sh_a + c * sh_d) * t.zoom;
    const double det = a00 * a11 - a01 * a10;
    return {a11 / det, -a01 / det, -a10 / det, a00 / det};
}

} // namespace

void AugConfig::validate() const {
    for (double f : {rotation_frac, shift_frac, shear_frac, zoom_frac})
        if (!(f >= 0.0 && f < 1.0)) throw ParamError("augment: strengths must lie in [0,1)");
}

AffineParams sample_affine(const AugConfig& cfg, int width, int height, Rng& rng) {
    cfg.validate();
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    AffineParams t;
    t.flip = cfg.hflip && std::bernoulli_distribution(0.5)(rng);
    t.angle = unit(rng) * cfg.rotation_frac * std::numbers::pi;
    t.shift_x = unit(rng) * cfg.shift_frac * width;
    t.shift_y = unit(rng) * cfg.shift_frac * height;
    t.shear = unit(rng) * cfg.shear_frac;
    t.zoom = 1.0 + unit(rng) * cfg.zoom_frac;
    return t;
}

std::pair<RgbImage, BinMask> apply_affine(const RgbImage& image, const BinMask& mask, const AffineParams& t) {
    require_same_shape(image, mask, "augment");
    const int w = image.width(), h = image.height();
    const double cx = (w - 1) / 2.0, cy = (h - 1) / 2.0;
    const Inverse inv = inverse_matrix(t);

    RgbImage out_img(w, h);
    BinMask out_mask(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double qx = x - cx - t.shift_x, qy = y - cy - t.shift_y;
            double sx = inv.m00 * qx + inv.m01 * qy + cx;
            const double sy = inv.m10 * qx + inv.m11 * qy + cy;
            if (t.flip) sx = (w - 1) - sx;

            const double fx0 = std::floor(sx), fy0 = std::floor(sy);
            const double fx = sx - fx0, fy = sy - fy0;
            const int x0 = static_cast<int>(fx0), y0 = static_cast<int>(fy0);
            const Rgb& p00 = image(reflect(x0, w), reflect(y0, h));
            const Rgb& p10 = image(reflect(x0 + 1, w), reflect(y0, h));
            const Rgb& p01 = image(reflect(x0, w), reflect(y0 + 1, h));
            const Rgb& p11 = image(reflect(x0 + 1, w), reflect(y0 + 1, h));
            auto lerp = [&](std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d) {
                const double top = a + (b - a) * fx;
                const double bottom = c + (d - c) * fx;
                const double v = top + (bottom - top) * fy;
                return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0l, 255l));
            };
            out_img(x, y) = {lerp(p00.r, p10.r, p01.r, p11.r), lerp(p00.g, p10.g, p01.g, p11.g),
                             lerp(p00.b, p10.b, p01.b, p11.b)};

            const int nx = static_cast<int>(std::floor(sx + 0.5)), ny = static_cast<int>(std::floor(sy + 0.5));
            out_mask(x, y) = mask(reflect(nx, w), reflect(ny, h));
        }
    }
    return {std::move(out_img), std::move(out_mask)};
}

std::pair<RgbImage, BinMask> augment(const RgbImage& image, const BinMask& mask, const AugConfig& cfg, Rng& rng) {
    return apply_affine(image, mask, sample_affine(cfg, image.width(), image.height(), rng));
}

} // namespace supra::nn
