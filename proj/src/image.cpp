#include "supra/image.hpp"

#include <algorithm>
#include <cmath>

namespace supra {

namespace {

// D65 reference white, 2 degree observer.
constexpr double kWhiteX = 0.95047;
constexpr double kWhiteY = 1.00000;
constexpr double kWhiteZ = 1.08883;

constexpr double kDelta = 6.0 / 29.0;

double srgb_to_linear(double c) noexcept {
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double linear_to_srgb(double c) noexcept {
    return c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

double lab_f(double t) noexcept {
    return t > kDelta * kDelta * kDelta ? std::cbrt(t) : t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}

double lab_f_inv(double t) noexcept {
    return t > kDelta ? t * t * t : 3.0 * kDelta * kDelta * (t - 4.0 / 29.0);
}

std::uint8_t to_byte(double v) noexcept {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v * 255.0), 0l, 255l));
}

} // namespace

void require_min_size(int width, int height, const char* what) {
    if (width < kMinImageSide || height < kMinImageSide)
        throw ParamError(std::string(what) + ": image must be at least " + std::to_string(kMinImageSide) + "x" +
                         std::to_string(kMinImageSide) + ", got " + std::to_string(width) + "x" +
                         std::to_string(height));
}

BinMask threshold(const ProbMask& mask, double t) {
    if (!(t > 0.0 && t < 1.0)) throw ParamError("threshold must lie in (0,1), got " + std::to_string(t));
    BinMask out(mask.width(), mask.height());
    for (std::size_t i = 0; i < mask.size(); ++i) out[i] = mask[i] >= t ? 1 : 0;
    return out;
}

void validate(const BinMask& mask) {
    for (auto v : mask.pixels())
        if (v > 1) throw ParamError("binary mask contains value " + std::to_string(v));
}

void validate(const ProbMask& mask) {
    for (auto v : mask.pixels())
        if (!(v >= 0.0 && v <= 1.0)) throw ParamError("probability mask contains value " + std::to_string(v));
}

ProbMask to_prob(const BinMask& mask) {
    ProbMask out(mask.width(), mask.height());
    for (std::size_t i = 0; i < mask.size(); ++i) out[i] = mask[i] ? 1.0 : 0.0;
    return out;
}

Lab srgb_to_lab(Rgb c) noexcept {
    const double r = srgb_to_linear(c.r / 255.0);
    const double g = srgb_to_linear(c.g / 255.0);
    const double b = srgb_to_linear(c.b / 255.0);

    const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
    const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
    const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;

    const double fx = lab_f(x / kWhiteX);
    const double fy = lab_f(y / kWhiteY);
    const double fz = lab_f(z / kWhiteZ);
    // The Y row of the matrix sums to slightly above 1, so white would land a hair over 100.
    return {std::min(116.0 * fy - 16.0, 100.0), 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

Rgb lab_to_srgb(Lab c) noexcept {
    const double fy = (c.l + 16.0) / 116.0;
    const double fx = fy + c.a / 500.0;
    const double fz = fy - c.b / 200.0;
    const double x = kWhiteX * lab_f_inv(fx);
    const double y = kWhiteY * lab_f_inv(fy);
    const double z = kWhiteZ * lab_f_inv(fz);

    const double r = 3.2404542 * x - 1.5371385 * y - 0.4985314 * z;
    const double g = -0.9692660 * x + 1.8760108 * y + 0.0415560 * z;
    const double b = 0.0556434 * x - 0.2040259 * y + 1.0572252 * z;

    auto encode = [](double v) { return to_byte(linear_to_srgb(std::clamp(v, 0.0, 1.0))); };
    return {encode(r), encode(g), encode(b)};
}

LabImage rgb_to_lab(const RgbImage& image) {
    LabImage out(image.width(), image.height());
    for (std::size_t i = 0; i < image.size(); ++i) out[i] = srgb_to_lab(image[i]);
    return out;
}

RgbImage lab_to_rgb(const LabImage& image) {
    RgbImage out(image.width(), image.height());
    for (std::size_t i = 0; i < image.size(); ++i) out[i] = lab_to_srgb(image[i]);
    return out;
}

} // namespace supra
