#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "supra/error.hpp"

namespace supra {

/// Row-major raster of single values. All image types in the library share
/// this layout; `Pixel` is the per-pixel element.
template <class Pixel>
class Raster {
public:
    using value_type = Pixel;

    Raster() = default;
    Raster(int width, int height, Pixel fill = Pixel{})
        : width_(width), height_(height), data_(checked_size(width, height), fill) {}
    Raster(int width, int height, std::vector<Pixel> data)
        : width_(width), height_(height), data_(std::move(data)) {
        if (data_.size() != checked_size(width, height))
            throw ParamError("raster data length does not match " + std::to_string(width) + "x" +
                             std::to_string(height));
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    Pixel& operator()(int x, int y) noexcept { return data_[index(x, y)]; }
    const Pixel& operator()(int x, int y) const noexcept { return data_[index(x, y)]; }
    Pixel& operator[](std::size_t i) noexcept { return data_[i]; }
    const Pixel& operator[](std::size_t i) const noexcept { return data_[i]; }

    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    std::span<Pixel> pixels() noexcept { return data_; }
    std::span<const Pixel> pixels() const noexcept { return data_; }
    std::vector<Pixel>& storage() noexcept { return data_; }
    const std::vector<Pixel>& storage() const noexcept { return data_; }

    template <class Other>
    bool same_shape(const Raster<Other>& o) const noexcept {
        return width_ == o.width() && height_ == o.height();
    }

    friend bool operator==(const Raster&, const Raster&) = default;

private:
    static std::size_t checked_size(int width, int height) {
        if (width < 0 || height < 0) throw ParamError("negative raster dimensions");
        return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<Pixel> data_;
};

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct Lab {
    double l = 0.0, a = 0.0, b = 0.0;
    friend bool operator==(const Lab&, const Lab&) = default;
};

using RgbImage = Raster<Rgb>;
using LabImage = Raster<Lab>;
/// Values are 0 or 1.
using BinMask = Raster<std::uint8_t>;
/// Values are probabilities in [0,1].
using ProbMask = Raster<double>;

inline constexpr int kMinImageSide = 8;

/// Throws ParamError unless the image satisfies the minimum-size invariant.
void require_min_size(int width, int height, const char* what);

template <class A, class B>
void require_same_shape(const Raster<A>& a, const Raster<B>& b, const char* what) {
    if (!a.same_shape(b))
        throw ParamError(std::string(what) + ": dimension mismatch (" + std::to_string(a.width()) + "x" +
                         std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                         std::to_string(b.height()) + ")");
}

/// output[i] = 1 iff mask[i] >= t. `t` must lie in (0,1).
BinMask threshold(const ProbMask& mask, double t);

/// Throws ParamError if any value is outside {0,1}.
void validate(const BinMask& mask);
/// Throws ParamError if any value is outside [0,1] or non-finite.
void validate(const ProbMask& mask);

ProbMask to_prob(const BinMask& mask);

// sRGB (D65) <-> CIELAB.
Lab srgb_to_lab(Rgb c) noexcept;
Rgb lab_to_srgb(Lab c) noexcept;
LabImage rgb_to_lab(const RgbImage& image);
RgbImage lab_to_rgb(const LabImage& image);

/// Squared Euclidean distance in Lab.
inline double lab_distance_sq(const Lab& p, const Lab& q) noexcept {
    const double dl = p.l - q.l, da = p.a - q.a, db = p.b - q.b;
    return dl * dl + da * da + db * db;
}

} // namespace supra
