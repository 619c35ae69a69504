#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "supra/image.hpp"

namespace supra::slic {

struct SlicParams {
    int k = 100;                        ///< target superpixel count
    double m = 40.0;                    ///< compactness
    int iterations = 10;
    double connectivity_min_frac = 0.25; ///< fragments below this fraction of S^2 are merged

    /// Throws ParamError when a field is out of range for an image of `pixels` pixels.
    void validate(std::size_t pixels) const;
};

struct ClusterCenter {
    double l = 0, a = 0, b = 0;
    double x = 0, y = 0;
    std::size_t count = 0;
};

/// Per-pixel segment ids in [0, num_segments()).
class SuperpixelLabelMap {
public:
    SuperpixelLabelMap() = default;
    /// Labels must already be compacted; throws ParamError otherwise.
    SuperpixelLabelMap(int width, int height, std::vector<std::uint32_t> labels);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return labels_.size(); }
    std::uint32_t num_segments() const noexcept { return num_segments_; }
    std::uint32_t operator[](std::size_t i) const noexcept { return labels_[i]; }
    std::uint32_t operator()(int x, int y) const noexcept {
        return labels_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)];
    }
    const std::vector<std::uint32_t>& labels() const noexcept { return labels_; }

    /// Pixel count of every segment.
    std::vector<std::size_t> segment_areas() const;

    template <class P>
    bool same_shape(const Raster<P>& r) const noexcept {
        return width_ == r.width() && height_ == r.height();
    }

    friend bool operator==(const SuperpixelLabelMap&, const SuperpixelLabelMap&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::uint32_t num_segments_ = 0;
    std::vector<std::uint32_t> labels_;
};

/// S = sqrt(N/k).
double grid_spacing(std::size_t pixels, int k);

/// Regular grid of floor(W/S) x floor(H/S) seeds, each nudged to the lowest
/// gradient position of its 3x3 neighbourhood.
std::vector<ClusterCenter> seed_centers(const LabImage& image, int k);

/// D = sqrt(d_c^2 + (d_s/S)^2 m^2).
double slic_distance(const ClusterCenter& center, const Lab& color, double x, double y, double spacing, double m);

struct SegmentTrace {
    double spacing = 0;
    /// Sum over pixels of the squared assignment distance D^2, one entry per iteration.
    std::vector<double> objective;
    /// Same, for D itself.
    std::vector<double> objective_d;
    /// Labels after the final assignment, before connectivity (center ids, -1 never appears).
    std::vector<std::int32_t> raw_labels;
    /// Centers that the final assignment measured against.
    std::vector<ClusterCenter> assignment_centers;
    /// Centers after the final update.
    std::vector<ClusterCenter> centers;
};

/// Full SLIC: seeding, windowed k-means in (L,a,b,x,y), connectivity
/// enforcement. `seed` is currently unused; the algorithm is deterministic.
SuperpixelLabelMap segment(const LabImage& image, const SlicParams& params, std::uint64_t seed = 0,
                           SegmentTrace* trace = nullptr);

/// Labels of arbitrary (not necessarily compacted) ids in, compacted
/// 4-connected segments out. Components smaller than min_frac * S^2 are merged
/// into their largest adjacent component.
SuperpixelLabelMap enforce_connectivity(int width, int height, const std::vector<std::int32_t>& labels,
                                        double spacing, double min_frac);
SuperpixelLabelMap enforce_connectivity(const SuperpixelLabelMap& labels, double spacing, double min_frac);

inline constexpr Rgb kBoundaryColor{255, 255, 0};

/// Recolors pixels with a 4-neighbour of a different label.
RgbImage boundary_overlay(const SuperpixelLabelMap& labels, const RgbImage& image);

/// Returns whether every segment's pixel set is 4-connected.
bool is_four_connected(const SuperpixelLabelMap& labels);

// SPLM format: "SPLM", u32 LE width, height, num_segments, then width*height u32 LE labels.
void save_label_map(const SuperpixelLabelMap& labels, const std::filesystem::path& path);
SuperpixelLabelMap load_label_map(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_label_map(const SuperpixelLabelMap& labels);
SuperpixelLabelMap decode_label_map(const std::vector<std::uint8_t>& bytes);

} // namespace supra::slic
