#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "supra/image.hpp"

namespace supra::data {

enum class Modality { source, target };

std::string to_string(Modality m);
Modality modality_from_string(const std::string& s);

struct Item {
    RgbImage image;
    BinMask mask;
    std::string id;
    Modality modality = Modality::source;
};

struct Dataset {
    std::vector<Item> items;

    std::size_t size() const noexcept { return items.size(); }
    bool empty() const noexcept { return items.empty(); }
    /// Throws ParamError on mismatched image/mask sizes or duplicate ids.
    void validate() const;
};

/// Pairs `image_dir/<stem>.png` with `mask_dir/<stem>.png`, binarizing masks at
/// 128 and sorting by id. All missing masks and size mismatches are reported
/// together in one error.
Dataset load_dataset(const std::filesystem::path& image_dir, const std::filesystem::path& mask_dir, Modality modality);
/// `<root>/images` and `<root>/masks`.
Dataset load_dataset(const std::filesystem::path& root, Modality modality);
/// Writes the `<root>/images`, `<root>/masks` layout.
void save_dataset(const Dataset& dataset, const std::filesystem::path& root);

/// Seeded shuffle, then the first round(train_frac * n) items go to train.
std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_frac, std::uint64_t seed);

struct Palette {
    Lab lesion{52.0, 38.0, 28.0};
    Lab background{68.0, 18.0, 22.0};
    /// Per-image uniform jitter of each Lab channel, +-jitter.
    double jitter = 3.0;
};

struct SynthConfig {
    int count = 60;
    int height = 128;
    int width = 128;
    std::array<int, 2> blob_count_range{1, 3};
    /// Blob radius as a fraction of the image side, before the smooth warp.
    double blob_smoothness = 0.12;
    Palette source_palette{};
    /// A cooler, darker rendering of the same scene. The shift is set so that a
    /// colour-keyed source model transfers only partially.
    Palette target_palette{{50.0, 27.0, 15.0}, {66.0, 9.0, 11.0}, 3.0};
    double noise_sigma = 4.0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SynthResult {
    Dataset source;
    Dataset target;
    std::vector<double> foreground_fraction; ///< per image index, shared by both modalities
};

/// Smooth random lesion masks painted with each modality's palette. Both
/// datasets share the mask of every index; only colours differ.
SynthResult synth_generate(const SynthConfig& cfg);

/// Symmetric-reflect padding on the bottom/right up to a multiple of `multiple`.
RgbImage pad_to_multiple(const RgbImage& image, int multiple);
BinMask pad_to_multiple(const BinMask& mask, int multiple);
ProbMask crop(const ProbMask& mask, int width, int height);

} // namespace supra::data
