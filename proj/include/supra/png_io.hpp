#pragma once

#include <filesystem>

#include "supra/image.hpp"

namespace supra {

/// Decodes an 8-bit RGB or 8-bit grayscale PNG. Grayscale is replicated to
/// all three channels. Palette, alpha and non-8-bit files raise FormatError;
/// missing, truncated or corrupt files raise IoError.
RgbImage load_png(const std::filesystem::path& path);

/// Loads a ground-truth mask: any PNG accepted by load_png, foreground where
/// the first channel is >= 128.
BinMask load_mask_png(const std::filesystem::path& path);

void save_png(const RgbImage& image, const std::filesystem::path& path);
/// Writes {0,255} grayscale.
void save_png(const BinMask& mask, const std::filesystem::path& path);
/// Writes round(p*255) grayscale, half rounded up.
void save_png(const ProbMask& mask, const std::filesystem::path& path);

} // namespace supra
