#pragma once

#include <cstdint>
#include <filesystem>

#include "supra/nn/model.hpp"

namespace supra::nn {

struct LoadedWeights {
    ParamSet params;
    ModelConfig model;
    std::uint64_t seed = 0;
};

/// Writes `manifest` (JSON: names, shapes, dtype, seed, model config, blob
/// file name) and the float32 little-endian blob next to it, tensors
/// concatenated in manifest order. Adam moments are not stored.
void save_weights(const ParamSet& params, const ModelConfig& model, std::uint64_t seed,
                  const std::filesystem::path& manifest);

/// Throws FormatError when the manifest does not describe the model layout
/// or the blob size disagrees with it.
LoadedWeights load_weights(const std::filesystem::path& manifest);

} // namespace supra::nn
