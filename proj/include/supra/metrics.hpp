#pragma once

#include <string>
#include <vector>

#include "supra/data.hpp"
#include "supra/image.hpp"
#include "supra/nn/model.hpp"

namespace supra::metrics {

/// |pred & gt| / |pred | gt|; 1 when both are empty.
double iou(const BinMask& pred, const BinMask& gt);
/// 2 |pred & gt| / (|pred| + |gt|); 1 when both are empty.
double dice(const BinMask& pred, const BinMask& gt);

struct ImageScore {
    std::string id;
    double iou = 0;
    double dice = 0;
};

struct EvalResult {
    std::vector<ImageScore> per_image;
    double mean_iou = 0;
    double mean_dice = 0;
    std::size_t n = 0;
};

/// Means over per-image scores, in the given order.
EvalResult aggregate(std::vector<ImageScore> scores);

/// Forward pass with reflect padding to the model's size multiple, cropped
/// back to the image size.
ProbMask predict(nn::SegNet& net, const nn::ParamSet& params, const RgbImage& image);

EvalResult evaluate(const nn::ParamSet& params, const nn::ModelConfig& cfg, const data::Dataset& dataset,
                    double threshold = 0.5);

} // namespace supra::metrics
