#pragma once

#include "supra/app/config.hpp"
#include "supra/metrics.hpp"
#include "supra/nn/train.hpp"
#include "supra/slicloss.hpp"

namespace supra::app {

/// Keys bce, consistency, total, lambda, tau.
Json to_json(const loss::LossBreakdown& b, double tau);

/// Per-epoch arrays train_loss, val_loss, val_iou, val_dice, best_epoch, and a
/// per-epoch breakdown of the training loss (consistency null for BCE runs).
Json to_json(const nn::TrainReport& report);

/// Exactly per_image, mean_iou, mean_dice, n.
Json to_json(const metrics::EvalResult& result);

} // namespace supra::app
