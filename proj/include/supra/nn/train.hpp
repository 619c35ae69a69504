#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "supra/data.hpp"
#include "supra/nn/augment.hpp"
#include "supra/nn/model.hpp"
#include "supra/slic.hpp"
#include "supra/slicloss.hpp"

namespace supra::nn {

enum class LossKind { bce, slicloss };

std::string to_string(LossKind k);
LossKind loss_kind_from_string(const std::string& s);

struct TrainConfig {
    double learning_rate = 1e-4;
    int epochs = 15;
    LossKind loss = LossKind::bce;
    loss::LossConfig loss_config{};
    slic::SlicParams slic_params{};
    std::uint64_t seed = 0;
    AugConfig augment{};
    /// Probability threshold for validation IoU/Dice.
    double threshold = 0.5;

    void validate() const;
};

struct EpochStats {
    double train_loss = 0;
    double train_bce = 0;
    /// Mean soft consistency penalty; absent for BCE-only training.
    std::optional<double> train_consistency;
    double val_loss = 0;
    double val_iou = 0;
    double val_dice = 0;
};

struct TrainReport {
    LossKind loss = LossKind::bce;
    double lambda = 0;
    double tau = 0;
    std::vector<EpochStats> epochs;
    /// 1-based epoch with the highest validation Dice (earliest on ties); 0 before any epoch completes.
    int best_epoch = 0;
};

struct TrainResult {
    ParamSet best;  ///< snapshot at best_epoch
    ParamSet last;  ///< parameters after the final epoch
    TrainReport report;
};

/// Non-finite loss. Carries the epochs completed so far.
class TrainingAborted : public Error {
public:
    TrainingAborted(const std::string& what, TrainReport partial) : Error(what), partial_(std::move(partial)) {}
    const TrainReport& partial() const noexcept { return partial_; }

private:
    TrainReport partial_;
};

/// Called after every epoch with the (1-based) epoch number and its stats.
using EpochCallback = std::function<void(int, const EpochStats&)>;

/// Batch-size-1 Adam training. Each step augments the image, recomputes
/// superpixels on the augmented frame when the compound loss is active, and
/// backpropagates. Validation runs on un-augmented frames after every epoch.
TrainResult train(const data::Dataset& train_set, const data::Dataset& val_set, const ModelConfig& model_cfg,
                  const TrainConfig& train_cfg, const EpochCallback& on_epoch = {});

} // namespace supra::nn
