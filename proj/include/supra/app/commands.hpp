#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "supra/app/config.hpp"
#include "supra/metrics.hpp"
#include "supra/nn/train.hpp"

// Subcommand implementations. Each writes its effective configuration to
// `<out>/config.json` before doing any work and returns the JSON report it
// also writes to disk.
namespace supra::app {

namespace fs = std::filesystem;

/// labels.splm, overlay.png and summary.json.
Json cmd_slic(const RunConfig& cfg, const fs::path& image, const fs::path& out);

/// Hard and soft loss breakdowns of a prediction PNG (gray value / 255 is the
/// probability) against a ground-truth mask, plus an occupancy histogram.
Json cmd_loss_eval(const RunConfig& cfg, const fs::path& image, const fs::path& gt, const fs::path& pred,
                   const fs::path& out);

/// `<out>/source`, `<out>/target` and `<out>/manifest.json`.
Json cmd_synth(const RunConfig& cfg, const fs::path& out);

/// Trains on `data.source_dir` split by `train.train_frac`. Writes
/// weights.json/weights.bin (best validation snapshot) and report.json. A
/// diverging run still writes its partial report before the error propagates.
Json cmd_train(const RunConfig& cfg, const fs::path& out, const nn::EpochCallback& on_epoch = {});

/// eval.json; with `save_predictions` also predictions/<id>.png and
/// panels/<id>.png (image, ground truth, prediction side by side).
Json cmd_eval(const RunConfig& cfg, const fs::path& weights, const fs::path& dataset_dir, double threshold,
              const fs::path& out, bool save_predictions);

/// grid.json and grid.md.
Json cmd_gridsearch(const RunConfig& cfg, const fs::path& out);

/// Training on a source dataset: seeded split, train, keep the splits.
struct SourceRun {
    data::Dataset train_split;
    data::Dataset val_split;
    nn::TrainResult result;
};
SourceRun train_on_source(const RunConfig& cfg, const data::Dataset& source, const nn::EpochCallback& on_epoch = {});

struct GridCell {
    std::string axis; ///< "lambda", "k", "m", or "cross"
    double lambda = 0;
    int k = 0;
    double m = 0;
    double sd_iou = 0, td_iou = 0, sd_dice = 0, td_dice = 0;
    std::optional<std::string> error;
    bool best = false;
};

struct GridResult {
    GridMode mode = GridMode::axis_sweep;
    std::vector<GridCell> cells;
};

/// Cells in the order they run. Best marking: highest TD IoU per axis (per
/// whole grid in full-cross mode), ties to the lower hyperparameter value.
std::vector<GridCell> plan_grid(const GridSpec& spec);
GridResult run_grid(const RunConfig& cfg, const data::Dataset& source, const data::Dataset& target);
void mark_best(GridResult& grid);
Json to_json(const GridResult& grid);
std::string to_markdown(const GridResult& grid);

} // namespace supra::app
