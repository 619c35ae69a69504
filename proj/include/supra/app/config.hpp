#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "supra/data.hpp"
#include "supra/nn/augment.hpp"
#include "supra/nn/model.hpp"
#include "supra/nn/train.hpp"
#include "supra/slic.hpp"
#include "supra/slicloss.hpp"

namespace supra::app {

using Json = nlohmann::ordered_json;

enum class GridMode { axis_sweep, full_cross };

std::string to_string(GridMode mode);
GridMode grid_mode_from_string(const std::string& s);

/// Hyperparameter grid. In axis-sweep mode one axis varies at a time while the
/// others stay at `base_*`.
struct GridSpec {
    GridMode mode = GridMode::axis_sweep;
    std::vector<double> lambda_values{0.50, 0.75, 1.00};
    std::vector<int> k_values{50, 150, 500, 1000};
    std::vector<double> m_values{20, 30, 50};
    double base_lambda = 0.25;
    int base_k = 100;
    double base_m = 40;

    void validate() const;
};

struct TrainSection {
    nn::LossKind loss = nn::LossKind::slicloss;
    double learning_rate = 1e-4;
    int epochs = 15;
    double threshold = 0.5;
    /// Fraction of the source set used for training; the rest is validation.
    double train_frac = 0.75;
    nn::AugConfig augment{};
};

struct DataSection {
    std::string source_dir;
    std::string target_dir;
};

/// Everything a command needs. All randomness derives from `seed`.
struct RunConfig {
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    slic::SlicParams slic{};
    loss::LossConfig loss{};
    nn::ModelConfig model{};
    TrainSection train{};
    data::SynthConfig synth{};
    GridSpec grid{};
    DataSection data{};

    void validate() const;
    nn::TrainConfig train_config() const;
    data::SynthConfig synth_config() const;
};

/// Strict: unknown keys and wrongly typed values raise ParamError. Missing
/// keys keep their defaults.
RunConfig config_from_json(const Json& j);
RunConfig load_config(const std::filesystem::path& path);
/// Every field, defaults included.
Json to_json(const RunConfig& cfg);

/// Writes `<dir>/config.json` with the effective configuration.
void echo_config(const RunConfig& cfg, const std::filesystem::path& dir);

void write_json(const Json& j, const std::filesystem::path& path);

} // namespace supra::app
