#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "supra/app/commands.hpp"
#include "supra/parallel.hpp"
#include "supra/simd/kernels.hpp"

namespace {

using namespace supra;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out = "out";
    std::optional<std::size_t> threads;

    std::string image, gt, pred, weights, data, source, target, loss, mode;
    std::optional<int> k, count, epochs;
    std::optional<double> m, lambda, threshold, lr;
    bool save_predictions = false;
};

app::RunConfig effective_config(const Options& o) {
    app::RunConfig cfg = o.config.empty() ? app::RunConfig{} : app::load_config(o.config);
    if (o.seed) cfg.seed = *o.seed;
    if (o.threads) cfg.threads = *o.threads;
    if (o.k) cfg.slic.k = *o.k;
    if (o.m) cfg.slic.m = *o.m;
    if (o.lambda) cfg.loss.lambda = *o.lambda;
    if (o.threshold) cfg.train.threshold = *o.threshold;
    if (o.lr) cfg.train.learning_rate = *o.lr;
    if (o.epochs) cfg.train.epochs = *o.epochs;
    if (o.count) cfg.synth.count = *o.count;
    if (!o.loss.empty()) cfg.train.loss = nn::loss_kind_from_string(o.loss);
    if (!o.mode.empty()) cfg.grid.mode = app::grid_mode_from_string(o.mode);
    if (!o.source.empty()) cfg.data.source_dir = o.source;
    if (!o.target.empty()) cfg.data.target_dir = o.target;
    cfg.validate();
    return cfg;
}

void print(const app::Json& j) {
    std::cout << j.dump(2) << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App cli{"Superpixel-consistency segmentation toolkit"};
    cli.require_subcommand(1);
    Options o;
    cli.add_option("--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
    cli.add_option("--seed", o.seed, "Seed for every random stream");
    cli.add_option("--out", o.out, "Output directory")->capture_default_str();
    cli.add_option("--threads", o.threads, "Worker threads for the inner kernels");

    auto* slic_cmd = cli.add_subcommand("slic", "Superpixels of one image: label map, overlay, summary");
    slic_cmd->add_option("--image", o.image, "Input PNG")->required();
    slic_cmd->add_option("--k", o.k, "Target superpixel count");
    slic_cmd->add_option("--m", o.m, "Compactness");

    auto* loss_cmd = cli.add_subcommand("loss-eval", "Loss breakdown of a prediction against ground truth");
    loss_cmd->add_option("--image", o.image, "Input PNG")->required();
    loss_cmd->add_option("--gt", o.gt, "Ground-truth mask PNG")->required();
    loss_cmd->add_option("--pred", o.pred, "Prediction PNG, gray value / 255 is the probability")->required();
    loss_cmd->add_option("--k", o.k, "Target superpixel count");
    loss_cmd->add_option("--m", o.m, "Compactness");
    loss_cmd->add_option("--lambda", o.lambda, "Consistency weight");
    loss_cmd->add_option("--threshold", o.threshold, "Threshold for the hard measure");

    auto* synth_cmd = cli.add_subcommand("synth", "Generate the synthetic two-modality dataset");
    synth_cmd->add_option("--count", o.count, "Images per modality");

    auto* train_cmd = cli.add_subcommand("train", "Train on a source dataset");
    train_cmd->add_option("--data", o.source, "Dataset root with images/ and masks/");
    train_cmd->add_option("--loss", o.loss, "bce or slicloss");
    train_cmd->add_option("--epochs", o.epochs, "Epoch budget");
    train_cmd->add_option("--lr", o.lr, "Learning rate");
    train_cmd->add_option("--lambda", o.lambda, "Consistency weight");
    train_cmd->add_option("--k", o.k, "Target superpixel count");
    train_cmd->add_option("--m", o.m, "Compactness");

    auto* eval_cmd = cli.add_subcommand("eval", "Evaluate saved weights on a dataset");
    eval_cmd->add_option("--weights", o.weights, "Weights manifest (JSON)")->required();
    eval_cmd->add_option("--data", o.data, "Dataset root with images/ and masks/")->required();
    eval_cmd->add_option("--threshold", o.threshold, "Probability threshold");
    eval_cmd->add_flag("--save-predictions", o.save_predictions, "Write prediction PNGs and overlay panels");

    auto* grid_cmd = cli.add_subcommand("gridsearch", "Train and score a hyperparameter grid");
    grid_cmd->add_option("--source", o.source, "Source dataset root");
    grid_cmd->add_option("--target", o.target, "Target dataset root");
    grid_cmd->add_option("--mode", o.mode, "axis-sweep or full-cross");
    grid_cmd->add_option("--epochs", o.epochs, "Epoch budget per cell");

    try {
        cli.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        cli.exit(e);
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        cli.exit(e);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        cli.exit(e);
        return kExitUsage;
    }

    try {
        const app::RunConfig cfg = effective_config(o);
        set_thread_count(cfg.threads);
        const fs::path out = o.out;
        if (*slic_cmd) {
            print(app::cmd_slic(cfg, o.image, out));
        } else if (*loss_cmd) {
            print(app::cmd_loss_eval(cfg, o.image, o.gt, o.pred, out));
        } else if (*synth_cmd) {
            const auto manifest = app::cmd_synth(cfg, out);
            std::cout << "wrote " << manifest["images"].size() << " image pairs per modality to " << out.string() << '\n';
        } else if (*train_cmd) {
            std::cerr << "simd: " << simd::to_string(simd::active().isa) << ", threads: " << cfg.threads << '\n';
            const auto report = app::cmd_train(cfg, out, [](int epoch, const nn::EpochStats& s) {
                std::fprintf(stderr, "epoch %3d  train_loss %.5f  val_loss %.5f  val_iou %.4f  val_dice %.4f\n", epoch,
                             s.train_loss, s.val_loss, s.val_iou, s.val_dice);
            });
            std::cout << "best epoch " << report["best_epoch"] << ", weights in " << (out / "weights.json").string() << '\n';
        } else if (*eval_cmd) {
            const auto j = app::cmd_eval(cfg, o.weights, o.data, cfg.train.threshold, out, o.save_predictions);
            std::cout << "n " << j["n"] << "  mean_iou " << j["mean_iou"] << "  mean_dice " << j["mean_dice"] << '\n';
        } else if (*grid_cmd) {
            app::cmd_gridsearch(cfg, out);
            std::ifstream md(out / "grid.md");
            std::cout << md.rdbuf();
        }
    } catch (const ParamError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}
