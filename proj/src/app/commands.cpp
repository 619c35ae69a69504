#include "supra/app/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "supra/app/reports.hpp"
#include "supra/nn/weights.hpp"
#include "supra/png_io.hpp"

namespace supra::app {

namespace {

data::Dataset load_required(const std::string& dir, const char* what, data::Modality modality) {
    if (dir.empty()) throw ParamError(std::string("data.") + what + " is not set");
    return data::load_dataset(fs::path(dir), modality);
}

ProbMask load_prob_png(const fs::path& path) {
    const RgbImage rgb = load_png(path);
    ProbMask p(rgb.width(), rgb.height());
    for (std::size_t i = 0; i < rgb.size(); ++i) p[i] = rgb[i].r / 255.0;
    return p;
}

RgbImage tint(const RgbImage& image, const BinMask& mask, Rgb colour) {
    RgbImage out = image;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!mask[i]) continue;
        auto mix = [](std::uint8_t a, std::uint8_t b) { return static_cast<std::uint8_t>((a + b + 1) / 2); };
        out[i] = {mix(out[i].r, colour.r), mix(out[i].g, colour.g), mix(out[i].b, colour.b)};
    }
    return out;
}

RgbImage side_by_side(const std::vector<RgbImage>& panels) {
    const int w = panels.front().width(), h = panels.front().height();
    RgbImage out(w * static_cast<int>(panels.size()), h);
    for (std::size_t p = 0; p < panels.size(); ++p)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) out(static_cast<int>(p) * w + x, y) = panels[p](x, y);
    return out;
}

std::string format_metric(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::string format_value(const GridCell& c) {
    std::ostringstream s;
    if (c.axis == "lambda") {
        s << std::llround(c.lambda * 100) << "%";
    } else if (c.axis == "k") {
        s << c.k;
    } else if (c.axis == "m") {
        s << c.m;
    } else {
        s << "lambda " << std::llround(c.lambda * 100) << "%, k " << c.k << ", m " << c.m;
    }
    return s.str();
}

} // namespace

Json cmd_slic(const RunConfig& cfg, const fs::path& image_path, const fs::path& out) {
    echo_config(cfg, out);
    const RgbImage image = load_png(image_path);
    slic::SegmentTrace trace;
    const auto labels = slic::segment(rgb_to_lab(image), cfg.slic, cfg.seed, &trace);
    slic::save_label_map(labels, out / "labels.splm");
    save_png(slic::boundary_overlay(labels, image), out / "overlay.png");
    Json summary = {{"image", image_path.filename().string()},
                    {"width", image.width()},
                    {"height", image.height()},
                    {"k", cfg.slic.k},
                    {"m", cfg.slic.m},
                    {"num_segments", labels.num_segments()},
                    {"spacing", trace.spacing},
                    {"mean_segment_area", static_cast<double>(labels.size()) / labels.num_segments()}};
    write_json(summary, out / "summary.json");
    return summary;
}

Json cmd_loss_eval(const RunConfig& cfg, const fs::path& image_path, const fs::path& gt_path, const fs::path& pred_path,
                   const fs::path& out) {
    echo_config(cfg, out);
    const RgbImage image = load_png(image_path);
    const BinMask gt = load_mask_png(gt_path);
    const ProbMask pred = load_prob_png(pred_path);
    require_same_shape(image, gt, "loss-eval image/ground truth");
    require_same_shape(image, pred, "loss-eval image/prediction");

    const auto labels = slic::segment(rgb_to_lab(image), cfg.slic, cfg.seed);
    const auto soft = loss::slic_loss(pred, gt, labels, cfg.loss);
    const auto hard = loss::hard_slic_loss(pred, gt, labels, cfg.loss, cfg.train.threshold);
    const auto occupancy = loss::hard_consistency(labels, threshold(pred, cfg.train.threshold), cfg.loss.tau);

    constexpr int kBins = 10;
    Json edges = Json::array(), counts = Json::array();
    std::vector<std::size_t> hist(kBins, 0);
    for (double o : occupancy.per_segment_occupancy)
        ++hist[static_cast<std::size_t>(std::clamp(static_cast<int>((o - 0.5) / 0.05), 0, kBins - 1))];
    for (int b = 0; b <= kBins; ++b) edges.push_back(0.5 + 0.05 * b);
    for (auto c : hist) counts.push_back(c);

    Json hard_json = to_json(hard, cfg.loss.tau);
    hard_json["threshold"] = cfg.train.threshold;
    hard_json["consistent_fraction"] = occupancy.consistent_fraction;
    Json report = {{"num_segments", labels.num_segments()},
                   {"spacing", slic::grid_spacing(labels.size(), cfg.slic.k)},
                   {"hard", std::move(hard_json)},
                   {"soft", to_json(soft.breakdown, cfg.loss.tau)},
                   {"occupancy_histogram", {{"edges", std::move(edges)}, {"counts", std::move(counts)}}}};
    write_json(report, out / "loss.json");
    return report;
}

Json cmd_synth(const RunConfig& cfg, const fs::path& out) {
    echo_config(cfg, out);
    const data::SynthConfig sc = cfg.synth_config();
    const auto result = data::synth_generate(sc);
    data::save_dataset(result.source, out / "source");
    data::save_dataset(result.target, out / "target");
    Json fractions = Json::array();
    for (std::size_t i = 0; i < result.source.size(); ++i)
        fractions.push_back({{"id", result.source.items[i].id}, {"foreground_fraction", result.foreground_fraction[i]}});
    Json manifest = {{"seed", sc.seed}, {"synth", to_json(cfg)["synth"]}, {"images", std::move(fractions)}};
    write_json(manifest, out / "manifest.json");
    return manifest;
}

SourceRun train_on_source(const RunConfig& cfg, const data::Dataset& source, const nn::EpochCallback& on_epoch) {
    auto [train_split, val_split] = data::split(source, cfg.train.train_frac, cfg.seed);
    nn::TrainResult result = nn::train(train_split, val_split, cfg.model, cfg.train_config(), on_epoch);
    return {std::move(train_split), std::move(val_split), std::move(result)};
}

Json cmd_train(const RunConfig& cfg, const fs::path& out, const nn::EpochCallback& on_epoch) {
    echo_config(cfg, out);
    const data::Dataset source = load_required(cfg.data.source_dir, "source_dir", data::Modality::source);
    try {
        const SourceRun run = train_on_source(cfg, source, on_epoch);
        nn::save_weights(run.result.best, cfg.model, cfg.seed, out / "weights.json");
        const Json report = to_json(run.result.report);
        write_json(report, out / "report.json");
        return report;
    } catch (const nn::TrainingAborted& e) {
        Json partial = to_json(e.partial());
        partial["aborted"] = e.what();
        write_json(partial, out / "report.json");
        throw;
    }
}

Json cmd_eval(const RunConfig& cfg, const fs::path& weights, const fs::path& dataset_dir, double thr,
              const fs::path& out, bool save_predictions) {
    echo_config(cfg, out);
    const nn::LoadedWeights loaded = nn::load_weights(weights);
    if (loaded.model.depth != cfg.model.depth || loaded.model.base_channels != cfg.model.base_channels)
        throw ParamError("eval: weights were trained with depth " + std::to_string(loaded.model.depth) +
                         ", base_channels " + std::to_string(loaded.model.base_channels) + " but the config asks for depth " +
                         std::to_string(cfg.model.depth) + ", base_channels " + std::to_string(cfg.model.base_channels));
    if (fs::is_directory(dataset_dir) && fs::is_empty(dataset_dir))
        throw ParamError("eval: dataset directory " + dataset_dir.string() + " is empty");
    const data::Dataset ds = data::load_dataset(dataset_dir, data::Modality::target);
    if (ds.empty()) throw ParamError("eval: dataset " + dataset_dir.string() + " has no images");
    const metrics::EvalResult result = metrics::evaluate(loaded.params, loaded.model, ds, thr);
    if (save_predictions) {
        nn::SegNet net(loaded.model);
        for (const auto& it : ds.items) {
            const ProbMask probs = metrics::predict(net, loaded.params, it.image);
            save_png(probs, out / "predictions" / (it.id + ".png"));
            const BinMask pred = threshold(probs, thr);
            save_png(side_by_side({it.image, tint(it.image, it.mask, {0, 255, 0}), tint(it.image, pred, {255, 0, 255})}),
                     out / "panels" / (it.id + ".png"));
        }
    }
    const Json j = to_json(result);
    write_json(j, out / "eval.json");
    return j;
}

std::vector<GridCell> plan_grid(const GridSpec& spec) {
    spec.validate();
    std::vector<GridCell> cells;
    auto cell = [](const char* axis, double lambda, int k, double m) {
        GridCell c;
        c.axis = axis;
        c.lambda = lambda;
        c.k = k;
        c.m = m;
        return c;
    };
    if (spec.mode == GridMode::axis_sweep) {
        for (double l : spec.lambda_values) cells.push_back(cell("lambda", l, spec.base_k, spec.base_m));
        for (int k : spec.k_values) cells.push_back(cell("k", spec.base_lambda, k, spec.base_m));
        for (double m : spec.m_values) cells.push_back(cell("m", spec.base_lambda, spec.base_k, m));
    } else {
        for (double l : spec.lambda_values)
            for (int k : spec.k_values)
                for (double m : spec.m_values) cells.push_back(cell("cross", l, k, m));
    }
    return cells;
}

void mark_best(GridResult& grid) {
    auto value = [](const GridCell& c) {
        return c.axis == "lambda" ? c.lambda : c.axis == "k" ? static_cast<double>(c.k) : c.m;
    };
    auto better = [&](const GridCell& a, const GridCell& b) { // a beats b
        if (a.td_iou != b.td_iou) return a.td_iou > b.td_iou;
        if (a.axis == "cross") return std::tie(a.lambda, a.k, a.m) < std::tie(b.lambda, b.k, b.m);
        return value(a) < value(b);
    };
    for (auto& c : grid.cells) c.best = false;
    for (const char* axis : {"lambda", "k", "m", "cross"}) {
        GridCell* best = nullptr;
        for (auto& c : grid.cells)
            if (c.axis == axis && !c.error && (!best || better(c, *best))) best = &c;
        if (best) best->best = true;
    }
}

GridResult run_grid(const RunConfig& cfg, const data::Dataset& source, const data::Dataset& target) {
    if (target.empty()) throw ParamError("gridsearch: target dataset is empty");
    GridResult grid;
    grid.mode = cfg.grid.mode;
    grid.cells = plan_grid(cfg.grid);
    for (auto& cell : grid.cells) {
        try {
            RunConfig c = cfg;
            c.train.loss = nn::LossKind::slicloss;
            c.loss.lambda = cell.lambda;
            c.slic.k = cell.k;
            c.slic.m = cell.m;
            const SourceRun run = train_on_source(c, source);
            const auto sd = metrics::evaluate(run.result.best, c.model, run.val_split, c.train.threshold);
            const auto td = metrics::evaluate(run.result.best, c.model, target, c.train.threshold);
            cell.sd_iou = sd.mean_iou;
            cell.sd_dice = sd.mean_dice;
            cell.td_iou = td.mean_iou;
            cell.td_dice = td.mean_dice;
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
    }
    mark_best(grid);
    return grid;
}

Json to_json(const GridResult& grid) {
    Json cells = Json::array();
    for (const auto& c : grid.cells) {
        Json j = {{"axis", c.axis}, {"lambda", c.lambda}, {"k", c.k}, {"m", c.m}};
        if (c.error) {
            j["sd_iou"] = j["td_iou"] = j["sd_dice"] = j["td_dice"] = nullptr;
            j["error"] = *c.error;
        } else {
            j["sd_iou"] = c.sd_iou;
            j["td_iou"] = c.td_iou;
            j["sd_dice"] = c.sd_dice;
            j["td_dice"] = c.td_dice;
            j["error"] = nullptr;
        }
        j["best"] = c.best;
        cells.push_back(std::move(j));
    }
    return {{"mode", to_string(grid.mode)}, {"selection", "td_iou"}, {"runs", grid.cells.size()}, {"cells", std::move(cells)}};
}

std::string to_markdown(const GridResult& grid) {
    std::ostringstream md;
    md << "| Hyperparameter | Value | SD IoU | TD IoU | SD Dice | TD Dice |\n";
    md << "|---|---|---|---|---|---|\n";
    for (const auto& c : grid.cells) {
        const char* name = c.axis == "lambda" ? "Weight" : c.axis == "k" ? "Superpixels" : c.axis == "m" ? "Consistency" : "Cell";
        md << "| " << name << " | " << format_value(c) << (c.best ? "*" : "") << " | ";
        if (c.error) {
            md << "failed: " << *c.error << " | | | |\n";
            continue;
        }
        md << format_metric(c.sd_iou) << " | " << format_metric(c.td_iou) << " | " << format_metric(c.sd_dice) << " | "
           << format_metric(c.td_dice) << " |\n";
    }
    md << "\n* best by TD IoU" << (grid.mode == GridMode::axis_sweep ? " within each block" : "") << ".\n";
    return md.str();
}

Json cmd_gridsearch(const RunConfig& cfg, const fs::path& out) {
    echo_config(cfg, out);
    const data::Dataset source = load_required(cfg.data.source_dir, "source_dir", data::Modality::source);
    const data::Dataset target = load_required(cfg.data.target_dir, "target_dir", data::Modality::target);
    const GridResult grid = run_grid(cfg, source, target);
    const Json j = to_json(grid);
    write_json(j, out / "grid.json");
    std::ofstream md(out / "grid.md");
    md << to_markdown(grid);
    if (!md) throw IoError("cannot write " + (out / "grid.md").string());
    return j;
}

} // namespace supra::app
