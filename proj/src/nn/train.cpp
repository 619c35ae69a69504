#include "supra/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "supra/metrics.hpp"
#include "supra/nn/optim.hpp"

namespace supra::nn {

namespace {

struct Prepared {
    RgbImage image;
    BinMask mask;
    std::string id;
    int width, height; // before padding
};

std::vector<Prepared> prepare(const data::Dataset& ds, int multiple) {
    std::vector<Prepared> out;
    out.reserve(ds.size());
    for (const auto& it : ds.items)
        out.push_back({data::pad_to_multiple(it.image, multiple), data::pad_to_multiple(it.mask, multiple), it.id,
                       it.image.width(), it.image.height()});
    return out;
}

BinMask crop_mask(const BinMask& m, int w, int h) {
    if (m.width() == w && m.height() == h) return m;
    BinMask out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) out(x, y) = m(x, y);
    return out;
}

slic::SuperpixelLabelMap superpixels(const RgbImage& image, const TrainConfig& cfg) {
    return slic::segment(rgb_to_lab(image), cfg.slic_params, cfg.seed);
}

} // namespace

std::string to_string(LossKind k) {
    return k == LossKind::bce ? "bce" : "slicloss";
}

LossKind loss_kind_from_string(const std::string& s) {
    if (s == "bce") return LossKind::bce;
    if (s == "slicloss") return LossKind::slicloss;
    throw ParamError("unknown loss '" + s + "' (expected bce or slicloss)");
}

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ParamError("train: learning_rate must be >= 0");
    if (epochs < 1) throw ParamError("train: epochs must be >= 1");
    if (!(threshold > 0.0 && threshold < 1.0)) throw ParamError("train: threshold must lie in (0,1)");
    loss_config.validate();
    augment.validate();
}

TrainResult train(const data::Dataset& train_set, const data::Dataset& val_set, const ModelConfig& model_cfg,
                  const TrainConfig& cfg, const EpochCallback& on_epoch) {
    if (train_set.empty()) throw ParamError("train: training split is empty");
    if (val_set.empty()) throw ParamError("train: validation split is empty");
    model_cfg.validate();
    cfg.validate();
    train_set.validate();
    val_set.validate();

    const bool compound = cfg.loss == LossKind::slicloss;
    const auto train_items = prepare(train_set, model_cfg.size_multiple());
    const auto val_items = prepare(val_set, model_cfg.size_multiple());
    if (compound) {
        for (const auto* items : {&train_items, &val_items})
            for (const auto& it : *items) cfg.slic_params.validate(it.image.size());
    }

    std::vector<slic::SuperpixelLabelMap> val_labels;
    if (compound)
        for (const auto& it : val_items) val_labels.push_back(superpixels(it.image, cfg));

    SegNet net(model_cfg);
    ParamSet params = init_params(model_cfg, cfg.seed);
    Rng rng(cfg.seed ^ 0x74726169'6e696e67ull);

    TrainResult result;
    result.report.loss = cfg.loss;
    result.report.lambda = compound ? cfg.loss_config.lambda : 0.0;
    result.report.tau = cfg.loss_config.tau;
    result.best = params;
    double best_dice = -1.0;

    std::vector<std::size_t> order(train_items.size());
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng);

        EpochStats stats;
        double consistency_sum = 0.0;
        for (std::size_t idx : order) {
            const auto& item = train_items[idx];
            auto [image, mask] = augment(item.image, item.mask, cfg.augment, rng);
            const ProbMask probs = net.forward(params, image_to_tensor(image));

            double total = 0.0, bce_value = 0.0;
            std::vector<double> grad;
            if (compound) {
                auto r = loss::slic_loss(probs, mask, superpixels(image, cfg), cfg.loss_config);
                total = r.breakdown.total;
                bce_value = r.breakdown.bce;
                consistency_sum += r.breakdown.consistency;
                grad = std::move(r.grad);
            } else {
                auto r = loss::bce(probs, mask);
                total = bce_value = r.value;
                grad = std::move(r.grad);
            }
            if (!std::isfinite(total))
                throw TrainingAborted("training aborted: non-finite loss at epoch " + std::to_string(epoch) +
                                          ", image " + item.id,
                                      result.report);

            const GradientSet grads = net.backward(params, grad);
            adam_step(params, grads, cfg.learning_rate);
            stats.train_loss += total;
            stats.train_bce += bce_value;
        }
        const double n_train = static_cast<double>(train_items.size());
        stats.train_loss /= n_train;
        stats.train_bce /= n_train;
        if (compound) stats.train_consistency = consistency_sum / n_train;

        std::vector<metrics::ImageScore> scores;
        for (std::size_t i = 0; i < val_items.size(); ++i) {
            const auto& item = val_items[i];
            const ProbMask probs = net.forward(params, image_to_tensor(item.image));
            net.clear_cache();
            const double loss_value = compound
                                          ? loss::slic_loss(probs, item.mask, val_labels[i], cfg.loss_config).breakdown.total
                                          : loss::bce(probs, item.mask).value;
            if (!std::isfinite(loss_value))
                throw TrainingAborted("training aborted: non-finite validation loss at epoch " + std::to_string(epoch) +
                                          ", image " + item.id,
                                      result.report);
            stats.val_loss += loss_value;
            const BinMask pred = threshold(data::crop(probs, item.width, item.height), cfg.threshold);
            const BinMask gt = crop_mask(item.mask, item.width, item.height);
            scores.push_back({item.id, metrics::iou(pred, gt), metrics::dice(pred, gt)});
        }
        const auto eval = metrics::aggregate(std::move(scores));
        stats.val_loss /= static_cast<double>(val_items.size());
        stats.val_iou = eval.mean_iou;
        stats.val_dice = eval.mean_dice;

        result.report.epochs.push_back(stats);
        if (stats.val_dice > best_dice) {
            best_dice = stats.val_dice;
            result.report.best_epoch = epoch;
            result.best = params;
        }
        if (on_epoch) on_epoch(epoch, stats);
    }
    result.last = std::move(params);
    return result;
}

} // namespace supra::nn
