#include "supra/metrics.hpp"

namespace supra::metrics {

namespace {

struct Counts {
    std::size_t inter = 0, pred = 0, gt = 0;
};

Counts count(const BinMask& pred, const BinMask& gt, const char* what) {
    require_same_shape(pred, gt, what);
    Counts c;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const bool p = pred[i] != 0, g = gt[i] != 0;
        c.inter += p && g;
        c.pred += p;
        c.gt += g;
    }
    return c;
}

} // namespace

double iou(const BinMask& pred, const BinMask& gt) {
    const Counts c = count(pred, gt, "iou");
    const std::size_t uni = c.pred + c.gt - c.inter;
    return uni == 0 ? 1.0 : static_cast<double>(c.inter) / static_cast<double>(uni);
}

double dice(const BinMask& pred, const BinMask& gt) {
    const Counts c = count(pred, gt, "dice");
    const std::size_t denom = c.pred + c.gt;
    return denom == 0 ? 1.0 : 2.0 * static_cast<double>(c.inter) / static_cast<double>(denom);
}

EvalResult aggregate(std::vector<ImageScore> scores) {
    EvalResult r;
    r.n = scores.size();
    for (const auto& s : scores) {
        r.mean_iou += s.iou;
        r.mean_dice += s.dice;
    }
    if (r.n) {
        r.mean_iou /= static_cast<double>(r.n);
        r.mean_dice /= static_cast<double>(r.n);
    }
    r.per_image = std::move(scores);
    return r;
}

ProbMask predict(nn::SegNet& net, const nn::ParamSet& params, const RgbImage& image) {
    const RgbImage padded = data::pad_to_multiple(image, net.config().size_multiple());
    const ProbMask probs = net.forward(params, nn::image_to_tensor(padded));
    net.clear_cache();
    return data::crop(probs, image.width(), image.height());
}

EvalResult evaluate(const nn::ParamSet& params, const nn::ModelConfig& cfg, const data::Dataset& dataset,
                    double threshold) {
    if (dataset.empty()) throw ParamError("evaluate: dataset is empty");
    nn::SegNet net(cfg);
    std::vector<ImageScore> scores;
    scores.reserve(dataset.size());
    for (const auto& it : dataset.items) {
        const BinMask pred = supra::threshold(predict(net, params, it.image), threshold);
        scores.push_back({it.id, iou(pred, it.mask), dice(pred, it.mask)});
    }
    return aggregate(std::move(scores));
}

} // namespace supra::metrics
