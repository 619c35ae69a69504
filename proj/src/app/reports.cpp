#include "supra/app/reports.hpp"

namespace supra::app {

Json to_json(const loss::LossBreakdown& b, double tau) {
    return {{"bce", b.bce}, {"consistency", b.consistency}, {"total", b.total}, {"lambda", b.lambda}, {"tau", tau}};
}

Json to_json(const nn::TrainReport& report) {
    Json j;
    j["loss"] = nn::to_string(report.loss);
    j["lambda"] = report.lambda;
    j["tau"] = report.tau;
    j["epochs"] = report.epochs.size();
    Json train_loss = Json::array(), val_loss = Json::array(), val_iou = Json::array(), val_dice = Json::array();
    Json per_epoch = Json::array();
    for (std::size_t e = 0; e < report.epochs.size(); ++e) {
        const auto& s = report.epochs[e];
        train_loss.push_back(s.train_loss);
        val_loss.push_back(s.val_loss);
        val_iou.push_back(s.val_iou);
        val_dice.push_back(s.val_dice);
        per_epoch.push_back({{"epoch", e + 1},
                             {"bce", s.train_bce},
                             {"consistency", s.train_consistency ? Json(*s.train_consistency) : Json(nullptr)},
                             {"total", s.train_loss},
                             {"lambda", report.lambda},
                             {"tau", report.tau}});
    }
    j["train_loss"] = std::move(train_loss);
    j["val_loss"] = std::move(val_loss);
    j["val_iou"] = std::move(val_iou);
    j["val_dice"] = std::move(val_dice);
    j["best_epoch"] = report.best_epoch;
    j["breakdown"] = std::move(per_epoch);
    return j;
}

Json to_json(const metrics::EvalResult& result) {
    Json rows = Json::array();
    for (const auto& s : result.per_image) rows.push_back({{"id", s.id}, {"iou", s.iou}, {"dice", s.dice}});
    return {{"per_image", std::move(rows)}, {"mean_iou", result.mean_iou}, {"mean_dice", result.mean_dice}, {"n", result.n}};
}

} // namespace supra::app
