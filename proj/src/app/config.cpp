#include "supra/app/config.hpp"

#include <fstream>
#include <set>

#include "supra/fs.hpp"

namespace supra::app {

namespace fs = std::filesystem;

namespace {

/// Reads the keys of one JSON object, remembering which were consumed so the
/// leftovers can be reported as unknown.
class Section {
public:
    Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ParamError("config: " + where() + " must be an object");
    }

    template <class T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        const auto it = j_.find(key);
        if (it == j_.end()) return;
        try {
            if constexpr (std::is_same_v<T, bool>) {
                if (!it->is_boolean()) throw ParamError("");
            } else if constexpr (std::is_arithmetic_v<T>) {
                if (!it->is_number()) throw ParamError("");
                if constexpr (std::is_integral_v<T>)
                    if (!it->is_number_integer()) throw ParamError("");
                if constexpr (std::is_unsigned_v<T>)
                    if (it->is_number_integer() && !it->is_number_unsigned()) throw ParamError("");
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!it->is_string()) throw ParamError("");
            }
            out = it->template get<T>();
        } catch (const std::exception&) {
            throw ParamError("config: " + where(key) + " has the wrong type (" + std::string(it->type_name()) + ")");
        }
    }

    Section child(const char* key) {
        seen_.insert(key);
        const auto it = j_.find(key);
        static const Json empty = Json::object();
        return Section(it == j_.end() ? empty : *it, path_.empty() ? key : path_ + "." + key);
    }

    bool has(const char* key) const { return j_.contains(key); }
    const Json& raw(const char* key) {
        seen_.insert(key);
        return j_.at(key);
    }
    std::string where(const char* key = nullptr) const {
        std::string p = path_.empty() ? "top level" : "'" + path_ + "'";
        if (key) p = "'" + (path_.empty() ? std::string(key) : path_ + "." + key) + "'";
        return p;
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key()))
                throw ParamError("config: unknown key '" + (path_.empty() ? it.key() : path_ + "." + it.key()) + "'");
    }

private:
    const Json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

Lab lab_from(Section& s, const char* key, Lab value) {
    if (!s.has(key)) return value;
    const Json& v = s.raw(key);
    if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() || !v[2].is_number())
        throw ParamError("config: " + s.where(key) + " must be an array of three numbers");
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

void read_palette(Section s, data::Palette& p) {
    p.lesion = lab_from(s, "lesion", p.lesion);
    p.background = lab_from(s, "background", p.background);
    s.get("jitter", p.jitter);
    s.finish();
}

Json palette_json(const data::Palette& p) {
    Json j;
    j["lesion"] = {p.lesion.l, p.lesion.a, p.lesion.b};
    j["background"] = {p.background.l, p.background.a, p.background.b};
    j["jitter"] = p.jitter;
    return j;
}

template <class T>
std::vector<T> list_from(Section& s, const char* key, std::vector<T> value) {
    if (!s.has(key)) return value;
    const Json& v = s.raw(key);
    if (!v.is_array()) throw ParamError("config: " + s.where(key) + " must be an array");
    std::vector<T> out;
    for (const auto& e : v) {
        if (!e.is_number() || (std::is_integral_v<T> && !e.is_number_integer()))
            throw ParamError("config: " + s.where(key) + " has a non-numeric entry");
        out.push_back(e.get<T>());
    }
    return out;
}

} // namespace

std::string to_string(GridMode mode) {
    return mode == GridMode::axis_sweep ? "axis-sweep" : "full-cross";
}

GridMode grid_mode_from_string(const std::string& s) {
    if (s == "axis-sweep") return GridMode::axis_sweep;
    if (s == "full-cross") return GridMode::full_cross;
    throw ParamError("grid: unknown mode '" + s + "' (expected axis-sweep or full-cross)");
}

void GridSpec::validate() const {
    if (lambda_values.empty() || k_values.empty() || m_values.empty()) throw ParamError("grid: value lists must be non-empty");
    for (double l : lambda_values)
        if (!(l >= 0.0)) throw ParamError("grid: lambda values must be >= 0");
    for (double m : m_values)
        if (!(m > 0.0)) throw ParamError("grid: m values must be > 0");
    for (int k : k_values)
        if (k < 4) throw ParamError("grid: k values must be >= 4");
}

void RunConfig::validate() const {
    if (threads < 1 || threads > 256) throw ParamError("config: threads must lie in [1,256]");
    if (slic.k < 4) throw ParamError("slic: k must be >= 4");
    if (!(slic.m > 0.0)) throw ParamError("slic: m must be > 0");
    if (slic.iterations < 1) throw ParamError("slic: iterations must be >= 1");
    if (!(slic.connectivity_min_frac > 0.0 && slic.connectivity_min_frac < 1.0))
        throw ParamError("slic: connectivity_min_frac must lie in (0,1)");
    loss.validate();
    model.validate();
    train_config().validate();
    if (!(train.train_frac > 0.0 && train.train_frac < 1.0)) throw ParamError("train: train_frac must lie in (0,1)");
    synth_config().validate();
    grid.validate();
}

nn::TrainConfig RunConfig::train_config() const {
    nn::TrainConfig t;
    t.learning_rate = train.learning_rate;
    t.epochs = train.epochs;
    t.loss = train.loss;
    t.loss_config = loss;
    t.slic_params = slic;
    t.seed = seed;
    t.augment = train.augment;
    t.threshold = train.threshold;
    return t;
}

data::SynthConfig RunConfig::synth_config() const {
    data::SynthConfig s = synth;
    s.seed = seed;
    return s;
}

RunConfig config_from_json(const Json& j) {
    RunConfig c;
    Section top(j, "");
    top.get("seed", c.seed);
    top.get("threads", c.threads);
    {
        Section s = top.child("slic");
        s.get("k", c.slic.k);
        s.get("m", c.slic.m);
        s.get("iterations", c.slic.iterations);
        s.get("connectivity_min_frac", c.slic.connectivity_min_frac);
        s.finish();
    }
    {
        Section s = top.child("loss");
        s.get("lambda", c.loss.lambda);
        s.get("tau", c.loss.tau);
        s.get("soft_ramp_low", c.loss.soft_ramp_low);
        s.finish();
    }
    {
        Section s = top.child("model");
        s.get("depth", c.model.depth);
        s.get("base_channels", c.model.base_channels);
        s.finish();
    }
    {
        Section s = top.child("train");
        std::string loss_name = nn::to_string(c.train.loss);
        s.get("loss", loss_name);
        c.train.loss = nn::loss_kind_from_string(loss_name);
        s.get("learning_rate", c.train.learning_rate);
        s.get("epochs", c.train.epochs);
        s.get("threshold", c.train.threshold);
        s.get("train_frac", c.train.train_frac);
        Section a = s.child("augment");
        a.get("hflip", c.train.augment.hflip);
        a.get("rotation_frac", c.train.augment.rotation_frac);
        a.get("shift_frac", c.train.augment.shift_frac);
        a.get("shear_frac", c.train.augment.shear_frac);
        a.get("zoom_frac", c.train.augment.zoom_frac);
        a.finish();
        s.finish();
    }
    {
        Section s = top.child("synth");
        s.get("count", c.synth.count);
        s.get("width", c.synth.width);
        s.get("height", c.synth.height);
        s.get("blob_count_min", c.synth.blob_count_range[0]);
        s.get("blob_count_max", c.synth.blob_count_range[1]);
        s.get("blob_smoothness", c.synth.blob_smoothness);
        s.get("noise_sigma", c.synth.noise_sigma);
        read_palette(s.child("source_palette"), c.synth.source_palette);
        read_palette(s.child("target_palette"), c.synth.target_palette);
        s.finish();
    }
    {
        Section s = top.child("grid");
        std::string mode = to_string(c.grid.mode);
        s.get("mode", mode);
        c.grid.mode = grid_mode_from_string(mode);
        c.grid.lambda_values = list_from(s, "lambda_values", c.grid.lambda_values);
        c.grid.k_values = list_from(s, "k_values", c.grid.k_values);
        c.grid.m_values = list_from(s, "m_values", c.grid.m_values);
        s.get("base_lambda", c.grid.base_lambda);
        s.get("base_k", c.grid.base_k);
        s.get("base_m", c.grid.base_m);
        s.finish();
    }
    {
        Section s = top.child("data");
        s.get("source_dir", c.data.source_dir);
        s.get("target_dir", c.data.target_dir);
        s.finish();
    }
    top.finish();
    c.validate();
    return c;
}

RunConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParamError("config " + path.string() + ": invalid JSON: " + e.what());
    }
    return config_from_json(j);
}

Json to_json(const RunConfig& c) {
    Json j;
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    j["slic"] = {{"k", c.slic.k},
                 {"m", c.slic.m},
                 {"iterations", c.slic.iterations},
                 {"connectivity_min_frac", c.slic.connectivity_min_frac}};
    j["loss"] = {{"lambda", c.loss.lambda}, {"tau", c.loss.tau}, {"soft_ramp_low", c.loss.soft_ramp_low}};
    j["model"] = {{"depth", c.model.depth}, {"base_channels", c.model.base_channels}};
    const auto& a = c.train.augment;
    j["train"] = {{"loss", nn::to_string(c.train.loss)},
                  {"learning_rate", c.train.learning_rate},
                  {"epochs", c.train.epochs},
                  {"threshold", c.train.threshold},
                  {"train_frac", c.train.train_frac},
                  {"augment",
                   {{"hflip", a.hflip},
                    {"rotation_frac", a.rotation_frac},
                    {"shift_frac", a.shift_frac},
                    {"shear_frac", a.shear_frac},
                    {"zoom_frac", a.zoom_frac}}}};
    const auto& s = c.synth;
    j["synth"] = {{"count", s.count},
                  {"width", s.width},
                  {"height", s.height},
                  {"blob_count_min", s.blob_count_range[0]},
                  {"blob_count_max", s.blob_count_range[1]},
                  {"blob_smoothness", s.blob_smoothness},
                  {"noise_sigma", s.noise_sigma},
                  {"source_palette", palette_json(s.source_palette)},
                  {"target_palette", palette_json(s.target_palette)}};
    j["grid"] = {{"mode", to_string(c.grid.mode)},
                 {"lambda_values", c.grid.lambda_values},
                 {"k_values", c.grid.k_values},
                 {"m_values", c.grid.m_values},
                 {"base_lambda", c.grid.base_lambda},
                 {"base_k", c.grid.base_k},
                 {"base_m", c.grid.base_m}};
    j["data"] = {{"source_dir", c.data.source_dir}, {"target_dir", c.data.target_dir}};
    return j;
}

void write_json(const Json& j, const fs::path& path) {
    make_parent_directories(path);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failure on " + path.string());
}

void echo_config(const RunConfig& cfg, const fs::path& dir) {
    write_json(to_json(cfg), dir / "config.json");
}

} // namespace supra::app
