#include "supra/nn/weights.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <json.hpp>

#include "supra/fs.hpp"

namespace supra::nn {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

static_assert(std::endian::native == std::endian::little, "weights blob is written in host order");

void save_weights(const ParamSet& params, const ModelConfig& model, std::uint64_t seed, const fs::path& manifest) {
    const fs::path blob_path = fs::path(manifest).replace_extension(".bin");
    ordered_json j;
    j["format"] = "supra-weights";
    j["version"] = 1;
    j["dtype"] = "float32";
    j["seed"] = seed;
    j["model"] = {{"depth", model.depth}, {"base_channels", model.base_channels}};
    j["blob"] = blob_path.filename().string();
    ordered_json tensors = ordered_json::array();
    std::vector<float> blob;
    for (const auto& p : params.params) {
        tensors.push_back({{"name", p.name}, {"shape", p.value.shape}, {"offset", blob.size()}});
        for (double v : p.value.data) blob.push_back(static_cast<float>(v));
    }
    j["tensors"] = std::move(tensors);

    make_parent_directories(manifest);
    std::ofstream bin(blob_path, std::ios::binary);
    if (!bin) throw IoError("cannot write " + blob_path.string());
    bin.write(reinterpret_cast<const char*>(blob.data()), static_cast<std::streamsize>(blob.size() * sizeof(float)));
    std::ofstream out(manifest);
    if (!out) throw IoError("cannot write " + manifest.string());
    out << j.dump(2) << "\n";
    if (!bin || !out) throw IoError("write failure on " + manifest.string());
}

LoadedWeights load_weights(const fs::path& manifest) {
    std::ifstream in(manifest);
    if (!in) throw IoError("cannot open " + manifest.string());
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(manifest.string() + ": " + e.what());
    }

    LoadedWeights out;
    try {
        if (j.at("format") != "supra-weights") throw FormatError(manifest.string() + ": not a supra weights manifest");
        if (j.at("dtype") != "float32") throw FormatError(manifest.string() + ": unsupported dtype " + j.at("dtype").dump());
        out.seed = j.at("seed").get<std::uint64_t>();
        out.model.depth = j.at("model").at("depth").get<int>();
        out.model.base_channels = j.at("model").at("base_channels").get<int>();
        out.model.validate();

        const auto layout = parameter_layout(out.model);
        const auto& tensors = j.at("tensors");
        if (tensors.size() != layout.size())
            throw FormatError(manifest.string() + ": " + std::to_string(tensors.size()) + " tensors, model expects " +
                              std::to_string(layout.size()));

        const fs::path blob_path = manifest.parent_path() / j.at("blob").get<std::string>();
        std::ifstream bin(blob_path, std::ios::binary);
        if (!bin) throw IoError("cannot open " + blob_path.string());
        std::vector<char> bytes((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());

        std::size_t total = 0;
        for (const auto& [name, shape] : layout) total += element_count(shape);
        if (bytes.size() != total * sizeof(float))
            throw FormatError(blob_path.string() + ": " + std::to_string(bytes.size()) + " bytes, expected " +
                              std::to_string(total * sizeof(float)));

        for (std::size_t i = 0; i < layout.size(); ++i) {
            const auto& t = tensors[i];
            const auto name = t.at("name").get<std::string>();
            const auto shape = t.at("shape").get<Shape>();
            const auto offset = t.at("offset").get<std::size_t>();
            if (name != layout[i].first || shape != layout[i].second)
                throw FormatError(manifest.string() + ": tensor " + std::to_string(i) + " is " + name + " " +
                                  to_string(shape) + ", model expects " + layout[i].first + " " +
                                  to_string(layout[i].second));
            const std::size_t count = element_count(shape);
            if ((offset + count) * sizeof(float) > bytes.size())
                throw FormatError(manifest.string() + ": tensor " + name + " overruns the blob");
            Parameter p{name, Tensor(shape), Tensor(shape), Tensor(shape)};
            for (std::size_t k = 0; k < count; ++k) {
                float f;
                std::memcpy(&f, bytes.data() + (offset + k) * sizeof(float), sizeof f);
                p.value.data[k] = f;
            }
            out.params.params.push_back(std::move(p));
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(manifest.string() + ": " + e.what());
    }
    return out;
}

} // namespace supra::nn
