#include "supra/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

#include "supra/fs.hpp"
#include "supra/png_io.hpp"

namespace supra::data {

namespace fs = std::filesystem;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::vector<fs::path> png_files(const fs::path& dir) {
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".png") out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

// Coarse random grid, bilinearly upsampled: a smooth field in [-1,1].
std::vector<double> smooth_noise(int w, int h, int cells, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<double> grid(static_cast<std::size_t>((cells + 1) * (cells + 1)));
    for (auto& g : grid) g = unit(rng);
    std::vector<double> out(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        const double gy = static_cast<double>(y) / (h - 1) * cells;
        const int y0 = std::min(cells - 1, static_cast<int>(gy));
        const double fy = gy - y0;
        for (int x = 0; x < w; ++x) {
            const double gx = static_cast<double>(x) / (w - 1) * cells;
            const int x0 = std::min(cells - 1, static_cast<int>(gx));
            const double fx = gx - x0;
            auto at = [&](int i, int j) { return grid[static_cast<std::size_t>(j * (cells + 1) + i)]; };
            // smoothstep weights remove the grid creases of plain bilinear
            const double sx = fx * fx * (3 - 2 * fx), sy = fy * fy * (3 - 2 * fy);
            const double top = at(x0, y0) + (at(x0 + 1, y0) - at(x0, y0)) * sx;
            const double bottom = at(x0, y0 + 1) + (at(x0 + 1, y0 + 1) - at(x0, y0 + 1)) * sx;
            out[static_cast<std::size_t>(y) * w + x] = top + (bottom - top) * sy;
        }
    }
    return out;
}

BinMask blob_mask(const SynthConfig& cfg, std::mt19937_64& rng) {
    const int w = cfg.width, h = cfg.height;
    std::uniform_int_distribution<int> count(cfg.blob_count_range[0], cfg.blob_count_range[1]);
    std::uniform_real_distribution<double> pos(0.2, 0.8);
    std::uniform_real_distribution<double> scale(0.8, 1.6);
    const int blobs = count(rng);
    struct Blob {
        double x, y, r;
    };
    std::vector<Blob> centers;
    for (int b = 0; b < blobs; ++b)
        centers.push_back({pos(rng) * w, pos(rng) * h, cfg.blob_smoothness * std::min(w, h) * scale(rng)});
    const auto warp = smooth_noise(w, h, 4, rng);

    BinMask mask(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double field = 0.0;
            for (const auto& c : centers) {
                const double dx = (x - c.x) / c.r, dy = (y - c.y) / c.r;
                field = std::max(field, std::exp(-(dx * dx + dy * dy) * std::log(2.0)));
            }
            field += 0.25 * warp[static_cast<std::size_t>(y) * w + x];
            mask(x, y) = field > 0.5 ? 1 : 0;
        }
    }
    return mask;
}

RgbImage paint(const BinMask& mask, const Palette& palette, double noise_sigma, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> jitter(-palette.jitter, palette.jitter);
    std::normal_distribution<double> noise(0.0, noise_sigma > 0 ? noise_sigma : 1.0);
    auto jittered = [&](Lab c) {
        if (palette.jitter > 0) {
            c.l += jitter(rng);
            c.a += jitter(rng);
            c.b += jitter(rng);
        }
        return c;
    };
    const Lab lesion = jittered(palette.lesion);
    const Lab background = jittered(palette.background);

    RgbImage image(mask.width(), mask.height());
    for (std::size_t i = 0; i < mask.size(); ++i) {
        Lab c = mask[i] ? lesion : background;
        if (noise_sigma > 0) {
            c.l += noise(rng);
            c.a += noise(rng);
            c.b += noise(rng);
        }
        c.l = std::clamp(c.l, 0.0, 100.0);
        image[i] = lab_to_srgb(c);
    }
    return image;
}

std::string index_id(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "img_%04zu", i);
    return buf;
}

template <class P>
Raster<P> pad_impl(const Raster<P>& in, int multiple) {
    if (multiple < 1) throw ParamError("pad_to_multiple: multiple must be >= 1");
    const int w = in.width(), h = in.height();
    const int pw = (w + multiple - 1) / multiple * multiple;
    const int ph = (h + multiple - 1) / multiple * multiple;
    if (pw == w && ph == h) return in;
    auto reflect = [](int i, int n) {
        const int period = 2 * n;
        i %= period;
        return i < n ? i : period - 1 - i;
    };
    Raster<P> out(pw, ph);
    for (int y = 0; y < ph; ++y)
        for (int x = 0; x < pw; ++x) out(x, y) = in(reflect(x, w), reflect(y, h));
    return out;
}

} // namespace

std::string to_string(Modality m) {
    return m == Modality::source ? "source" : "target";
}

Modality modality_from_string(const std::string& s) {
    if (s == "source") return Modality::source;
    if (s == "target") return Modality::target;
    throw ParamError("unknown modality '" + s + "' (expected source or target)");
}

void Dataset::validate() const {
    std::set<std::string> ids;
    for (const auto& it : items) {
        require_same_shape(it.image, it.mask, ("dataset item " + it.id).c_str());
        if (!ids.insert(it.id).second) throw ParamError("dataset: duplicate id " + it.id);
    }
}

Dataset load_dataset(const fs::path& image_dir, const fs::path& mask_dir, Modality modality) {
    if (!fs::is_directory(image_dir)) throw IoError("not a directory: " + image_dir.string());
    if (!fs::is_directory(mask_dir)) throw IoError("not a directory: " + mask_dir.string());

    Dataset ds;
    std::vector<std::string> missing, mismatched;
    for (const auto& img_path : png_files(image_dir)) {
        const std::string stem = img_path.stem().string();
        const fs::path mask_path = mask_dir / (stem + ".png");
        if (!fs::exists(mask_path)) {
            missing.push_back(stem);
            continue;
        }
        Item it{load_png(img_path), load_mask_png(mask_path), stem, modality};
        if (!it.image.same_shape(it.mask)) {
            mismatched.push_back(stem);
            continue;
        }
        ds.items.push_back(std::move(it));
    }
    if (!missing.empty() || !mismatched.empty()) {
        std::string msg = "dataset " + image_dir.string() + ":";
        auto join = [](const std::vector<std::string>& v) {
            std::string s;
            for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
            return s;
        };
        if (!missing.empty()) msg += " missing masks for [" + join(missing) + "]";
        if (!mismatched.empty()) msg += " image/mask size mismatch for [" + join(mismatched) + "]";
        throw FormatError(msg);
    }
    std::sort(ds.items.begin(), ds.items.end(), [](const Item& a, const Item& b) { return a.id < b.id; });
    return ds;
}

Dataset load_dataset(const fs::path& root, Modality modality) {
    return load_dataset(root / "images", root / "masks", modality);
}

void save_dataset(const Dataset& dataset, const fs::path& root) {
    supra::make_directories(root / "images");
    supra::make_directories(root / "masks");
    for (const auto& it : dataset.items) {
        save_png(it.image, root / "images" / (it.id + ".png"));
        save_png(it.mask, root / "masks" / (it.id + ".png"));
    }
}

std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_frac, std::uint64_t seed) {
    if (!(train_frac > 0.0 && train_frac < 1.0)) throw ParamError("split: train_frac must lie in (0,1)");
    if (dataset.empty()) throw ParamError("split: dataset is empty");
    const std::size_t n = dataset.size();
    const auto n_train = static_cast<std::size_t>(std::llround(train_frac * static_cast<double>(n)));
    if (n_train == 0 || n_train >= n)
        throw ParamError("split: " + std::to_string(n) + " items at train_frac " + std::to_string(train_frac) +
                         " leaves an empty part");
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::pair<Dataset, Dataset> out;
    for (std::size_t i = 0; i < n; ++i)
        (i < n_train ? out.first : out.second).items.push_back(dataset.items[order[i]]);
    return out;
}

void SynthConfig::validate() const {
    if (count < 1) throw ParamError("synth: count must be >= 1");
    if (width < kMinImageSide || height < kMinImageSide || width % 4 != 0 || height % 4 != 0)
        throw ParamError("synth: size must be >= 8 and divisible by 4");
    if (blob_count_range[0] < 1 || blob_count_range[1] < blob_count_range[0])
        throw ParamError("synth: invalid blob_count_range");
    if (!(blob_smoothness > 0.0 && blob_smoothness < 1.0)) throw ParamError("synth: blob_smoothness must lie in (0,1)");
    if (!(noise_sigma >= 0.0)) throw ParamError("synth: noise_sigma must be >= 0");
    for (const Palette* p : {&source_palette, &target_palette}) {
        if (!(p->jitter >= 0.0)) throw ParamError("synth: jitter must be >= 0");
        if (std::sqrt(lab_distance_sq(p->lesion, p->background)) < 15.0)
            throw ParamError("synth: lesion/background Lab distance must be >= 15");
    }
}

SynthResult synth_generate(const SynthConfig& cfg) {
    cfg.validate();
    SynthResult out;
    const std::size_t pixels = static_cast<std::size_t>(cfg.width) * cfg.height;
    for (std::size_t i = 0; i < static_cast<std::size_t>(cfg.count); ++i) {
        const std::uint64_t base = splitmix64(cfg.seed ^ splitmix64(i));
        std::mt19937_64 mask_rng(base);
        BinMask mask;
        double frac = 0.0;
        int attempt = 0;
        for (;; ++attempt) {
            if (attempt == 10)
                throw Error("synth: could not generate a mask with 1%-60% foreground for image " + std::to_string(i));
            mask = blob_mask(cfg, mask_rng);
            std::size_t fg = 0;
            for (auto v : mask.pixels()) fg += v;
            frac = static_cast<double>(fg) / static_cast<double>(pixels);
            if (frac >= 0.01 && frac <= 0.60) break;
        }
        std::mt19937_64 src_rng(splitmix64(base ^ 0x5352435f5352435full));
        std::mt19937_64 tgt_rng(splitmix64(base ^ 0x5447545f5447545full));
        out.source.items.push_back({paint(mask, cfg.source_palette, cfg.noise_sigma, src_rng), mask, index_id(i),
                                    Modality::source});
        out.target.items.push_back({paint(mask, cfg.target_palette, cfg.noise_sigma, tgt_rng), mask, index_id(i),
                                    Modality::target});
        out.foreground_fraction.push_back(frac);
    }
    return out;
}

RgbImage pad_to_multiple(const RgbImage& image, int multiple) {
    return pad_impl(image, multiple);
}

BinMask pad_to_multiple(const BinMask& mask, int multiple) {
    return pad_impl(mask, multiple);
}

ProbMask crop(const ProbMask& mask, int width, int height) {
    if (width > mask.width() || height > mask.height()) throw ParamError("crop: target larger than source");
    if (width == mask.width() && height == mask.height()) return mask;
    ProbMask out(width, height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) out(x, y) = mask(x, y);
    return out;
}

} // namespace supra::data
