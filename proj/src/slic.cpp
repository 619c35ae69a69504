#include "supra/slic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>
#include <queue>

#include "supra/parallel.hpp"
#include "supra/simd/kernels.hpp"

namespace supra::slic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct PlanarLab {
    std::vector<double> l, a, b;
    int width = 0;

    explicit PlanarLab(const LabImage& image) : l(image.size()), a(image.size()), b(image.size()), width(image.width()) {
        for (std::size_t i = 0; i < image.size(); ++i) {
            l[i] = image[i].l;
            a[i] = image[i].a;
            b[i] = image[i].b;
        }
    }

    simd::LabRow row(int y) const noexcept {
        const std::size_t off = static_cast<std::size_t>(y) * static_cast<std::size_t>(width);
        return {l.data() + off, a.data() + off, b.data() + off, static_cast<double>(y)};
    }
};

double squared_distance(const ClusterCenter& c, const PlanarLab& lab, std::size_t i, int x, int y, double weight) {
    // Same operation order as the assignment kernels.
    const double dl = lab.l[i] - c.l, da = lab.a[i] - c.a, db = lab.b[i] - c.b;
    const double dx = x - c.x, dy = y - c.y;
    double color = dl * dl + da * da;
    color = color + db * db;
    const double space = dx * dx + dy * dy;
    return color + space * weight;
}

bool within(const ClusterCenter& c, int x, int y, double radius) {
    return std::abs(x - c.x) <= radius && std::abs(y - c.y) <= radius;
}

simd::CenterView view(const ClusterCenter& c) {
    return {c.l, c.a, c.b, c.x, c.y};
}

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
    std::size_t find(std::size_t v) {
        while (parent[v] != v) {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        return v;
    }
};

} // namespace

void SlicParams::validate(std::size_t pixels) const {
    if (k < 4) throw ParamError("slic: k must be >= 4, got " + std::to_string(k));
    if (static_cast<std::size_t>(k) > pixels)
        throw ParamError("slic: k=" + std::to_string(k) + " exceeds pixel count " + std::to_string(pixels));
    if (!(m > 0.0)) throw ParamError("slic: m must be > 0");
    if (iterations < 1) throw ParamError("slic: iterations must be >= 1");
    if (!(connectivity_min_frac > 0.0 && connectivity_min_frac < 1.0))
        throw ParamError("slic: connectivity_min_frac must lie in (0,1)");
}

SuperpixelLabelMap::SuperpixelLabelMap(int width, int height, std::vector<std::uint32_t> labels)
    : width_(width), height_(height), labels_(std::move(labels)) {
    if (width < 0 || height < 0 ||
        labels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
        throw ParamError("label map size does not match dimensions");
    std::uint32_t max_label = 0;
    for (auto v : labels_) max_label = std::max(max_label, v);
    num_segments_ = labels_.empty() ? 0 : max_label + 1;
    std::vector<bool> seen(num_segments_, false);
    for (auto v : labels_) seen[v] = true;
    for (std::uint32_t j = 0; j < num_segments_; ++j)
        if (!seen[j]) throw ParamError("label map is not compacted: label " + std::to_string(j) + " is unused");
}

std::vector<std::size_t> SuperpixelLabelMap::segment_areas() const {
    std::vector<std::size_t> areas(num_segments_, 0);
    for (auto v : labels_) ++areas[v];
    return areas;
}

double grid_spacing(std::size_t pixels, int k) {
    if (k <= 0) throw ParamError("slic: k must be positive");
    return std::sqrt(static_cast<double>(pixels) / static_cast<double>(k));
}

std::vector<ClusterCenter> seed_centers(const LabImage& image, int k) {
    const std::size_t n = image.size();
    if (k < 4 || static_cast<std::size_t>(k) > n)
        throw ParamError("slic: k=" + std::to_string(k) + " outside [4, " + std::to_string(n) + "]");
    const int w = image.width(), h = image.height();
    const double s = grid_spacing(n, k);
    const int nx = std::max(1, static_cast<int>(std::floor(w / s)));
    const int ny = std::max(1, static_cast<int>(std::floor(h / s)));

    auto at = [&](int x, int y) -> const Lab& {
        return image(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1));
    };
    auto gradient = [&](int x, int y) {
        return lab_distance_sq(at(x + 1, y), at(x - 1, y)) + lab_distance_sq(at(x, y + 1), at(x, y - 1));
    };

    std::vector<ClusterCenter> centers;
    centers.reserve(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int gx = static_cast<int>(std::floor((i + 0.5) * w / nx));
            const int gy = static_cast<int>(std::floor((j + 0.5) * h / ny));
            int bx = gx, by = gy;
            double best = gradient(gx, gy);
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int x = gx + dx, y = gy + dy;
                    if (x < 0 || y < 0 || x >= w || y >= h) continue;
                    const double g = gradient(x, y);
                    if (g < best) {
                        best = g;
                        bx = x;
                        by = y;
                    }
                }
            }
            const Lab& c = image(bx, by);
            centers.push_back({c.l, c.a, c.b, static_cast<double>(bx), static_cast<double>(by), 0});
        }
    }
    return centers;
}

double slic_distance(const ClusterCenter& center, const Lab& color, double x, double y, double spacing, double m) {
    if (!(spacing > 0.0) || !(m > 0.0)) throw ParamError("slic_distance: spacing and m must be positive");
    const double dc2 = lab_distance_sq(color, {center.l, center.a, center.b});
    const double dx = x - center.x, dy = y - center.y;
    const double ratio = std::sqrt(dx * dx + dy * dy) / spacing;
    return std::sqrt(dc2 + ratio * ratio * m * m);
}

SuperpixelLabelMap segment(const LabImage& image, const SlicParams& params, std::uint64_t /*seed*/,
                           SegmentTrace* trace) {
    require_min_size(image.width(), image.height(), "slic");
    params.validate(image.size());

    const int w = image.width(), h = image.height();
    const std::size_t n = image.size();
    const PlanarLab lab(image);
    const double s = grid_spacing(n, params.k);
    const double weight = (params.m / s) * (params.m / s);
    const auto& kernels = simd::active();

    std::vector<ClusterCenter> centers = seed_centers(image, params.k);
    const std::size_t nc = centers.size();

    std::vector<std::int32_t> labels(n, -1);
    std::vector<std::int32_t> next(n);
    std::vector<double> best(n);
    std::vector<ClusterCenter> assignment_centers;
    if (trace) {
        trace->spacing = s;
        trace->objective.clear();
        trace->objective_d.clear();
    }

    for (int iter = 0; iter < params.iterations; ++iter) {
        std::fill(best.begin(), best.end(), kInf);
        std::fill(next.begin(), next.end(), -1);

        // Rows are independent: each pixel's winner depends only on the
        // centers visited in index order, never on the band split.
        parallel_for(0, static_cast<std::size_t>(h), [&](std::size_t row_lo, std::size_t row_hi) {
            const int y_lo = static_cast<int>(row_lo), y_hi = static_cast<int>(row_hi);
            for (std::size_t c = 0; c < nc; ++c) {
                const auto& cc = centers[c];
                const int y0 = std::max(y_lo, static_cast<int>(std::ceil(cc.y - s)));
                const int y1 = std::min(y_hi, static_cast<int>(std::floor(cc.y + s)) + 1);
                const int x0 = std::max(0, static_cast<int>(std::ceil(cc.x - s)));
                const int x1 = std::min(w, static_cast<int>(std::floor(cc.x + s)) + 1);
                if (x0 >= x1) continue;
                for (int y = y0; y < y1; ++y) {
                    const std::size_t off = static_cast<std::size_t>(y) * static_cast<std::size_t>(w);
                    kernels.slic_assign_row(lab.row(y), view(cc), weight, static_cast<std::int32_t>(c),
                                            best.data() + off, next.data() + off, x0, x1);
                }
            }

            for (int y = y_lo; y < y_hi; ++y) {
                for (int x = 0; x < w; ++x) {
                    const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + x;
                    // Keep the previous center as a candidate while it stays within 2S,
                    // so the k-means objective cannot increase when a center drifts.
                    const std::int32_t prev = labels[i];
                    if (prev >= 0 && prev != next[i] && within(centers[prev], x, y, 2.0 * s)) {
                        const double d = squared_distance(centers[prev], lab, i, x, y, weight);
                        if (d < best[i] || (d == best[i] && prev < next[i])) {
                            best[i] = d;
                            next[i] = prev;
                        }
                    }
                    if (next[i] >= 0) continue;
                    for (std::size_t c = 0; c < nc; ++c) {
                        if (!within(centers[c], x, y, 2.0 * s)) continue;
                        const double d = squared_distance(centers[c], lab, i, x, y, weight);
                        if (d < best[i]) {
                            best[i] = d;
                            next[i] = static_cast<std::int32_t>(c);
                        }
                    }
                    if (next[i] >= 0) continue;
                    if (prev >= 0) {
                        next[i] = prev;
                        best[i] = squared_distance(centers[prev], lab, i, x, y, weight);
                        continue;
                    }
                    double nearest = kInf;
                    for (std::size_t c = 0; c < nc; ++c) {
                        const double dx = x - centers[c].x, dy = y - centers[c].y;
                        const double d = dx * dx + dy * dy;
                        if (d < nearest) {
                            nearest = d;
                            next[i] = static_cast<std::int32_t>(c);
                        }
                    }
                    best[i] = squared_distance(centers[next[i]], lab, i, x, y, weight);
                }
            }
        });
        labels.swap(next);

        if (trace) {
            double obj = 0.0, obj_d = 0.0;
            for (double d : best) {
                obj += d;
                obj_d += std::sqrt(d);
            }
            trace->objective.push_back(obj);
            trace->objective_d.push_back(obj_d);
        }
        if (iter + 1 == params.iterations && trace) assignment_centers = centers;

        // Sequential update in pixel order keeps the sums independent of threading.
        std::vector<std::array<double, 5>> sums(nc, {0, 0, 0, 0, 0});
        std::vector<std::size_t> counts(nc, 0);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + x;
                auto& acc = sums[static_cast<std::size_t>(labels[i])];
                acc[0] += lab.l[i];
                acc[1] += lab.a[i];
                acc[2] += lab.b[i];
                acc[3] += x;
                acc[4] += y;
                ++counts[static_cast<std::size_t>(labels[i])];
            }
        }
        for (std::size_t c = 0; c < nc; ++c) {
            centers[c].count = counts[c];
            if (counts[c] == 0) continue;
            const double inv = 1.0 / static_cast<double>(counts[c]);
            centers[c].l = sums[c][0] * inv;
            centers[c].a = sums[c][1] * inv;
            centers[c].b = sums[c][2] * inv;
            centers[c].x = sums[c][3] * inv;
            centers[c].y = sums[c][4] * inv;
        }
    }

    if (trace) {
        trace->raw_labels = labels;
        trace->assignment_centers = std::move(assignment_centers);
        trace->centers = centers;
    }
    return enforce_connectivity(w, h, labels, s, params.connectivity_min_frac);
}

SuperpixelLabelMap enforce_connectivity(int width, int height, const std::vector<std::int32_t>& labels,
                                        double spacing, double min_frac) {
    const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (labels.size() != n) throw ParamError("enforce_connectivity: label count does not match dimensions");
    if (n == 0) return {};

    // 4-connected components in scan order.
    constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> comp(n, kNone);
    std::vector<std::size_t> comp_size, comp_first;
    std::vector<std::int32_t> comp_label;
    std::vector<std::size_t> stack;
    for (std::size_t start = 0; start < n; ++start) {
        if (comp[start] != kNone) continue;
        const std::size_t id = comp_size.size();
        const std::int32_t lbl = labels[start];
        comp[start] = id;
        stack.push_back(start);
        std::size_t size = 0;
        while (!stack.empty()) {
            const std::size_t i = stack.back();
            stack.pop_back();
            ++size;
            const int x = static_cast<int>(i % static_cast<std::size_t>(width));
            const int y = static_cast<int>(i / static_cast<std::size_t>(width));
            auto visit = [&](std::size_t j) {
                if (comp[j] == kNone && labels[j] == lbl) {
                    comp[j] = id;
                    stack.push_back(j);
                }
            };
            if (x > 0) visit(i - 1);
            if (x + 1 < width) visit(i + 1);
            if (y > 0) visit(i - static_cast<std::size_t>(width));
            if (y + 1 < height) visit(i + static_cast<std::size_t>(width));
        }
        comp_size.push_back(size);
        comp_first.push_back(start);
        comp_label.push_back(lbl);
    }

    const std::size_t nc = comp_size.size();
    std::vector<std::vector<std::size_t>> adjacent(nc);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + x;
            if (x + 1 < width && comp[i + 1] != comp[i]) {
                adjacent[comp[i]].push_back(comp[i + 1]);
                adjacent[comp[i + 1]].push_back(comp[i]);
            }
            if (y + 1 < height && comp[i + width] != comp[i]) {
                adjacent[comp[i]].push_back(comp[i + width]);
                adjacent[comp[i + width]].push_back(comp[i]);
            }
        }
    }
    for (auto& a : adjacent) {
        std::sort(a.begin(), a.end());
        a.erase(std::unique(a.begin(), a.end()), a.end());
    }

    // Union-find over components; attributes live at the root.
    const double min_size = min_frac * spacing * spacing;
    UnionFind uf(nc);
    std::vector<std::size_t> size = comp_size;
    std::vector<std::size_t> first = comp_first;
    std::vector<std::int32_t> label = comp_label;
    std::size_t groups = nc;

    bool merged = true;
    while (merged && groups > 1) {
        merged = false;
        for (std::size_t c = 0; c < nc; ++c) {
            const std::size_t r = uf.find(c);
            if (r != c || static_cast<double>(size[r]) >= min_size) continue;
            std::size_t target = kNone;
            std::vector<std::size_t> pruned;
            for (std::size_t nb : adjacent[r]) {
                const std::size_t q = uf.find(nb);
                if (q == r) continue;
                pruned.push_back(q);
                if (target == kNone || size[q] > size[target] || (size[q] == size[target] && first[q] < first[target]))
                    target = q;
            }
            if (target == kNone) continue;
            // Merge r into target; the target keeps its label and identity.
            uf.parent[r] = target;
            size[target] += size[r];
            first[target] = std::min(first[target], first[r]);
            auto& dst = adjacent[target];
            dst.insert(dst.end(), pruned.begin(), pruned.end());
            std::sort(dst.begin(), dst.end());
            dst.erase(std::unique(dst.begin(), dst.end()), dst.end());
            adjacent[r].clear();
            adjacent[r].shrink_to_fit();
            --groups;
            merged = true;
        }
    }

    // Order surviving groups by (original label, first pixel) and compact.
    std::vector<std::size_t> roots;
    for (std::size_t c = 0; c < nc; ++c)
        if (uf.find(c) == c) roots.push_back(c);
    std::sort(roots.begin(), roots.end(), [&](std::size_t p, std::size_t q) {
        return label[p] != label[q] ? label[p] < label[q] : first[p] < first[q];
    });
    std::vector<std::uint32_t> new_id(nc, 0);
    for (std::size_t j = 0; j < roots.size(); ++j) new_id[roots[j]] = static_cast<std::uint32_t>(j);
    std::vector<std::uint32_t> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = new_id[uf.find(comp[i])];
    return SuperpixelLabelMap(width, height, std::move(out));
}

SuperpixelLabelMap enforce_connectivity(const SuperpixelLabelMap& labels, double spacing, double min_frac) {
    std::vector<std::int32_t> raw(labels.labels().begin(), labels.labels().end());
    return enforce_connectivity(labels.width(), labels.height(), raw, spacing, min_frac);
}

RgbImage boundary_overlay(const SuperpixelLabelMap& labels, const RgbImage& image) {
    if (!labels.same_shape(image)) throw ParamError("boundary_overlay: dimension mismatch");
    RgbImage out = image;
    const int w = labels.width(), h = labels.height();
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const auto v = labels(x, y);
            const bool edge = (x > 0 && labels(x - 1, y) != v) || (x + 1 < w && labels(x + 1, y) != v) ||
                              (y > 0 && labels(x, y - 1) != v) || (y + 1 < h && labels(x, y + 1) != v);
            if (edge) out(x, y) = kBoundaryColor;
        }
    }
    return out;
}

bool is_four_connected(const SuperpixelLabelMap& labels) {
    const std::size_t n = labels.size();
    const int w = labels.width(), h = labels.height();
    std::vector<bool> seen(labels.num_segments(), false);
    std::vector<bool> visited(n, false);
    std::vector<std::size_t> stack;
    for (std::size_t start = 0; start < n; ++start) {
        if (visited[start]) continue;
        const auto lbl = labels[start];
        if (seen[lbl]) return false;
        seen[lbl] = true;
        visited[start] = true;
        stack.push_back(start);
        while (!stack.empty()) {
            const std::size_t i = stack.back();
            stack.pop_back();
            const int x = static_cast<int>(i % static_cast<std::size_t>(w));
            const int y = static_cast<int>(i / static_cast<std::size_t>(w));
            auto visit = [&](std::size_t j) {
                if (!visited[j] && labels[j] == lbl) {
                    visited[j] = true;
                    stack.push_back(j);
                }
            };
            if (x > 0) visit(i - 1);
            if (x + 1 < w) visit(i + 1);
            if (y > 0) visit(i - static_cast<std::size_t>(w));
            if (y + 1 < h) visit(i + static_cast<std::size_t>(w));
        }
    }
    return true;
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::vector<std::uint8_t>& in, std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{in[off + i]} << (8 * i);
    return v;
}

} // namespace

std::vector<std::uint8_t> encode_label_map(const SuperpixelLabelMap& labels) {
    std::vector<std::uint8_t> out{'S', 'P', 'L', 'M'};
    out.reserve(16 + 4 * labels.size());
    put_u32(out, static_cast<std::uint32_t>(labels.width()));
    put_u32(out, static_cast<std::uint32_t>(labels.height()));
    put_u32(out, labels.num_segments());
    for (auto v : labels.labels()) put_u32(out, v);
    return out;
}

SuperpixelLabelMap decode_label_map(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 16 || bytes[0] != 'S' || bytes[1] != 'P' || bytes[2] != 'L' || bytes[3] != 'M')
        throw FormatError("label map: missing SPLM header");
    const std::uint32_t w = get_u32(bytes, 4), h = get_u32(bytes, 8), segments = get_u32(bytes, 12);
    const std::size_t n = static_cast<std::size_t>(w) * h;
    if (bytes.size() != 16 + 4 * n) throw FormatError("label map: payload length does not match header");
    std::vector<std::uint32_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = get_u32(bytes, 16 + 4 * i);
    SuperpixelLabelMap out(static_cast<int>(w), static_cast<int>(h), std::move(labels));
    if (out.num_segments() != segments) throw FormatError("label map: num_segments does not match labels");
    return out;
}

void save_label_map(const SuperpixelLabelMap& labels, const std::filesystem::path& path) {
    const auto bytes = encode_label_map(labels);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failure on " + path.string());
}

SuperpixelLabelMap load_label_map(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_label_map(bytes);
}

} // namespace supra::slic
