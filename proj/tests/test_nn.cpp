#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "support/gradcheck.hpp"
#include "support/naive_net.hpp"
#include "support/test_support.hpp"
#include "supra/nn/augment.hpp"
#include "supra/nn/layers.hpp"
#include "supra/nn/model.hpp"
#include "supra/nn/optim.hpp"
#include "supra/nn/weights.hpp"
#include "supra/parallel.hpp"
#include "supra/slicloss.hpp"

using namespace supra;
using namespace supra::nn;
namespace st = supra::testing;

namespace {

// Recorded once from this implementation and frozen.
constexpr std::uint64_t kGoldenAugmentHash = 707460503511921136ull;

Tensor random_tensor(Shape shape, std::mt19937_64& rng, double lo = -1, double hi = 1) {
    Tensor t(std::move(shape));
    std::uniform_real_distribution<double> u(lo, hi);
    for (auto& v : t.data) v = u(rng);
    return t;
}

ParamSet random_params(const ModelConfig& cfg, std::mt19937_64& rng) {
    ParamSet p = init_params(cfg, rng());
    std::uniform_real_distribution<double> u(-0.1, 0.1);
    for (auto& q : p.params)
        if (q.value.shape.size() == 1)
            for (auto& v : q.value.data) v = u(rng);
    return p;
}

void check_layer(const st::GradCheckStats& s) {
    INFO(s.name << ": checked " << s.checked << ", failures " << s.failures << ", max rel " << s.max_rel);
    CHECK(s.ok());
    CHECK(s.instances >= 20);
}

} // namespace

TEST_SUITE("nn") {

TEST_CASE("conv matches the direct nested-loop oracle") {
    std::mt19937_64 rng(2);
    for (int k : {1, 3}) {
        const Tensor in = random_tensor({3, 9, 7}, rng);
        const Tensor w = random_tensor({4, 3, k, k}, rng);
        const Tensor b = random_tensor({4}, rng);
        const Tensor a = conv_forward(in, w, b), ref = st::naive_conv(in, w, b);
        REQUIRE(a.shape == ref.shape);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a.data[i] - ref.data[i]) < 1e-12);
    }
    CHECK_THROWS_AS(conv_forward(random_tensor({2, 8, 8}, rng), Tensor({4, 3, 3, 3}), Tensor({4})), ParamError);
}

TEST_CASE("single conv backward equals the hand-derived transpose") {
    std::mt19937_64 rng(8);
    const Tensor in = random_tensor({1, 3, 3}, rng);
    const Tensor w = random_tensor({1, 1, 3, 3}, rng);
    Tensor g({1, 3, 3});
    g.at(0, 1, 1) = 1.0; // centre output only
    auto r = conv_backward(in, w, g);
    // d out(1,1) / d in(y,x) = w[y][x]; d out(1,1) / d w[ky][kx] = in[ky][kx]
    for (int i = 0; i < 9; ++i) {
        CHECK(r.input.data[static_cast<std::size_t>(i)] == w.data[static_cast<std::size_t>(i)]);
        CHECK(r.weight.data[static_cast<std::size_t>(i)] == in.data[static_cast<std::size_t>(i)]);
    }
    CHECK(r.bias.data[0] == 1.0);

    Tensor corner({1, 3, 3});
    corner.at(0, 0, 0) = 2.0;
    r = conv_backward(in, w, corner);
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 3; ++x) {
            const double expect_in = (y < 2 && x < 2) ? 2.0 * w.data[static_cast<std::size_t>((y + 1) * 3 + x + 1)] : 0.0;
            CHECK(r.input.at(0, y, x) == expect_in);
            const double expect_w = (y >= 1 && x >= 1) ? 2.0 * in.at(0, y - 1, x - 1) : 0.0;
            CHECK(r.weight.data[static_cast<std::size_t>(y * 3 + x)] == expect_w);
        }
}

TEST_CASE("layer gradients match finite differences") {
    check_layer(st::check_conv(25, 100));
    check_layer(st::check_relu(25, 101));
    check_layer(st::check_maxpool(25, 102));
    check_layer(st::check_upsample(25, 103));
    check_layer(st::check_concat(25, 104));
    check_layer(st::check_sigmoid(25, 105));
}

TEST_CASE("loss gradients match finite differences") {
    check_layer(st::check_soft_consistency(25, 200));
    check_layer(st::check_bce(25, 201));
    check_layer(st::check_slic_loss(25, 202));
}

TEST_CASE("maxpool, upsample and concat shapes") {
    Tensor t({1, 4, 4});
    for (std::size_t i = 0; i < 16; ++i) t.data[i] = static_cast<double>(i % 5);
    const auto p = maxpool_forward(t);
    CHECK(p.output.shape == Shape{1, 2, 2});
    CHECK(p.output.data == std::vector<double>{4, 3, 4, 4});
    CHECK(upsample_forward(p.output).shape == Shape{1, 4, 4});
    Tensor ties({1, 2, 2}, 1.0);
    CHECK(maxpool_forward(ties).argmax[0] == 0);
    const Tensor cat = concat_forward(Tensor({2, 4, 4}, 1.0), Tensor({3, 4, 4}, 2.0));
    CHECK(cat.shape == Shape{5, 4, 4});
    CHECK_THROWS_AS(concat_forward(Tensor({2, 4, 4}), Tensor({1, 2, 4})), ParamError);
}

TEST_CASE("parameter layout and initialisation") {
    const ModelConfig def;
    const ParamSet a = init_params(def, 7), b = init_params(def, 7), c = init_params(def, 8);
    CHECK(a.scalar_count() == 6641);
    bool differs = false;
    for (std::size_t i = 0; i < a.params.size(); ++i) {
        CHECK(a.params[i].value.data == b.params[i].value.data);
        differs = differs || a.params[i].value.data != c.params[i].value.data;
        const auto& shape = a.params[i].value.shape;
        if (shape.size() == 4) {
            const double bound = std::sqrt(6.0 / (shape[1] * shape[2] * shape[3]));
            for (double v : a.params[i].value.data) CHECK(std::abs(v) <= bound);
        } else {
            for (double v : a.params[i].value.data) CHECK(v == 0.0);
        }
        CHECK(a.params[i].m.shape == shape);
        CHECK(a.params[i].v.shape == shape);
    }
    CHECK(differs);
    CHECK(a.step == 0);
    CHECK(a.find("head.weight").value.shape == Shape{1, 8, 1, 1});
    CHECK_THROWS_AS(a.find("nope"), ParamError);
    CHECK_THROWS_AS(init_params(ModelConfig{0, 8}, 1), ParamError);
}

TEST_CASE("forward contract") {
    ModelConfig cfg;
    SegNet net(cfg);
    ParamSet zero = init_params(cfg, 1);
    for (auto& p : zero.params) std::fill(p.value.data.begin(), p.value.data.end(), 0.0);
    std::mt19937_64 rng(3);
    const Tensor img = random_tensor({3, 64, 64}, rng, 0, 1);
    const ProbMask out = net.forward(zero, img);
    CHECK(out.width() == 64);
    CHECK(out.height() == 64);
    for (double v : out.pixels()) CHECK(v == 0.5);

    // huge weights still give open-interval probabilities
    ParamSet big = init_params(cfg, 4);
    for (auto& p : big.params)
        for (auto& v : p.value.data) v *= 50;
    const ProbMask saturated = net.forward(big, img);
    for (double v : saturated.pixels()) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }
    CHECK_THROWS_AS(net.forward(zero, random_tensor({3, 62, 64}, rng)), ParamError);
    CHECK_THROWS_AS(net.forward(zero, random_tensor({1, 64, 64}, rng)), ParamError);
    CHECK_THROWS_AS(net.forward(init_params(ModelConfig{1, 8}, 1), img), ParamError);
}

TEST_CASE("tiny network forward matches the naive oracle") {
    std::mt19937_64 rng(12);
    for (const ModelConfig cfg : {ModelConfig{1, 2}, ModelConfig{2, 3}}) {
        SegNet net(cfg);
        const ParamSet p = random_params(cfg, rng);
        const Tensor img = random_tensor({3, 8, 8}, rng, 0, 1);
        const ProbMask out = net.forward(p, img);
        const auto ref = st::NaiveNet{cfg}.forward(p, img);
        for (std::size_t i = 0; i < ref.size(); ++i) CHECK(std::abs(out[i] - ref[i]) < 1e-10);
    }
}

TEST_CASE("backward contract") {
    ModelConfig cfg{1, 4};
    SegNet net(cfg);
    std::mt19937_64 rng(1);
    const ParamSet p = random_params(cfg, rng);
    CHECK_THROWS_AS(net.backward(p, std::vector<double>(64, 0.0)), StateError);
    net.forward(p, random_tensor({3, 8, 8}, rng, 0, 1));
    CHECK(net.has_cache());
    const GradientSet g = net.backward(p, std::vector<double>(64, 0.0));
    for (const auto& t : g.grads)
        for (double v : t.data) CHECK(v == 0.0);
    CHECK_THROWS_AS(net.backward(p, std::vector<double>(10, 0.0)), ParamError);
    net.clear_cache();
    CHECK_THROWS_AS(net.backward(p, std::vector<double>(64, 0.0)), StateError);
}

TEST_CASE("network parameter gradients match finite differences") {
    std::mt19937_64 rng(55);
    for (const ModelConfig cfg : {ModelConfig{1, 2}, ModelConfig{2, 2}}) {
        SegNet net(cfg);
        ParamSet p = random_params(cfg, rng);
        const Tensor img = random_tensor({3, 8, 8}, rng, 0, 1);
        BinMask y(8, 8);
        for (auto& v : y.pixels()) v = static_cast<std::uint8_t>(rng() & 1);

        const auto probs = net.forward(p, img);
        const auto g = net.backward(p, loss::bce(probs, y).grad);

        const st::NaiveNet oracle{cfg};
        std::vector<int> base_sig;
        oracle.forward(p, img, &base_sig);
        std::size_t checked = 0, skipped = 0;
        const double eps = 1e-3;
        for (std::size_t k = 0; k < p.params.size(); ++k) {
            for (std::size_t i = 0; i < p.params[k].value.size(); ++i) {
                double& w = p.params[k].value.data[i];
                const double orig = w;
                std::vector<int> sp, sm;
                w = orig + eps;
                const double lp = loss::bce(ProbMask(8, 8, oracle.forward(p, img, &sp)), y).value;
                w = orig - eps;
                const double lm = loss::bce(ProbMask(8, 8, oracle.forward(p, img, &sm)), y).value;
                w = orig;
                if (sp != base_sig || sm != base_sig) {
                    ++skipped; // perturbation crosses a ReLU or max-pool kink
                    continue;
                }
                const double fd = (lp - lm) / (2 * eps);
                INFO(p.params[k].name << "[" << i << "]");
                CHECK(st::rel_err(g.grads[k].data[i], fd, 1e-6) < 1e-3);
                ++checked;
            }
        }
        CHECK(checked > 0.8 * p.scalar_count());
        MESSAGE("depth " << cfg.depth << ": " << checked << " checked, " << skipped << " kink-skipped");
    }
}

TEST_CASE("forward and backward are thread-count independent") {
    const std::size_t saved = thread_count();
    ModelConfig cfg;
    std::mt19937_64 rng(4);
    const ParamSet p = random_params(cfg, rng);
    const Tensor img = random_tensor({3, 32, 32}, rng, 0, 1);
    auto run = [&](std::size_t threads) {
        set_thread_count(threads);
        SegNet net(cfg);
        const ProbMask out = net.forward(p, img);
        return std::make_pair(out.storage(), net.backward(p, std::vector<double>(out.size(), 0.01)).grads);
    };
    const auto a = run(1), b = run(3);
    set_thread_count(saved);
    CHECK(a.first == b.first);
    REQUIRE(a.second.size() == b.second.size());
    for (std::size_t i = 0; i < a.second.size(); ++i) CHECK(a.second[i].data == b.second[i].data);
}

TEST_CASE("adam step arithmetic") {
    ParamSet p;
    p.params.push_back({"w", Tensor({1}, 1.5), Tensor({1}), Tensor({1})});
    GradientSet zero;
    zero.grads.push_back(Tensor({1}, 0.0));
    adam_step(p, zero, 1e-4);
    CHECK(p.params[0].value.data[0] == 1.5);
    CHECK(p.params[0].m.data[0] == 0.0);
    CHECK(p.params[0].v.data[0] == 0.0);
    CHECK(p.step == 1);

    ParamSet q;
    q.params.push_back({"w", Tensor({1}, 0.0), Tensor({1}), Tensor({1})});
    GradientSet half;
    half.grads.push_back(Tensor({1}, 0.5));
    adam_step(q, half, 1e-4);
    CHECK(q.params[0].value.data[0] == doctest::Approx(-1e-4 * 0.5 / (0.5 + 1e-8)).epsilon(1e-12));
    CHECK(std::abs(q.params[0].value.data[0] + 1e-4) < 1e-11);

    GradientSet wrong;
    wrong.grads.push_back(Tensor({2}, 0.0));
    CHECK_THROWS_AS(adam_step(q, wrong, 1e-4), ParamError);
}

TEST_CASE("adam on w^2 follows the reference trajectory") {
    // independent scalar Adam
    std::vector<double> ref;
    double w = 1, m = 0, v = 0;
    for (int t = 1; t <= 100; ++t) {
        const double g = 2 * w;
        m = 0.9 * m + 0.1 * g;
        v = 0.999 * v + 0.001 * g * g;
        const double mh = m / (1 - std::pow(0.9, t)), vh = v / (1 - std::pow(0.999, t));
        w -= 0.1 * mh / (std::sqrt(vh) + 1e-8);
        ref.push_back(w);
    }
    ParamSet p;
    p.params.push_back({"w", Tensor({1}, 1.0), Tensor({1}), Tensor({1})});
    std::vector<double> got;
    for (int t = 0; t < 100; ++t) {
        GradientSet g;
        g.grads.push_back(Tensor({1}, 2 * p.params[0].value.data[0]));
        adam_step(p, g, 0.1);
        got.push_back(p.params[0].value.data[0]);
    }
    for (int t = 0; t < 100; ++t) CHECK(std::abs(got[t] - ref[t]) < 1e-12);
    CHECK(std::abs(got[99]) < 0.5);
    // strictly shrinking until the first overshoot, then a decaying oscillation
    for (int t = 1; t < 11; ++t) CHECK(std::abs(got[t]) < std::abs(got[t - 1]));
    auto peak = [&](int lo, int hi) {
        double mx = 0;
        for (int t = lo; t < hi; ++t) mx = std::max(mx, std::abs(got[t]));
        return mx;
    };
    CHECK(peak(25, 50) < peak(11, 25));
    CHECK(peak(50, 100) < peak(25, 50));
    CHECK(p.step == 100);
}

TEST_CASE("augmentation identity and flip") {
    const RgbImage img = st::noisy_image(24, 16, 40, 2);
    BinMask mask(24, 16);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 24; ++x) mask(x, y) = x < 5 && y > 3;

    AugConfig none;
    none.hflip = false;
    none.rotation_frac = none.shift_frac = none.shear_frac = none.zoom_frac = 0;
    CHECK(none.is_identity());
    Rng rng(1);
    const auto [same_img, same_mask] = augment(img, mask, none, rng);
    CHECK(same_img == img);
    CHECK(same_mask == mask);

    AffineParams flip;
    flip.flip = true;
    const auto [fi, fm] = apply_affine(img, mask, flip);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 24; ++x) {
            CHECK(fi(x, y) == img(23 - x, y));
            CHECK(fm(x, y) == mask(23 - x, y));
        }
}

TEST_CASE("sampled transforms stay within configured strengths") {
    AugConfig cfg;
    Rng rng(99);
    int flips = 0;
    for (int i = 0; i < 2000; ++i) {
        const auto t = sample_affine(cfg, 128, 96, rng);
        flips += t.flip;
        CHECK(std::abs(t.angle) <= 0.2 * M_PI);
        CHECK(std::abs(t.shift_x) <= 0.05 * 128);
        CHECK(std::abs(t.shift_y) <= 0.05 * 96);
        CHECK(std::abs(t.shear) <= 0.05);
        CHECK(t.zoom >= 0.95);
        CHECK(t.zoom <= 1.05);
    }
    CHECK(flips > 850);
    CHECK(flips < 1150);
    AugConfig bad;
    bad.rotation_frac = 1.0;
    CHECK_THROWS_AS(bad.validate(), ParamError);
}

TEST_CASE("augmentation is reproducible and keeps masks binary") {
    RgbImage marker = st::constant_image(32, 32, {20, 40, 60});
    BinMask mask(32, 32, 0);
    for (int y = 4; y < 14; ++y)
        for (int x = 6; x < 12; ++x) {
            marker(x, y) = {250, 200, 10};
            mask(x, y) = 1;
        }
    marker(28, 2) = {0, 255, 0};
    auto run = [&] {
        Rng rng(2024);
        AugConfig cfg;
        std::uint64_t h = 0;
        for (int i = 0; i < 5; ++i) {
            const auto [ai, am] = augment(marker, mask, cfg, rng);
            for (auto v : am.pixels()) CHECK((v == 0 || v == 1));
            h ^= st::fnv1a(ai.pixels().data(), ai.size() * sizeof(Rgb)) + 0x9e3779b97f4a7c15ull * (i + 1);
            h ^= st::fnv1a(am.pixels().data(), am.size()) * 31;
        }
        return h;
    };
    const std::uint64_t first = run();
    CHECK(first == run());
    MESSAGE("augmentation golden hash " << first);
    CHECK(first == kGoldenAugmentHash);
}

TEST_CASE("weights round trip through manifest and blob") {
    st::TempDir dir("weights");
    const ModelConfig cfg{2, 4};
    const ParamSet p = init_params(cfg, 31);
    save_weights(p, cfg, 31, dir / "w.json");
    const LoadedWeights back = load_weights(dir / "w.json");
    CHECK(back.seed == 31);
    CHECK(back.model.depth == 2);
    CHECK(back.model.base_channels == 4);
    REQUIRE(back.params.params.size() == p.params.size());
    for (std::size_t i = 0; i < p.params.size(); ++i) {
        CHECK(back.params.params[i].name == p.params[i].name);
        for (std::size_t j = 0; j < p.params[i].value.size(); ++j)
            CHECK(back.params.params[i].value.data[j] == static_cast<double>(static_cast<float>(p.params[i].value.data[j])));
    }
    // blob of the wrong size
    std::filesystem::resize_file(dir / "w.bin", 12);
    CHECK_THROWS_AS(load_weights(dir / "w.json"), FormatError);
    CHECK_THROWS_AS(load_weights(dir / "missing.json"), IoError);
}

}
