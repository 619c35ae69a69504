#include "supra/nn/model.hpp"

#include <cmath>
#include <random>

namespace supra::nn {

namespace {

constexpr int kKernel = 3;

// Blocks in execution order: encoders 0..depth-1, bottleneck, decoders depth-1..0.
int block_count(const ModelConfig& cfg) {
    return 2 * cfg.depth + 1;
}
std::size_t block_param(int block, int conv, bool bias) {
    return static_cast<std::size_t>(4 * block + 2 * conv + (bias ? 1 : 0));
}
int encoder_block(int level) {
    return level;
}
int bottleneck_block(const ModelConfig& cfg) {
    return cfg.depth;
}
int decoder_block(const ModelConfig& cfg, int level) {
    return cfg.depth + 1 + (cfg.depth - 1 - level);
}
std::size_t head_param(const ModelConfig& cfg, bool bias) {
    return static_cast<std::size_t>(4 * block_count(cfg) + (bias ? 1 : 0));
}

} // namespace

void ModelConfig::validate() const {
    if (depth < 1 || depth > 6) throw ParamError("model: depth must lie in [1,6]");
    if (base_channels < 1 || base_channels > 256) throw ParamError("model: base_channels must lie in [1,256]");
}

std::size_t ParamSet::scalar_count() const {
    std::size_t n = 0;
    for (const auto& p : params) n += p.value.size();
    return n;
}

const Parameter& ParamSet::find(const std::string& name) const {
    for (const auto& p : params)
        if (p.name == name) return p;
    throw ParamError("no parameter named " + name);
}

std::vector<std::pair<std::string, Shape>> parameter_layout(const ModelConfig& cfg) {
    cfg.validate();
    const int c = cfg.base_channels;
    std::vector<std::pair<std::string, Shape>> layout;
    auto block = [&](const std::string& prefix, int in_channels) {
        layout.emplace_back(prefix + ".conv1.weight", Shape{c, in_channels, kKernel, kKernel});
        layout.emplace_back(prefix + ".conv1.bias", Shape{c});
        layout.emplace_back(prefix + ".conv2.weight", Shape{c, c, kKernel, kKernel});
        layout.emplace_back(prefix + ".conv2.bias", Shape{c});
    };
    for (int l = 0; l < cfg.depth; ++l) block("enc" + std::to_string(l), l == 0 ? 3 : c);
    block("mid", c);
    for (int l = cfg.depth - 1; l >= 0; --l) block("dec" + std::to_string(l), 2 * c);
    layout.emplace_back("head.weight", Shape{1, c, 1, 1});
    layout.emplace_back("head.bias", Shape{1});
    return layout;
}

ParamSet init_params(const ModelConfig& cfg, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    ParamSet set;
    for (auto& [name, shape] : parameter_layout(cfg)) {
        Parameter p{name, Tensor(shape), Tensor(shape), Tensor(shape)};
        if (shape.size() == 4) {
            const int fan_in = shape[1] * shape[2] * shape[3];
            const double bound = std::sqrt(6.0 / fan_in);
            std::uniform_real_distribution<double> dist(-bound, bound);
            for (auto& w : p.value.data) w = dist(rng);
        }
        set.params.push_back(std::move(p));
    }
    return set;
}

Tensor image_to_tensor(const RgbImage& image) {
    const int h = image.height(), w = image.width();
    Tensor t({3, h, w});
    const std::size_t plane = image.size();
    for (std::size_t i = 0; i < plane; ++i) {
        t.data[i] = image[i].r / 255.0;
        t.data[plane + i] = image[i].g / 255.0;
        t.data[2 * plane + i] = image[i].b / 255.0;
    }
    return t;
}

SegNet::SegNet(ModelConfig cfg) : cfg_(cfg) {
    cfg_.validate();
}

ProbMask SegNet::forward(const ParamSet& params, const Tensor& image) {
    if (image.shape.size() != 3 || image.channels() != 3)
        throw ParamError("forward: expected a (3,H,W) image tensor, got " + to_string(image.shape));
    const int mult = cfg_.size_multiple();
    if (image.height() % mult != 0 || image.width() % mult != 0)
        throw ParamError("forward: H and W must be divisible by " + std::to_string(mult) + ", got " +
                         to_string(image.shape));
    const auto layout = parameter_layout(cfg_);
    if (params.params.size() != layout.size()) throw ParamError("forward: parameter set does not match model config");
    for (std::size_t i = 0; i < layout.size(); ++i)
        if (params.params[i].value.shape != layout[i].second)
            throw ParamError("forward: parameter " + layout[i].first + " has shape " +
                             to_string(params.params[i].value.shape) + ", expected " + to_string(layout[i].second));

    const auto& p = params.params;
    auto run_block = [&](int block, Tensor input) {
        BlockCache bc;
        bc.mid = relu_forward(conv_forward(input, p[block_param(block, 0, false)].value, p[block_param(block, 0, true)].value));
        bc.out = relu_forward(conv_forward(bc.mid, p[block_param(block, 1, false)].value, p[block_param(block, 1, true)].value));
        bc.input = std::move(input);
        return bc;
    };

    Cache cache;
    cache.input_shape = image.shape;
    Tensor x = image;
    for (int l = 0; l < cfg_.depth; ++l) {
        cache.encoder.push_back(run_block(encoder_block(l), std::move(x)));
        cache.pool_inputs.push_back(cache.encoder.back().out.shape);
        cache.pools.push_back(maxpool_forward(cache.encoder.back().out));
        x = cache.pools.back().output;
    }
    cache.bottleneck = run_block(bottleneck_block(cfg_), std::move(x));
    cache.decoder.resize(static_cast<std::size_t>(cfg_.depth));
    const Tensor* up_src = &cache.bottleneck.out;
    for (int l = cfg_.depth - 1; l >= 0; --l) {
        Tensor cat = concat_forward(upsample_forward(*up_src), cache.encoder[static_cast<std::size_t>(l)].out);
        cache.decoder[static_cast<std::size_t>(l)] = run_block(decoder_block(cfg_, l), std::move(cat));
        up_src = &cache.decoder[static_cast<std::size_t>(l)].out;
    }
    cache.head_input = *up_src;
    cache.probs = sigmoid_forward(conv_forward(cache.head_input, p[head_param(cfg_, false)].value, p[head_param(cfg_, true)].value));

    ProbMask out(image.width(), image.height(), cache.probs.data);
    cache_ = std::move(cache);
    return out;
}

GradientSet SegNet::backward(const ParamSet& params, const std::vector<double>& loss_grad) {
    if (!cache_) throw StateError("backward called without cached forward activations");
    Cache& cache = *cache_;
    if (loss_grad.size() != cache.probs.size())
        throw ParamError("backward: loss gradient has " + std::to_string(loss_grad.size()) + " entries, expected " +
                         std::to_string(cache.probs.size()));

    const auto& p = params.params;
    GradientSet g;
    g.grads.reserve(p.size());
    for (const auto& q : p) g.grads.emplace_back(q.value.shape);

    auto back_block = [&](int block, const BlockCache& bc, const Tensor& grad_out) {
        const Tensor g2 = relu_backward(bc.out, grad_out);
        ConvGrads c2 = conv_backward(bc.mid, p[block_param(block, 1, false)].value, g2);
        g.grads[block_param(block, 1, false)] = std::move(c2.weight);
        g.grads[block_param(block, 1, true)] = std::move(c2.bias);
        const Tensor g1 = relu_backward(bc.mid, c2.input);
        ConvGrads c1 = conv_backward(bc.input, p[block_param(block, 0, false)].value, g1);
        g.grads[block_param(block, 0, false)] = std::move(c1.weight);
        g.grads[block_param(block, 0, true)] = std::move(c1.bias);
        return std::move(c1.input);
    };

    const Tensor dprobs(cache.probs.shape, loss_grad);
    const Tensor dz = sigmoid_backward(cache.probs, dprobs);
    ConvGrads head = conv_backward(cache.head_input, p[head_param(cfg_, false)].value, dz);
    g.grads[head_param(cfg_, false)] = std::move(head.weight);
    g.grads[head_param(cfg_, true)] = std::move(head.bias);

    const int c = cfg_.base_channels;
    std::vector<Tensor> skip_grads(static_cast<std::size_t>(cfg_.depth));
    Tensor grad = std::move(head.input);
    for (int l = 0; l < cfg_.depth; ++l) {
        const Tensor dcat = back_block(decoder_block(cfg_, l), cache.decoder[static_cast<std::size_t>(l)], grad);
        auto [dup, dskip] = concat_backward(dcat, c);
        skip_grads[static_cast<std::size_t>(l)] = std::move(dskip);
        grad = upsample_backward(dup);
    }
    grad = back_block(bottleneck_block(cfg_), cache.bottleneck, grad);
    for (int l = cfg_.depth - 1; l >= 0; --l) {
        const auto li = static_cast<std::size_t>(l);
        Tensor dout = maxpool_backward(cache.pool_inputs[li], cache.pools[li].argmax, grad);
        for (std::size_t i = 0; i < dout.size(); ++i) dout.data[i] += skip_grads[li].data[i];
        grad = back_block(encoder_block(l), cache.encoder[li], dout);
    }
    return g;
}

} // namespace supra::nn
