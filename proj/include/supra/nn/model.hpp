#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "supra/image.hpp"
#include "supra/nn/layers.hpp"
#include "supra/nn/tensor.hpp"

namespace supra::nn {

/// Reduced U-Net: `depth` pooling levels, `base_channels` feature maps at
/// every level, 3x3 convolutions with ReLU, nearest-neighbour upsampling,
/// channel-concat skips and a 1x1 sigmoid head.
struct ModelConfig {
    int depth = 2;
    int base_channels = 8;

    void validate() const;
    /// Spatial sizes must be multiples of this.
    int size_multiple() const noexcept { return 1 << depth; }
    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct Parameter {
    std::string name;
    Tensor value;
    Tensor m; ///< Adam first moment
    Tensor v; ///< Adam second moment
};

struct ParamSet {
    std::vector<Parameter> params;
    std::uint64_t step = 0;

    std::size_t scalar_count() const;
    const Parameter& find(const std::string& name) const;
};

/// One tensor per parameter, same order and shapes as the ParamSet.
struct GradientSet {
    std::vector<Tensor> grads;
};

/// Names and shapes of every parameter in canonical order.
std::vector<std::pair<std::string, Shape>> parameter_layout(const ModelConfig& cfg);

/// He-uniform weights (bound sqrt(6/fan_in)), zero biases.
ParamSet init_params(const ModelConfig& cfg, std::uint64_t seed);

/// RGB image to a (3,H,W) tensor with values in [0,1].
Tensor image_to_tensor(const RgbImage& image);

/// Forward/backward with cached activations. A SegNet holds the activations of
/// the most recent forward call; backward consumes them.
class SegNet {
public:
    explicit SegNet(ModelConfig cfg);

    const ModelConfig& config() const noexcept { return cfg_; }

    ProbMask forward(const ParamSet& params, const Tensor& image);
    /// `loss_grad` is dL/dp for every output pixel. Throws StateError when no
    /// forward activations are cached.
    GradientSet backward(const ParamSet& params, const std::vector<double>& loss_grad);

    bool has_cache() const noexcept { return cache_.has_value(); }
    void clear_cache() noexcept { cache_.reset(); }

private:
    struct BlockCache {
        Tensor input, mid, out;
    };
    struct Cache {
        Shape input_shape;
        std::vector<BlockCache> encoder;
        std::vector<PoolResult> pools;
        std::vector<Shape> pool_inputs;
        BlockCache bottleneck;
        std::vector<BlockCache> decoder; // index = level
        Tensor head_input;
        Tensor probs;
    };

    ModelConfig cfg_;
    std::optional<Cache> cache_;
};

} // namespace supra::nn
