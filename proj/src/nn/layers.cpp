#include "supra/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "supra/parallel.hpp"
#include "supra/simd/kernels.hpp"

namespace supra::nn {

std::string to_string(const Shape& shape) {
    std::string s = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + ")";
}

namespace {

void require_rank(const Tensor& t, std::size_t rank, const char* what) {
    if (t.shape.size() != rank) throw ParamError(std::string(what) + ": expected rank " + std::to_string(rank) +
                                                 " tensor, got " + to_string(t.shape));
}

// Valid output range along one axis for tap offset d: o in [lo, hi) with 0 <= o + d < n.
struct Span {
    int lo, hi;
};
Span tap_span(int n, int d) {
    return {std::max(0, -d), std::min(n, n - d)};
}

void check_conv(const Tensor& input, const Tensor& weight) {
    require_rank(input, 3, "conv");
    require_rank(weight, 4, "conv");
    if (weight.dim(1) != input.channels())
        throw ParamError("conv: weight " + to_string(weight.shape) + " does not accept input " + to_string(input.shape));
    if (weight.dim(2) != weight.dim(3) || weight.dim(2) % 2 == 0)
        throw ParamError("conv: kernel must be square and odd, got " + to_string(weight.shape));
}

} // namespace

Tensor conv_forward(const Tensor& input, const Tensor& weight, const Tensor& bias) {
    check_conv(input, weight);
    const int oc_n = weight.dim(0), ic_n = weight.dim(1), k = weight.dim(2), pad = k / 2;
    if (bias.size() != static_cast<std::size_t>(oc_n)) throw ParamError("conv: bias does not match out channels");
    const int h = input.height(), w = input.width();
    Tensor out({oc_n, h, w});
    const auto& kern = simd::active();

    parallel_for(0, static_cast<std::size_t>(oc_n), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t oc = lo; oc < hi; ++oc) {
            double* dst = out.channel(static_cast<int>(oc));
            std::fill(dst, dst + out.plane(), bias.data[oc]);
            for (int ic = 0; ic < ic_n; ++ic) {
                const double* src = input.channel(ic);
                for (int ky = 0; ky < k; ++ky) {
                    const Span ys = tap_span(h, ky - pad);
                    for (int kx = 0; kx < k; ++kx) {
                        const Span xs = tap_span(w, kx - pad);
                        const double wv = weight.data[((oc * ic_n + ic) * k + ky) * k + kx];
                        if (xs.lo >= xs.hi) continue;
                        const std::size_t len = static_cast<std::size_t>(xs.hi - xs.lo);
                        for (int y = ys.lo; y < ys.hi; ++y) {
                            const double* s = src + static_cast<std::size_t>(y + ky - pad) * w + xs.lo + (kx - pad);
                            kern.axpy(wv, s, dst + static_cast<std::size_t>(y) * w + xs.lo, len);
                        }
                    }
                }
            }
        }
    });
    return out;
}

ConvGrads conv_backward(const Tensor& input, const Tensor& weight, const Tensor& grad_out) {
    check_conv(input, weight);
    const int oc_n = weight.dim(0), ic_n = weight.dim(1), k = weight.dim(2), pad = k / 2;
    const int h = input.height(), w = input.width();
    if (grad_out.shape != Shape{oc_n, h, w}) throw ParamError("conv_backward: gradient shape mismatch");
    const auto& kern = simd::active();

    ConvGrads g{Tensor(input.shape), Tensor(weight.shape), Tensor({oc_n})};

    parallel_for(0, static_cast<std::size_t>(oc_n), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t oc = lo; oc < hi; ++oc) {
            const double* go = grad_out.channel(static_cast<int>(oc));
            double bsum = 0.0;
            for (std::size_t i = 0; i < grad_out.plane(); ++i) bsum += go[i];
            g.bias.data[oc] = bsum;
            for (int ic = 0; ic < ic_n; ++ic) {
                const double* src = input.channel(ic);
                for (int ky = 0; ky < k; ++ky) {
                    const Span ys = tap_span(h, ky - pad);
                    for (int kx = 0; kx < k; ++kx) {
                        const Span xs = tap_span(w, kx - pad);
                        double acc = 0.0;
                        if (xs.lo < xs.hi) {
                            const std::size_t len = static_cast<std::size_t>(xs.hi - xs.lo);
                            for (int y = ys.lo; y < ys.hi; ++y) {
                                const double* s = src + static_cast<std::size_t>(y + ky - pad) * w + xs.lo + (kx - pad);
                                acc += kern.dot(go + static_cast<std::size_t>(y) * w + xs.lo, s, len);
                            }
                        }
                        g.weight.data[((oc * ic_n + ic) * k + ky) * k + kx] = acc;
                    }
                }
            }
        }
    });

    parallel_for(0, static_cast<std::size_t>(ic_n), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t ic = lo; ic < hi; ++ic) {
            double* gi = g.input.channel(static_cast<int>(ic));
            for (int oc = 0; oc < oc_n; ++oc) {
                const double* go = grad_out.channel(oc);
                for (int ky = 0; ky < k; ++ky) {
                    const Span ys = tap_span(h, ky - pad);
                    for (int kx = 0; kx < k; ++kx) {
                        const Span xs = tap_span(w, kx - pad);
                        if (xs.lo >= xs.hi) continue;
                        const double wv = weight.data[((oc * ic_n + static_cast<int>(ic)) * k + ky) * k + kx];
                        const std::size_t len = static_cast<std::size_t>(xs.hi - xs.lo);
                        for (int y = ys.lo; y < ys.hi; ++y) {
                            double* d = gi + static_cast<std::size_t>(y + ky - pad) * w + xs.lo + (kx - pad);
                            kern.axpy(wv, go + static_cast<std::size_t>(y) * w + xs.lo, d, len);
                        }
                    }
                }
            }
        }
    });
    return g;
}

Tensor relu_forward(const Tensor& input) {
    Tensor out(input.shape);
    simd::active().relu(input.data.data(), out.data.data(), input.size());
    return out;
}

Tensor relu_backward(const Tensor& output, const Tensor& grad_out) {
    if (output.shape != grad_out.shape) throw ParamError("relu_backward: shape mismatch");
    Tensor g(output.shape);
    simd::active().relu_backward(output.data.data(), grad_out.data.data(), g.data.data(), output.size());
    return g;
}

PoolResult maxpool_forward(const Tensor& input) {
    require_rank(input, 3, "maxpool");
    const int c_n = input.channels(), h = input.height() / 2, w = input.width() / 2;
    PoolResult r{Tensor({c_n, h, w}), std::vector<std::uint32_t>(static_cast<std::size_t>(c_n) * h * w)};
    std::size_t o = 0;
    for (int c = 0; c < c_n; ++c) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x, ++o) {
                std::uint32_t best_idx = 0;
                double best = -std::numeric_limits<double>::infinity();
                for (int dy = 0; dy < 2; ++dy) {
                    for (int dx = 0; dx < 2; ++dx) {
                        const auto idx = static_cast<std::uint32_t>(
                            (static_cast<std::size_t>(c) * input.height() + 2 * y + dy) * input.width() + 2 * x + dx);
                        if (input.data[idx] > best) {
                            best = input.data[idx];
                            best_idx = idx;
                        }
                    }
                }
                r.output.data[o] = best;
                r.argmax[o] = best_idx;
            }
        }
    }
    return r;
}

Tensor maxpool_backward(const Shape& input_shape, const std::vector<std::uint32_t>& argmax, const Tensor& grad_out) {
    if (argmax.size() != grad_out.size()) throw ParamError("maxpool_backward: argmax does not match gradient");
    Tensor g(input_shape);
    for (std::size_t o = 0; o < argmax.size(); ++o) g.data[argmax[o]] += grad_out.data[o];
    return g;
}

Tensor upsample_forward(const Tensor& input) {
    require_rank(input, 3, "upsample");
    const int c_n = input.channels(), h = input.height(), w = input.width();
    Tensor out({c_n, 2 * h, 2 * w});
    for (int c = 0; c < c_n; ++c)
        for (int y = 0; y < 2 * h; ++y)
            for (int x = 0; x < 2 * w; ++x) out.at(c, y, x) = input.at(c, y / 2, x / 2);
    return out;
}

Tensor upsample_backward(const Tensor& grad_out) {
    require_rank(grad_out, 3, "upsample_backward");
    const int c_n = grad_out.channels(), h = grad_out.height() / 2, w = grad_out.width() / 2;
    Tensor g({c_n, h, w});
    for (int c = 0; c < c_n; ++c)
        for (int y = 0; y < 2 * h; ++y)
            for (int x = 0; x < 2 * w; ++x) g.at(c, y / 2, x / 2) += grad_out.at(c, y, x);
    return g;
}

Tensor concat_forward(const Tensor& a, const Tensor& b) {
    require_rank(a, 3, "concat");
    require_rank(b, 3, "concat");
    if (a.height() != b.height() || a.width() != b.width())
        throw ParamError("concat: spatial mismatch " + to_string(a.shape) + " vs " + to_string(b.shape));
    Tensor out({a.channels() + b.channels(), a.height(), a.width()});
    std::copy(a.data.begin(), a.data.end(), out.data.begin());
    std::copy(b.data.begin(), b.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(a.size()));
    return out;
}

std::pair<Tensor, Tensor> concat_backward(const Tensor& grad_out, int a_channels) {
    require_rank(grad_out, 3, "concat_backward");
    const int h = grad_out.height(), w = grad_out.width();
    Tensor ga({a_channels, h, w}), gb({grad_out.channels() - a_channels, h, w});
    std::copy(grad_out.data.begin(), grad_out.data.begin() + static_cast<std::ptrdiff_t>(ga.size()), ga.data.begin());
    std::copy(grad_out.data.begin() + static_cast<std::ptrdiff_t>(ga.size()), grad_out.data.end(), gb.data.begin());
    return {std::move(ga), std::move(gb)};
}

Tensor sigmoid_forward(const Tensor& input) {
    // Clamped so outputs stay inside the open interval (0,1).
    constexpr double lo = std::numeric_limits<double>::min();
    constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2;
    Tensor out(input.shape);
    for (std::size_t i = 0; i < input.size(); ++i) {
        const double z = input.data[i];
        const double p = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
        out.data[i] = std::clamp(p, lo, hi);
    }
    return out;
}

Tensor sigmoid_backward(const Tensor& output, const Tensor& grad_out) {
    if (output.shape != grad_out.shape) throw ParamError("sigmoid_backward: shape mismatch");
    Tensor g(output.shape);
    for (std::size_t i = 0; i < output.size(); ++i) {
        const double p = output.data[i];
        g.data[i] = grad_out.data[i] * p * (1.0 - p);
    }
    return g;
}

} // namespace supra::nn
