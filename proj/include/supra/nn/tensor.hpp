#pragma once

#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "supra/error.hpp"

namespace supra::nn {

using Shape = std::vector<int>;

inline std::size_t element_count(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                           [](std::size_t acc, int d) { return acc * static_cast<std::size_t>(d); });
}

std::string to_string(const Shape& shape);

/// Dense row-major tensor of doubles. Activations are (channels, height, width);
/// conv weights are (out, in, k, k). `grad` is empty unless allocated.
struct Tensor {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;

    Tensor() = default;
    explicit Tensor(Shape s, double fill = 0.0) : shape(std::move(s)), data(element_count(shape), fill) {}
    Tensor(Shape s, std::vector<double> values) : shape(std::move(s)), data(std::move(values)) {
        if (data.size() != element_count(shape)) throw ParamError("tensor data does not match shape " + to_string(shape));
    }

    std::size_t size() const noexcept { return data.size(); }
    int dim(std::size_t i) const { return shape.at(i); }

    // (c, h, w) accessors
    int channels() const { return shape.at(0); }
    int height() const { return shape.at(1); }
    int width() const { return shape.at(2); }
    std::size_t plane() const { return static_cast<std::size_t>(height()) * static_cast<std::size_t>(width()); }
    double* channel(int c) { return data.data() + static_cast<std::size_t>(c) * plane(); }
    const double* channel(int c) const { return data.data() + static_cast<std::size_t>(c) * plane(); }

    double& at(int c, int y, int x) {
        return data[(static_cast<std::size_t>(c) * height() + y) * width() + x];
    }
    double at(int c, int y, int x) const {
        return data[(static_cast<std::size_t>(c) * height() + y) * width() + x];
    }

    void allocate_grad() { grad.assign(data.size(), 0.0); }
};

} // namespace supra::nn
