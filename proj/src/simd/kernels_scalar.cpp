#include "supra/simd/kernels.hpp"

#include "kernels_impl.hpp"

namespace supra::simd {

namespace {

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

double dot(const double* x, const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

void relu(const double* in, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
}

void relu_backward(const double* activation, const double* grad_out, double* grad_in, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) grad_in[i] = activation[i] > 0.0 ? grad_out[i] : 0.0;
}

} // namespace

namespace detail {

void slic_assign_range_scalar(const LabRow& row, const CenterView& c, double spatial_weight, std::int32_t label,
                              double* best, std::int32_t* labels, int x0, int x1) {
    const double dy = row.y - c.y;
    const double dy2 = dy * dy;
    for (int x = x0; x < x1; ++x) {
        const double dl = row.l[x] - c.l;
        const double da = row.a[x] - c.a;
        const double db = row.b[x] - c.b;
        const double dx = static_cast<double>(x) - c.x;
        double color = dl * dl + da * da;
        color = color + db * db;
        const double space = dx * dx + dy2;
        const double d = color + space * spatial_weight;
        if (d < best[x]) {
            best[x] = d;
            labels[x] = label;
        }
    }
}

} // namespace detail

const Kernels& scalar_kernels() noexcept {
    static const Kernels k{Isa::scalar, axpy, dot, relu, relu_backward, detail::slic_assign_range_scalar};
    return k;
}

} // namespace supra::simd
