#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

// Data-parallel inner loops. Every kernel has a scalar reference version and,
// on x86-64, an AVX2 version chosen at runtime. Kernels without horizontal
// reductions (axpy, relu, relu_backward, slic_assign_row) produce bit-identical
// results across ISAs; dot reassociates its sum.

namespace supra::simd {

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa) noexcept;

/// One row of a planar Lab image.
struct LabRow {
    const double* l;
    const double* a;
    const double* b;
    double y;
};

struct CenterView {
    double l, a, b, x, y;
};

struct Kernels {
    Isa isa;

    /// y[i] += alpha * x[i]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    /// sum x[i] * y[i]
    double (*dot)(const double* x, const double* y, std::size_t n);
    /// out[i] = max(in[i], 0); in-place allowed.
    void (*relu)(const double* in, double* out, std::size_t n);
    /// grad_in[i] = activation[i] > 0 ? grad_out[i] : 0
    void (*relu_backward)(const double* activation, const double* grad_out, double* grad_in, std::size_t n);
    /// For x in [x0,x1): d = |lab - c|^2 + ((x-cx)^2 + (y-cy)^2) * spatial_weight;
    /// if d < best[x], best[x] = d and labels[x] = label.
    void (*slic_assign_row)(const LabRow& row, const CenterView& center, double spatial_weight, std::int32_t label,
                            double* best, std::int32_t* labels, int x0, int x1);
};

const Kernels& scalar_kernels() noexcept;
/// nullptr when not compiled in or not supported by the running CPU.
const Kernels* avx2_kernels() noexcept;

/// Best ISA for this CPU, unless overridden by SUPRA_SIMD=scalar|avx2.
Isa detect_isa() noexcept;

/// Kernels used by the library. Defaults to detect_isa().
const Kernels& active() noexcept;
/// Throws ParamError if the ISA is unavailable.
void select(Isa isa);

} // namespace supra::simd
