#pragma once

#include "supra/simd/kernels.hpp"

namespace supra::simd::detail {

// Shared tail handler so the AVX2 remainder loop matches the scalar kernel.
void slic_assign_range_scalar(const LabRow& row, const CenterView& c, double spatial_weight, std::int32_t label,
                              double* best, std::int32_t* labels, int x0, int x1);

#if defined(SUPRA_HAVE_AVX2)
const Kernels& avx2_kernels_table() noexcept;
#endif

} // namespace supra::simd::detail
