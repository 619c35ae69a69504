#include "supra/simd/kernels.hpp"

#include <immintrin.h>

#include "kernels_impl.hpp"

namespace supra::simd {

namespace {

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
    }
    for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

double dot(const double* x, const double* y, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
        acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4)));
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    acc0 = _mm256_add_pd(acc0, acc1);
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc0);
    double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

void relu(const double* in, double* out, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(in + i);
        // and-mask keeps -0.0 and NaN handling identical to the scalar `v > 0 ? v : 0`
        _mm256_storeu_pd(out + i, _mm256_and_pd(v, _mm256_cmp_pd(v, zero, _CMP_GT_OQ)));
    }
    for (; i < n; ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
}

void relu_backward(const double* activation, const double* grad_out, double* grad_in, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d keep = _mm256_cmp_pd(_mm256_loadu_pd(activation + i), zero, _CMP_GT_OQ);
        _mm256_storeu_pd(grad_in + i, _mm256_and_pd(_mm256_loadu_pd(grad_out + i), keep));
    }
    for (; i < n; ++i) grad_in[i] = activation[i] > 0.0 ? grad_out[i] : 0.0;
}

void slic_assign_row(const LabRow& row, const CenterView& c, double spatial_weight, std::int32_t label, double* best,
                     std::int32_t* labels, int x0, int x1) {
    const double dy = row.y - c.y;
    const __m256d cl = _mm256_set1_pd(c.l);
    const __m256d ca = _mm256_set1_pd(c.a);
    const __m256d cb = _mm256_set1_pd(c.b);
    const __m256d cx = _mm256_set1_pd(c.x);
    const __m256d dy2 = _mm256_set1_pd(dy * dy);
    const __m256d w = _mm256_set1_pd(spatial_weight);
    const __m256d step = _mm256_set1_pd(4.0);
    const __m128i vlabel = _mm_set1_epi32(label);
    const __m256i pick_low = _mm256_setr_epi32(0, 2, 4, 6, 1, 3, 5, 7);

    int x = x0;
    __m256d xs = _mm256_setr_pd(x0, x0 + 1.0, x0 + 2.0, x0 + 3.0);
    for (; x + 4 <= x1; x += 4, xs = _mm256_add_pd(xs, step)) {
        const __m256d dl = _mm256_sub_pd(_mm256_loadu_pd(row.l + x), cl);
        const __m256d da = _mm256_sub_pd(_mm256_loadu_pd(row.a + x), ca);
        const __m256d db = _mm256_sub_pd(_mm256_loadu_pd(row.b + x), cb);
        const __m256d dx = _mm256_sub_pd(xs, cx);
        __m256d color = _mm256_add_pd(_mm256_mul_pd(dl, dl), _mm256_mul_pd(da, da));
        color = _mm256_add_pd(color, _mm256_mul_pd(db, db));
        const __m256d space = _mm256_add_pd(_mm256_mul_pd(dx, dx), dy2);
        const __m256d d = _mm256_add_pd(color, _mm256_mul_pd(space, w));

        const __m256d old = _mm256_loadu_pd(best + x);
        const __m256d better = _mm256_cmp_pd(d, old, _CMP_LT_OQ);
        if (_mm256_movemask_pd(better) == 0) continue;
        _mm256_storeu_pd(best + x, _mm256_blendv_pd(old, d, better));

        const __m128i mask32 =
            _mm256_castsi256_si128(_mm256_permutevar8x32_epi32(_mm256_castpd_si256(better), pick_low));
        auto* dst = reinterpret_cast<__m128i*>(labels + x);
        const __m128i cur = _mm_loadu_si128(dst);
        _mm_storeu_si128(dst, _mm_blendv_epi8(cur, vlabel, mask32));
    }
    detail::slic_assign_range_scalar(row, c, spatial_weight, label, best, labels, x, x1);
}

} // namespace

namespace detail {

const Kernels& avx2_kernels_table() noexcept {
    static const Kernels k{Isa::avx2, axpy, dot, relu, relu_backward, slic_assign_row};
    return k;
}

} // namespace detail

} // namespace supra::simd
