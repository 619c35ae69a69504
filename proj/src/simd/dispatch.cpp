#include <atomic>
#include <cstdlib>
#include <string>

#include "kernels_impl.hpp"
#include "supra/error.hpp"
#include "supra/simd/kernels.hpp"

namespace supra::simd {

namespace {

bool cpu_has_avx2() noexcept {
#if defined(SUPRA_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

const Kernels* table_for(Isa isa) noexcept {
    return isa == Isa::avx2 ? avx2_kernels() : &scalar_kernels();
}

std::atomic<const Kernels*>& current() noexcept {
    static std::atomic<const Kernels*> k{table_for(detect_isa())};
    return k;
}

} // namespace

std::string_view to_string(Isa isa) noexcept {
    return isa == Isa::avx2 ? "avx2" : "scalar";
}

const Kernels* avx2_kernels() noexcept {
#if defined(SUPRA_HAVE_AVX2)
    if (cpu_has_avx2()) return &detail::avx2_kernels_table();
#endif
    return nullptr;
}

Isa detect_isa() noexcept {
    if (const char* env = std::getenv("SUPRA_SIMD")) {
        const std::string_view v(env);
        if (v == "scalar") return Isa::scalar;
        if (v == "avx2" && avx2_kernels()) return Isa::avx2;
    }
    return avx2_kernels() ? Isa::avx2 : Isa::scalar;
}

const Kernels& active() noexcept {
    return *current().load(std::memory_order_acquire);
}

void select(Isa isa) {
    const Kernels* k = table_for(isa);
    if (!k) throw ParamError("SIMD variant " + std::string(to_string(isa)) + " is not available on this CPU");
    current().store(k, std::memory_order_release);
}

} // namespace supra::simd
