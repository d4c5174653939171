#include <cstdlib>
#include <string_view>

#include "cep/kernels.hpp"

namespace cep::kernels {

std::string_view to_string(Isa isa) noexcept {
    switch (isa) {
        case Isa::Avx2: return "avx2";
        case Isa::Neon: return "neon";
        default: return "scalar";
    }
}

bool supported(Isa isa) noexcept {
    switch (isa) {
        case Isa::Scalar: return true;
        case Isa::Avx2:
#if defined(CEP_HAVE_AVX2)
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
        case Isa::Neon:
#if defined(CEP_HAVE_NEON)
            return true;
#else
            return false;
#endif
    }
    return false;
}

const KernelTable& table(Isa isa) noexcept {
#if defined(CEP_HAVE_AVX2)
    if (isa == Isa::Avx2 && supported(isa)) return detail::avx2_table;
#endif
#if defined(CEP_HAVE_NEON)
    if (isa == Isa::Neon) return detail::neon_table;
#endif
    (void)isa;
    return detail::scalar_table;
}

const KernelTable& active() noexcept {
    static const KernelTable& chosen = [] () -> const KernelTable& {
        if (const char* env = std::getenv("CEP_SIMD"); env && std::string_view(env) == "scalar")
            return detail::scalar_table;
        if (supported(Isa::Avx2)) return table(Isa::Avx2);
        if (supported(Isa::Neon)) return table(Isa::Neon);
        return detail::scalar_table;
    }();
    return chosen;
}

}  // namespace cep::kernels
