#pragma once

// Dense inner loops of the classifier, in a scalar reference form and in
// vectorised forms selected at runtime. All kernels work on row-major
// matrices of shape rows x cols.

#include <cstddef>
#include <string_view>

namespace cep::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa) noexcept;

struct AdamCoefficients {
    double lr;
    double beta1;
    double beta2;
    double eps;
    double bias_correction1;  // 1 - beta1^step
    double bias_correction2;  // 1 - beta2^step
};

struct KernelTable {
    Isa isa;
    // y = W x + b
    void (*affine)(const double* w, const double* b, const double* x, double* y, std::size_t rows, std::size_t cols);
    // gx += W^T gy
    void (*affine_backward_input)(const double* w, const double* gy, double* gx, std::size_t rows, std::size_t cols);
    // gw += gy x^T
    void (*outer_accumulate)(const double* gy, const double* x, double* gw, std::size_t rows, std::size_t cols);
    // Adam moment and parameter update over n entries.
    void (*adam_update)(double* param, const double* grad, double* m, double* v, std::size_t n,
                        const AdamCoefficients& c);
};

/// Whether the running CPU (and this build) can execute `isa`.
bool supported(Isa isa) noexcept;

/// Kernel table for an explicit ISA; falls back to scalar if unsupported.
const KernelTable& table(Isa isa) noexcept;

/// Best supported table, chosen once. `CEP_SIMD=scalar` in the environment
/// forces the reference kernels.
const KernelTable& active() noexcept;

namespace detail {
extern const KernelTable scalar_table;
#if defined(CEP_HAVE_AVX2)
extern const KernelTable avx2_table;
#endif
#if defined(CEP_HAVE_NEON)
extern const KernelTable neon_table;
#endif
}  // namespace detail

}  // namespace cep::kernels
