// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include <cmath>

#include "cep/kernels.hpp"

namespace cep::kernels {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

void affine(const double* w, const double* b, const double* x, double* y, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = w + r * cols;
        __m256d acc0 = _mm256_setzero_pd();
        __m256d acc1 = _mm256_setzero_pd();
        std::size_t c = 0;
        for (; c + 8 <= cols; c += 8) {
            acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(row + c), _mm256_loadu_pd(x + c), acc0);
            acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(row + c + 4), _mm256_loadu_pd(x + c + 4), acc1);
        }
        for (; c + 4 <= cols; c += 4)
            acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(row + c), _mm256_loadu_pd(x + c), acc0);
        double acc = hsum(_mm256_add_pd(acc0, acc1));
        for (; c < cols; ++c) acc += row[c] * x[c];
        y[r] = acc + b[r];
    }
}

void affine_backward_input(const double* w, const double* gy, double* gx, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double g = gy[r];
        const __m256d vg = _mm256_set1_pd(g);
        const double* row = w + r * cols;
        std::size_t c = 0;
        for (; c + 4 <= cols; c += 4)
            _mm256_storeu_pd(gx + c, _mm256_fmadd_pd(_mm256_loadu_pd(row + c), vg, _mm256_loadu_pd(gx + c)));
        for (; c < cols; ++c) gx[c] += row[c] * g;
    }
}

void outer_accumulate(const double* gy, const double* x, double* gw, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double g = gy[r];
        const __m256d vg = _mm256_set1_pd(g);
        double* row = gw + r * cols;
        std::size_t c = 0;
        for (; c + 4 <= cols; c += 4)
            _mm256_storeu_pd(row + c, _mm256_fmadd_pd(vg, _mm256_loadu_pd(x + c), _mm256_loadu_pd(row + c)));
        for (; c < cols; ++c) row[c] += g * x[c];
    }
}

// No FMA here: keeps the update bit-identical to the scalar kernel.
void adam_update(double* param, const double* grad, double* m, double* v, std::size_t n, const AdamCoefficients& k) {
    const __m256d b1 = _mm256_set1_pd(k.beta1);
    const __m256d b2 = _mm256_set1_pd(k.beta2);
    const __m256d one_b1 = _mm256_set1_pd(1.0 - k.beta1);
    const __m256d one_b2 = _mm256_set1_pd(1.0 - k.beta2);
    const __m256d bc1 = _mm256_set1_pd(k.bias_correction1);
    const __m256d bc2 = _mm256_set1_pd(k.bias_correction2);
    const __m256d lr = _mm256_set1_pd(k.lr);
    const __m256d eps = _mm256_set1_pd(k.eps);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d g = _mm256_loadu_pd(grad + i);
        __m256d mi = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(one_b1, g));
        __m256d vi = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)),
                                   _mm256_mul_pd(one_b2, _mm256_mul_pd(g, g)));
        _mm256_storeu_pd(m + i, mi);
        _mm256_storeu_pd(v + i, vi);
        const __m256d mhat = _mm256_div_pd(mi, bc1);
        const __m256d vhat = _mm256_div_pd(vi, bc2);
        const __m256d step = _mm256_div_pd(_mm256_mul_pd(lr, mhat), _mm256_add_pd(_mm256_sqrt_pd(vhat), eps));
        _mm256_storeu_pd(param + i, _mm256_sub_pd(_mm256_loadu_pd(param + i), step));
    }
    for (; i < n; ++i) {
        m[i] = k.beta1 * m[i] + (1.0 - k.beta1) * grad[i];
        v[i] = k.beta2 * v[i] + (1.0 - k.beta2) * (grad[i] * grad[i]);
        const double mhat = m[i] / k.bias_correction1;
        const double vhat = v[i] / k.bias_correction2;
        param[i] -= k.lr * mhat / (std::sqrt(vhat) + k.eps);
    }
}

}  // namespace

namespace detail {
const KernelTable avx2_table{Isa::Avx2, affine, affine_backward_input, outer_accumulate, adam_update};
}

}  // namespace cep::kernels
