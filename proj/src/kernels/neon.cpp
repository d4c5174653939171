#include <arm_neon.h>

#include <cmath>

#include "cep/kernels.hpp"

namespace cep::kernels {
namespace {

void affine(const double* w, const double* b, const double* x, double* y, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = w + r * cols;
        float64x2_t acc0 = vdupq_n_f64(0.0);
        float64x2_t acc1 = vdupq_n_f64(0.0);
        std::size_t c = 0;
        for (; c + 4 <= cols; c += 4) {
            acc0 = vfmaq_f64(acc0, vld1q_f64(row + c), vld1q_f64(x + c));
            acc1 = vfmaq_f64(acc1, vld1q_f64(row + c + 2), vld1q_f64(x + c + 2));
        }
        double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
        for (; c < cols; ++c) acc += row[c] * x[c];
        y[r] = acc + b[r];
    }
}

void affine_backward_input(const double* w, const double* gy, double* gx, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double g = gy[r];
        const double* row = w + r * cols;
        std::size_t c = 0;
        for (; c + 2 <= cols; c += 2) vst1q_f64(gx + c, vfmaq_n_f64(vld1q_f64(gx + c), vld1q_f64(row + c), g));
        for (; c < cols; ++c) gx[c] += row[c] * g;
    }
}

void outer_accumulate(const double* gy, const double* x, double* gw, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double g = gy[r];
        double* row = gw + r * cols;
        std::size_t c = 0;
        for (; c + 2 <= cols; c += 2) vst1q_f64(row + c, vfmaq_n_f64(vld1q_f64(row + c), vld1q_f64(x + c), g));
        for (; c < cols; ++c) row[c] += g * x[c];
    }
}

void adam_update(double* param, const double* grad, double* m, double* v, std::size_t n, const AdamCoefficients& k) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t g = vld1q_f64(grad + i);
        float64x2_t mi = vaddq_f64(vmulq_n_f64(vld1q_f64(m + i), k.beta1), vmulq_n_f64(g, 1.0 - k.beta1));
        float64x2_t vi = vaddq_f64(vmulq_n_f64(vld1q_f64(v + i), k.beta2), vmulq_n_f64(vmulq_f64(g, g), 1.0 - k.beta2));
        vst1q_f64(m + i, mi);
        vst1q_f64(v + i, vi);
        const float64x2_t mhat = vdivq_f64(mi, vdupq_n_f64(k.bias_correction1));
        const float64x2_t vhat = vdivq_f64(vi, vdupq_n_f64(k.bias_correction2));
        const float64x2_t step = vdivq_f64(vmulq_n_f64(mhat, k.lr), vaddq_f64(vsqrtq_f64(vhat), vdupq_n_f64(k.eps)));
        vst1q_f64(param + i, vsubq_f64(vld1q_f64(param + i), step));
    }
    for (; i < n; ++i) {
        m[i] = k.beta1 * m[i] + (1.0 - k.beta1) * grad[i];
        v[i] = k.beta2 * v[i] + (1.0 - k.beta2) * (grad[i] * grad[i]);
        param[i] -= k.lr * (m[i] / k.bias_correction1) / (std::sqrt(v[i] / k.bias_correction2) + k.eps);
    }
}

}  // namespace

namespace detail {
const KernelTable neon_table{Isa::Neon, affine, affine_backward_input, outer_accumulate, adam_update};
}

}  // namespace cep::kernels
