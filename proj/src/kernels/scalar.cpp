#include <cmath>

#include "cep/kernels.hpp"

namespace cep::kernels {
namespace {

void affine(const double* w, const double* b, const double* x, double* y, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = w + r * cols;
        double acc = 0.0;
        for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
        y[r] = acc + b[r];
    }
}

void affine_backward_input(const double* w, const double* gy, double* gx, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double g = gy[r];
        const double* row = w + r * cols;
        for (std::size_t c = 0; c < cols; ++c) gx[c] += row[c] * g;
    }
}

void outer_accumulate(const double* gy, const double* x, double* gw, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double g = gy[r];
        double* row = gw + r * cols;
        for (std::size_t c = 0; c < cols; ++c) row[c] += g * x[c];
    }
}

void adam_update(double* param, const double* grad, double* m, double* v, std::size_t n, const AdamCoefficients& k) {
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = k.beta1 * m[i] + (1.0 - k.beta1) * grad[i];
        v[i] = k.beta2 * v[i] + (1.0 - k.beta2) * (grad[i] * grad[i]);
        const double mhat = m[i] / k.bias_correction1;
        const double vhat = v[i] / k.bias_correction2;
        param[i] -= k.lr * mhat / (std::sqrt(vhat) + k.eps);
    }
}

}  // namespace

namespace detail {
const KernelTable scalar_table{Isa::Scalar, affine, affine_backward_input, outer_accumulate, adam_update};
}

}  // namespace cep::kernels
