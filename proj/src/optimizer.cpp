#include "cep/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "cep/error.hpp"
#include "cep/kernels.hpp"

namespace cep::nn {

LossValue bce_loss(double prob, bool label) {
    const double p = std::clamp(prob, kBceEpsilon, 1.0 - kBceEpsilon);
    if (label) return {-std::log(p), -1.0 / p};
    return {-std::log(1.0 - p), 1.0 / (1.0 - p)};
}

namespace {

bool finite(std::span<const double> xs) {
    return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

void apply(std::span<double> params, std::span<const double> grads, AdamMoments& state, const AdamConfig& cfg) {
    ++state.step;
    const double s = static_cast<double>(state.step);
    kernels::AdamCoefficients k{cfg.lr, cfg.beta1, cfg.beta2, cfg.eps, 1.0 - std::pow(cfg.beta1, s),
                                1.0 - std::pow(cfg.beta2, s)};
    kernels::active().adam_update(params.data(), grads.data(), state.m.data(), state.v.data(), params.size(), k);
}

}  // namespace

void adam_step(std::span<double> params, std::span<const double> grads, AdamMoments& state, const AdamConfig& cfg) {
    if (params.size() != grads.size() || state.m.size() != params.size() || state.v.size() != params.size())
        throw ValidationError("adam: shape mismatch");
    if (!finite(grads)) throw NumericError("adam: non-finite gradient, step refused");
    apply(params, grads, state, cfg);
}

AdamState AdamState::for_params(const MLPParams& p) {
    AdamState s;
    auto t = p.tensors();
    for (std::size_t i = 0; i < t.size(); ++i) s.tensors[i] = AdamMoments(t[i].size());
    return s;
}

void optimizer_step(MLPParams& params, const MLPParams& grads, AdamState& state, const AdamConfig& cfg) {
    if (!params.shape_matches(grads)) throw ValidationError("optimizer: gradient shape mismatch");
    auto pt = params.tensors();
    auto gt = grads.tensors();
    for (std::size_t i = 0; i < pt.size(); ++i) {
        if (state.tensors[i].m.size() != pt[i].size()) throw ValidationError("optimizer: state shape mismatch");
        if (!finite(gt[i])) throw NumericError("optimizer: non-finite gradient, step refused");
    }
    for (std::size_t i = 0; i < pt.size(); ++i) apply(pt[i], gt[i], state.tensors[i], cfg);
}

}  // namespace cep::nn
