#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cep/mlp.hpp"

namespace cep::nn {

inline constexpr double kBceEpsilon = 1e-7;

struct LossValue {
    double loss;
    double dloss_dprob;
};

/// Binary cross-entropy of a query probability, clamped to [eps, 1-eps].
/// The derivative is taken at the clamped point.
LossValue bce_loss(double prob, bool label);

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// First/second moments for a flat parameter vector.
struct AdamMoments {
    std::vector<double> m;
    std::vector<double> v;
    std::uint64_t step = 0;

    explicit AdamMoments(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
    bool operator==(const AdamMoments&) const = default;
};

/// One Adam step on a flat vector. Throws NumericError (and leaves everything
/// untouched) if any gradient is non-finite.
void adam_step(std::span<double> params, std::span<const double> grads, AdamMoments& state, const AdamConfig& cfg);

/// Adam state for an MLP, one moment pair per tensor.
struct AdamState {
    std::array<AdamMoments, 4> tensors;

    static AdamState for_params(const MLPParams& p);
    bool operator==(const AdamState&) const = default;
};

/// Adam update of all four tensors. Shapes must match (ValidationError);
/// non-finite gradients refuse the step (NumericError).
void optimizer_step(MLPParams& params, const MLPParams& grads, AdamState& state, const AdamConfig& cfg);

}  // namespace cep::nn
