#include "cep/mlp.hpp"

#include <algorithm>
#include <cmath>

#include "cep/error.hpp"
#include "cep/kernels.hpp"
#include "cep/rng.hpp"

namespace cep::nn {

Dense Dense::zeros(std::size_t in, std::size_t out) {
    return Dense{in, out, std::vector<double>(in * out, 0.0), std::vector<double>(out, 0.0)};
}

MLPParams MLPParams::zeros(std::size_t input_dim, std::size_t hidden_dim, std::size_t classes) {
    return MLPParams{Dense::zeros(input_dim, hidden_dim), Dense::zeros(hidden_dim, classes)};
}

MLPParams MLPParams::init(std::size_t input_dim, std::size_t hidden_dim, std::size_t classes, std::uint64_t seed) {
    MLPParams p = zeros(input_dim, hidden_dim, classes);
    Rng rng(seed);
    for (Dense* layer : {&p.hidden, &p.output}) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(layer->in));
        for (double& w : layer->weight) w = (2.0 * uniform_unit(rng) - 1.0) * bound;
        for (double& b : layer->bias) b = (2.0 * uniform_unit(rng) - 1.0) * bound;
    }
    return p;
}

std::array<std::span<double>, 4> MLPParams::tensors() {
    return {hidden.weight, hidden.bias, output.weight, output.bias};
}

std::array<std::span<const double>, 4> MLPParams::tensors() const {
    return {hidden.weight, hidden.bias, output.weight, output.bias};
}

bool MLPParams::shape_matches(const MLPParams& o) const noexcept {
    return hidden.in == o.hidden.in && hidden.out == o.hidden.out && output.in == o.output.in &&
           output.out == o.output.out;
}

bool MLPParams::all_finite() const noexcept {
    for (auto t : tensors())
        for (double v : t)
            if (!std::isfinite(v)) return false;
    return true;
}

void softmax(std::span<const double> logits, std::span<double> out) {
    const double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - mx);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
}

ClassDistribution mlp_forward(const MLPParams& params, std::span<const double> x) {
    if (x.size() != params.input_dim())
        throw ValidationError("feature dimension " + std::to_string(x.size()) + " does not match classifier input " +
                              std::to_string(params.input_dim()));
    const auto& k = kernels::active();
    std::vector<double> h(params.hidden_dim());
    k.affine(params.hidden.weight.data(), params.hidden.bias.data(), x.data(), h.data(), params.hidden.out,
             params.hidden.in);
    for (double& v : h) v = v > 0.0 ? v : 0.0;
    std::vector<double> logits(params.num_classes());
    k.affine(params.output.weight.data(), params.output.bias.data(), h.data(), logits.data(), params.output.out,
             params.output.in);
    std::vector<double> probs(logits.size());
    softmax(logits, probs);
    return ClassDistribution(std::move(probs));
}

std::vector<ClassDistribution> classify_stream(const MLPParams& params, const EventStream& stream) {
    std::vector<ClassDistribution> out;
    out.reserve(stream.length());
    for (TimePoint t = 0; t < stream.length(); ++t) out.push_back(mlp_forward(params, stream.feature(t)));
    return out;
}

}  // namespace cep::nn
