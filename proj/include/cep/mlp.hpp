#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cep/core.hpp"

namespace cep::nn {

/// Fully connected layer, weight stored row-major as out x in.
struct Dense {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<double> weight;
    std::vector<double> bias;

    static Dense zeros(std::size_t in, std::size_t out);

    bool operator==(const Dense&) const = default;
};

/// in -> hidden (ReLU) -> classes (softmax).
struct MLPParams {
    Dense hidden;
    Dense output;

    static MLPParams zeros(std::size_t input_dim, std::size_t hidden_dim, std::size_t classes);

    /// Weights and biases drawn from uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)).
    static MLPParams init(std::size_t input_dim, std::size_t hidden_dim, std::size_t classes, std::uint64_t seed);

    std::size_t input_dim() const noexcept { return hidden.in; }
    std::size_t hidden_dim() const noexcept { return hidden.out; }
    std::size_t num_classes() const noexcept { return output.out; }

    /// hidden.weight, hidden.bias, output.weight, output.bias.
    std::array<std::span<double>, 4> tensors();
    std::array<std::span<const double>, 4> tensors() const;

    bool shape_matches(const MLPParams& other) const noexcept;
    bool all_finite() const noexcept;

    bool operator==(const MLPParams&) const = default;
};

/// Numerically stable softmax (max-shifted), written into `out`.
void softmax(std::span<const double> logits, std::span<double> out);

/// Class distribution for one feature vector. Throws ValidationError on a
/// dimension mismatch.
ClassDistribution mlp_forward(const MLPParams& params, std::span<const double> x);

/// mlp_forward at every step of the stream.
std::vector<ClassDistribution> classify_stream(const MLPParams& params, const EventStream& stream);

}  // namespace cep::nn
