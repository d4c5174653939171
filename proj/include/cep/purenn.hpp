#pragma once

#include <cstdint>
#include <vector>

#include "cep/circuit.hpp"
#include "cep/core.hpp"
#include "cep/mlp.hpp"
#include "cep/training.hpp"

namespace cep::purenn {

/// Frame classifier (D -> H -> C) whose softmax outputs over a window are
/// concatenated into a head (w*C -> H2 -> 2F+1). Head classes are start(f0..),
/// end(f0..), none.
struct PureNNParams {
    nn::MLPParams frame;
    nn::MLPParams head;
    std::size_t window = 2;

    std::size_t num_fluents() const noexcept { return (head.num_classes() - 1) / 2; }
    bool operator==(const PureNNParams&) const = default;
};

/// Frame classifier initialised exactly as the hybrid one (same config seed),
/// head from its own sub-seed.
PureNNParams initial_params(std::size_t dim, std::size_t classes, std::size_t fluents, std::size_t window,
                            const train::TrainConfig& cfg);

inline std::size_t none_class(std::size_t fluents) { return 2 * fluents; }

struct PureQuery {
    nn::Circuit circuit;
    nn::NodeId output = 0;  // head distribution
    nn::ModelHandle frame;
    nn::ModelHandle head;
};

/// Circuit of the head distribution at t. Throws WindowError if t < w-1.
PureQuery purenn_circuit(const PureNNParams& params, const EventStream& stream, TimePoint t);

/// Distribution over the 2F+1 pattern classes at t.
std::vector<double> purenn_forward(const PureNNParams& params, const EventStream& stream, TimePoint t, std::size_t w);

struct PureNNModel {
    PureNNParams params;
    train::TrainingLog log;
};

/// Same samples, loss and optimiser as the hybrid: each (kind, fluent, t,
/// label) sample is scored by the head probability of that pattern class.
/// Frame labels are never read.
PureNNModel train_purenn(const EventStream& stream, const RuleSet& rs, const train::TrainConfig& cfg);

/// Head probabilities of the 2F transition classes (the "none" output is left out).
train::QueryScorer purenn_scorer(const PureNNParams& params, const EventStream& stream);

}  // namespace cep::purenn
