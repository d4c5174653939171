#pragma once

// Model checkpoints are JSON documents:
//
//   {
//     "format": "cep-checkpoint", "version": 1,
//     "kind": "hybrid" | "purenn",
//     "seed": <uint>, "window": <uint, purenn only>,
//     "models": {
//       "classifier": <mlp>,
//       "head": <mlp, purenn only>
//     }
//   }
//
// where <mlp> is {"input_dim", "hidden_dim", "output_dim",
// "hidden": {"weight": [...], "bias": [...]}, "output": {...}} with weights
// row-major (out x in). Numbers are written in shortest round-trip form, so
// save followed by load reproduces every parameter bit for bit.

#include <cstdint>
#include <optional>
#include <string>

#include "cep/mlp.hpp"

namespace cep {

struct Checkpoint {
    std::string kind = "hybrid";
    std::uint64_t seed = 0;
    nn::MLPParams classifier;
    std::optional<nn::MLPParams> head;  // purenn only
    std::size_t window = 0;             // purenn only

    bool operator==(const Checkpoint&) const = default;
};

std::string checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const std::string& text);

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace cep
