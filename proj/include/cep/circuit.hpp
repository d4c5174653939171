#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cep/core.hpp"
#include "cep/mlp.hpp"

namespace cep::nn {

using NodeId = std::uint32_t;

enum class OpKind { Input, Constant, Affine, Relu, Softmax, Concat, Pick, Add, Mul, Complement };

enum class Layer { Hidden, Output };

/// Reference to a parameter set bound into a circuit.
struct ModelHandle {
    std::uint32_t index = 0;
};

/// Differentiable computation record. Nodes are evaluated eagerly when added,
/// so the node list is always in topological order. Values may be vectors
/// (features, activations, distributions) or scalars (probabilities).
///
/// Bound parameter sets are referenced, not copied, and must outlive the circuit.
class Circuit {
public:
    ModelHandle bind(const MLPParams& params);

    NodeId input(std::span<const double> values);
    NodeId constant(double value);
    NodeId affine(NodeId x, ModelHandle model, Layer layer);
    NodeId relu(NodeId x);
    NodeId softmax(NodeId x);
    NodeId concat(std::span<const NodeId> parts);
    NodeId pick(NodeId x, std::size_t index);
    NodeId add(NodeId a, NodeId b);
    NodeId mul(NodeId a, NodeId b);
    NodeId complement(NodeId a);  // 1 - a

    /// affine -> relu -> affine -> softmax.
    NodeId mlp(NodeId x, ModelHandle model);

    std::size_t size() const noexcept { return nodes_.size(); }
    OpKind op(NodeId id) const { return nodes_[id].op; }
    std::span<const double> value(NodeId id) const;
    double scalar(NodeId id) const;

    void set_output(NodeId id) { output_ = id; }
    NodeId output() const noexcept { return output_; }

    /// Reverse sweep from `out` seeded with d(out) = seed (out must be scalar).
    /// Returns one gradient set per bound model, in bind order, shaped like
    /// the bound parameters.
    std::vector<MLPParams> backward(NodeId out, double seed);

    /// Adjoint of a node from the most recent backward().
    std::span<const double> adjoint(NodeId id) const;

private:
    struct Node {
        OpKind op;
        std::uint32_t a = 0;
        std::uint32_t b = 0;
        std::uint32_t aux = 0;     // layer slot, pick index or concat argument offset
        std::uint32_t offset = 0;  // into values_
        std::uint32_t width = 0;
    };

    NodeId push(Node node, std::size_t width);
    std::span<double> mutable_value(NodeId id);
    const Dense& layer(std::uint32_t slot) const;

    std::vector<Node> nodes_;
    std::vector<double> values_;
    std::vector<double> adjoints_;
    std::vector<NodeId> concat_args_;
    std::vector<const MLPParams*> models_;
    NodeId output_ = 0;
};

/// Adapter so the generic query formulas emit circuit nodes.
struct CircuitAlgebra {
    using Value = NodeId;
    Circuit& circuit;
    Value zero() const { return circuit.constant(0.0); }
    Value one() const { return circuit.constant(1.0); }
    Value add(Value a, Value b) const { return circuit.add(a, b); }
    Value mul(Value a, Value b) const { return circuit.mul(a, b); }
    Value complement(Value a) const { return circuit.complement(a); }
};

struct QueryResult {
    double prob = 0.0;
    Circuit circuit;
    ModelHandle model;
};

/// Query probability of a start/end sample with the classifier feeding the
/// pattern formula, plus the circuit that produced it. Only the frames inside
/// the rule window are evaluated. Throws WindowError before a full window.
QueryResult query_forward(const MLPParams& params, const EventStream& stream, const QuerySample& sample,
                          const RuleSet& rs);

/// Gradient of seed * prob with respect to the classifier parameters.
MLPParams backward(QueryResult& query, double seed);

}  // namespace cep::nn
