#include "cep/circuit.hpp"

#include <algorithm>
#include <string>

#include "cep/error.hpp"
#include "cep/kernels.hpp"
#include "cep/prob_algebra.hpp"

namespace cep::nn {

ModelHandle Circuit::bind(const MLPParams& params) {
    models_.push_back(&params);
    return ModelHandle{static_cast<std::uint32_t>(models_.size() - 1)};
}

NodeId Circuit::push(Node node, std::size_t width) {
    node.offset = static_cast<std::uint32_t>(values_.size());
    node.width = static_cast<std::uint32_t>(width);
    values_.resize(values_.size() + width, 0.0);
    nodes_.push_back(node);
    return static_cast<NodeId>(nodes_.size() - 1);
}

std::span<const double> Circuit::value(NodeId id) const {
    const Node& n = nodes_.at(id);
    return std::span<const double>(values_).subspan(n.offset, n.width);
}

std::span<double> Circuit::mutable_value(NodeId id) {
    const Node& n = nodes_[id];
    return std::span<double>(values_).subspan(n.offset, n.width);
}

double Circuit::scalar(NodeId id) const {
    auto v = value(id);
    if (v.size() != 1) throw ValidationError("node is not scalar");
    return v[0];
}

std::span<const double> Circuit::adjoint(NodeId id) const {
    const Node& n = nodes_.at(id);
    if (adjoints_.size() != values_.size()) throw ValidationError("backward has not been run");
    return std::span<const double>(adjoints_).subspan(n.offset, n.width);
}

const Dense& Circuit::layer(std::uint32_t slot) const {
    const MLPParams& p = *models_[slot / 2];
    return slot % 2 == 0 ? p.hidden : p.output;
}

NodeId Circuit::input(std::span<const double> values) {
    NodeId id = push(Node{OpKind::Input}, values.size());
    std::copy(values.begin(), values.end(), mutable_value(id).begin());
    return id;
}

NodeId Circuit::constant(double v) {
    NodeId id = push(Node{OpKind::Constant}, 1);
    values_[nodes_[id].offset] = v;
    return id;
}

NodeId Circuit::affine(NodeId x, ModelHandle model, Layer which) {
    if (model.index >= models_.size()) throw ValidationError("unbound model");
    const std::uint32_t slot = model.index * 2 + (which == Layer::Hidden ? 0 : 1);
    const Dense& d = layer(slot);
    if (nodes_.at(x).width != d.in)
        throw ValidationError("affine input width " + std::to_string(nodes_[x].width) + " != layer input " +
                              std::to_string(d.in));
    NodeId id = push(Node{OpKind::Affine, x, 0, slot}, d.out);
    kernels::active().affine(d.weight.data(), d.bias.data(), value(x).data(), mutable_value(id).data(), d.out, d.in);
    return id;
}

NodeId Circuit::relu(NodeId x) {
    NodeId id = push(Node{OpKind::Relu, x}, nodes_.at(x).width);
    auto in = value(x);
    auto out = mutable_value(id);
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
    return id;
}

NodeId Circuit::softmax(NodeId x) {
    NodeId id = push(Node{OpKind::Softmax, x}, nodes_.at(x).width);
    nn::softmax(value(x), mutable_value(id));
    return id;
}

NodeId Circuit::concat(std::span<const NodeId> parts) {
    std::size_t width = 0;
    for (NodeId p : parts) width += nodes_.at(p).width;
    Node n{OpKind::Concat};
    n.aux = static_cast<std::uint32_t>(concat_args_.size());
    n.b = static_cast<std::uint32_t>(parts.size());
    concat_args_.insert(concat_args_.end(), parts.begin(), parts.end());
    NodeId id = push(n, width);
    auto out = mutable_value(id);
    std::size_t at = 0;
    for (NodeId p : parts) {
        auto v = value(p);
        std::copy(v.begin(), v.end(), out.begin() + static_cast<std::ptrdiff_t>(at));
        at += v.size();
    }
    return id;
}

NodeId Circuit::pick(NodeId x, std::size_t index) {
    if (index >= nodes_.at(x).width) throw ValidationError("pick index out of range");
    NodeId id = push(Node{OpKind::Pick, x, 0, static_cast<std::uint32_t>(index)}, 1);
    values_[nodes_[id].offset] = value(x)[index];
    return id;
}

NodeId Circuit::add(NodeId a, NodeId b) {
    NodeId id = push(Node{OpKind::Add, a, b}, 1);
    values_[nodes_[id].offset] = scalar(a) + scalar(b);
    return id;
}

NodeId Circuit::mul(NodeId a, NodeId b) {
    NodeId id = push(Node{OpKind::Mul, a, b}, 1);
    values_[nodes_[id].offset] = scalar(a) * scalar(b);
    return id;
}

NodeId Circuit::complement(NodeId a) {
    NodeId id = push(Node{OpKind::Complement, a}, 1);
    values_[nodes_[id].offset] = 1.0 - scalar(a);
    return id;
}

NodeId Circuit::mlp(NodeId x, ModelHandle model) {
    NodeId h = relu(affine(x, model, Layer::Hidden));
    return softmax(affine(h, model, Layer::Output));
}

std::vector<MLPParams> Circuit::backward(NodeId out, double seed) {
    if (nodes_.at(out).width != 1) throw ValidationError("backward needs a scalar output");
    adjoints_.assign(values_.size(), 0.0);
    adjoints_[nodes_[out].offset] = seed;

    std::vector<MLPParams> grads;
    grads.reserve(models_.size());
    for (const MLPParams* m : models_) grads.push_back(MLPParams::zeros(m->input_dim(), m->hidden_dim(), m->num_classes()));

    const auto& k = kernels::active();
    for (std::size_t i = out + 1; i-- > 0;) {
        const Node& n = nodes_[i];
        const double* g = adjoints_.data() + n.offset;
        switch (n.op) {
            case OpKind::Input:
            case OpKind::Constant:
                break;
            case OpKind::Affine: {
                const Dense& d = layer(n.aux);
                MLPParams& gp = grads[n.aux / 2];
                Dense& gd = n.aux % 2 == 0 ? gp.hidden : gp.output;
                const double* x = values_.data() + nodes_[n.a].offset;
                k.outer_accumulate(g, x, gd.weight.data(), d.out, d.in);
                for (std::size_t r = 0; r < d.out; ++r) gd.bias[r] += g[r];
                k.affine_backward_input(d.weight.data(), g, adjoints_.data() + nodes_[n.a].offset, d.out, d.in);
                break;
            }
            case OpKind::Relu: {
                const double* x = values_.data() + nodes_[n.a].offset;
                double* gx = adjoints_.data() + nodes_[n.a].offset;
                for (std::size_t j = 0; j < n.width; ++j)
                    if (x[j] > 0.0) gx[j] += g[j];
                break;
            }
            case OpKind::Softmax: {
                const double* y = values_.data() + n.offset;
                double* gx = adjoints_.data() + nodes_[n.a].offset;
                double dot = 0.0;
                for (std::size_t j = 0; j < n.width; ++j) dot += g[j] * y[j];
                for (std::size_t j = 0; j < n.width; ++j) gx[j] += y[j] * (g[j] - dot);
                break;
            }
            case OpKind::Concat: {
                std::size_t at = 0;
                for (std::uint32_t j = 0; j < n.b; ++j) {
                    const Node& part = nodes_[concat_args_[n.aux + j]];
                    for (std::size_t e = 0; e < part.width; ++e) adjoints_[part.offset + e] += g[at + e];
                    at += part.width;
                }
                break;
            }
            case OpKind::Pick:
                adjoints_[nodes_[n.a].offset + n.aux] += g[0];
                break;
            case OpKind::Add:
                adjoints_[nodes_[n.a].offset] += g[0];
                adjoints_[nodes_[n.b].offset] += g[0];
                break;
            case OpKind::Mul: {
                const double va = values_[nodes_[n.a].offset];
                const double vb = values_[nodes_[n.b].offset];
                adjoints_[nodes_[n.a].offset] += g[0] * vb;
                adjoints_[nodes_[n.b].offset] += g[0] * va;
                break;
            }
            case OpKind::Complement:
                adjoints_[nodes_[n.a].offset] -= g[0];
                break;
        }
    }
    return grads;
}

QueryResult query_forward(const MLPParams& params, const EventStream& stream, const QuerySample& sample,
                          const RuleSet& rs) {
    const PatternRule& rule = rs.rule_for(sample.fluent, sample.kind);
    if (sample.t + 1 < rule.window)
        throw WindowError("query at t=" + std::to_string(sample.t) + " precedes a full window of " +
                          std::to_string(rule.window));
    if (sample.t >= stream.length()) throw WindowError("query beyond stream length");
    if (stream.dim() != params.input_dim()) throw ValidationError("stream dimension does not match classifier");

    QueryResult q;
    Circuit& c = q.circuit;
    q.model = c.bind(params);
    std::vector<NodeId> before;
    before.reserve(rule.window - 1);
    NodeId anchor = 0;
    for (TimePoint s = sample.t + 1 - rule.window; s <= sample.t; ++s) {
        NodeId dist = c.mlp(c.input(stream.feature(s)), q.model);
        NodeId p = c.pick(dist, rule.trigger_class);
        if (s == sample.t)
            anchor = p;
        else
            before.push_back(p);
    }
    CircuitAlgebra alg{c};
    NodeId out = pattern_fire(alg, std::span<const NodeId>(before), anchor, rule.count);
    c.set_output(out);
    q.prob = c.scalar(out);
    return q;
}

MLPParams backward(QueryResult& query, double seed) {
    return std::move(query.circuit.backward(query.circuit.output(), seed)[query.model.index]);
}

}  // namespace cep::nn
