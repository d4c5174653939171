#include "cep/purenn.hpp"

#include <cmath>

#include "cep/error.hpp"
#include "cep/optimizer.hpp"
#include "cep/rng.hpp"

namespace cep::purenn {

PureNNParams initial_params(std::size_t dim, std::size_t classes, std::size_t fluents, std::size_t window,
                            const train::TrainConfig& cfg) {
    return PureNNParams{
        train::initial_classifier(dim, classes, cfg),
        nn::MLPParams::init(window * classes, cfg.hidden, 2 * fluents + 1, sub_seed(cfg.seed, "init-head")),
        window};
}

PureQuery purenn_circuit(const PureNNParams& params, const EventStream& stream, TimePoint t) {
    const std::size_t w = params.window;
    if (t + 1 < w)
        throw WindowError("query at t=" + std::to_string(t) + " precedes a full window of " + std::to_string(w));
    if (t >= stream.length()) throw WindowError("query beyond stream length");
    if (params.head.input_dim() != w * params.frame.num_classes())
        throw ValidationError("head input must equal window x classes");

    PureQuery q;
    auto& c = q.circuit;
    q.frame = c.bind(params.frame);
    q.head = c.bind(params.head);
    std::vector<nn::NodeId> frames;
    for (TimePoint s = t + 1 - w; s <= t; ++s) frames.push_back(c.mlp(c.input(stream.feature(s)), q.frame));
    q.output = c.mlp(c.concat(frames), q.head);
    return q;
}

std::vector<double> purenn_forward(const PureNNParams& params, const EventStream& stream, TimePoint t, std::size_t w) {
    if (w != params.window) throw ValidationError("window differs from the head's window");
    auto q = purenn_circuit(params, stream, t);
    auto v = q.circuit.value(q.output);
    return {v.begin(), v.end()};
}

PureNNModel train_purenn(const EventStream& stream, const RuleSet& rules, const train::TrainConfig& cfg) {
    cfg.validate();
    const RuleSet rs = cfg.apply_window(rules);
    const EventStream data = stream.without_ground_truth();
    const std::size_t w = rs.max_window();
    const std::size_t f = rs.num_fluents();

    PureNNModel model{initial_params(data.dim(), rs.num_classes(), f, w, cfg), {}};
    auto frame_state = nn::AdamState::for_params(model.params.frame);
    auto head_state = nn::AdamState::for_params(model.params.head);
    const nn::AdamConfig opt{cfg.lr};

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto samples = train::build_training_points(data, rs, cfg, epoch);
        for (const auto& s : samples) {
            if (s.t + 1 < w) continue;  // rules with shorter windows than the head
            auto q = purenn_circuit(model.params, data, s.t);
            auto node = q.circuit.pick(q.output, train::query_index(s.kind, s.fluent, f));
            const auto loss = nn::bce_loss(q.circuit.scalar(node), s.label);
            if (!std::isfinite(loss.loss))
                throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", step " +
                                   std::to_string(model.log.losses.size()));
            model.log.losses.push_back(loss.loss);
            auto grads = q.circuit.backward(node, loss.dloss_dprob);
            // Both updates are validated before either is applied.
            for (const auto* g : {&grads[q.frame.index], &grads[q.head.index]})
                if (!g->all_finite()) throw NumericError("non-finite gradient, step refused");
            nn::optimizer_step(model.params.frame, grads[q.frame.index], frame_state, opt);
            nn::optimizer_step(model.params.head, grads[q.head.index], head_state, opt);
        }
    }
    return model;
}

train::QueryScorer purenn_scorer(const PureNNParams& params, const EventStream& stream) {
    return [&params, &stream](TimePoint t) {
        auto dist = purenn_forward(params, stream, t, params.window);
        dist.pop_back();
        return dist;
    };
}

}  // namespace cep::purenn
