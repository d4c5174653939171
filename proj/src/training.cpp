#include "cep/training.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <memory>

#include "cep/circuit.hpp"
#include "cep/error.hpp"
#include "cep/inference.hpp"
#include "cep/optimizer.hpp"
#include "cep/rng.hpp"

namespace cep::train {

void TrainConfig::validate() const {
    if (points_per_epoch == 0) throw ValidationError("points per epoch must be positive");
    if (!(ratio > 0.0) || !std::isfinite(ratio)) throw ValidationError("sampling ratio must be positive");
    if (!(lr > 0.0) || !std::isfinite(lr)) throw ValidationError("learning rate must be positive");
    if (hidden == 0) throw ValidationError("hidden width must be positive");
    if (window == 1) throw ValidationError("window must be at least 2");
    if (!std::isfinite(threshold)) throw ValidationError("threshold must be finite");
}

RuleSet TrainConfig::apply_window(const RuleSet& rs) const {
    RuleSet out = window ? rs.with_window(window) : rs;
    require_valid(out);
    return out;
}

std::vector<QuerySample> build_training_points(const EventStream& stream, const RuleSet& rs, std::size_t budget,
                                               double ratio, std::uint64_t seed) {
    const auto& events = stream.events();
    std::vector<QuerySample> positives;
    for (TimePoint t = 0; t < events.size(); ++t)
        for (const auto& e : events[t]) positives.push_back({e.kind, e.fluent, t, true});

    Rng rng(seed);
    const auto pos_cap = static_cast<std::size_t>(std::floor(static_cast<double>(budget) / (1.0 + ratio)));
    if (positives.size() > pos_cap) {
        seeded_shuffle(positives.begin(), positives.end(), rng);
        positives.resize(pos_cap);
    }

    std::size_t n_neg = budget;
    if (!positives.empty()) {
        const auto wanted = static_cast<std::size_t>(std::llround(static_cast<double>(positives.size()) * ratio));
        n_neg = std::min(wanted, budget - positives.size());
    }

    // Candidate negatives: any (rule, t) with a full window that does not fire.
    std::vector<QuerySample> samples = positives;
    const std::size_t n = stream.length();
    std::size_t candidates = 0;
    for (const auto& r : rs.rules)
        if (n + 1 > r.window)
            for (TimePoint t = r.window - 1; t < n; ++t)
                if (std::find(events[t].begin(), events[t].end(), EventLabel{r.polarity, r.fluent}) == events[t].end())
                    ++candidates;
    if (candidates > 0) {
        for (std::size_t i = 0; i < n_neg; ++i) {
            while (true) {
                const PatternRule& r = rs.rules[uniform_index(rng, rs.rules.size())];
                if (n < r.window) continue;
                const TimePoint t = r.window - 1 + uniform_index(rng, n - r.window + 1);
                const auto& ev = events[t];
                if (std::find(ev.begin(), ev.end(), EventLabel{r.polarity, r.fluent}) != ev.end()) continue;
                samples.push_back({r.polarity, r.fluent, t, false});
                break;
            }
        }
    }
    seeded_shuffle(samples.begin(), samples.end(), rng);
    return samples;
}

std::vector<QuerySample> build_training_points(const EventStream& stream, const RuleSet& rs, const TrainConfig& cfg,
                                               std::size_t epoch) {
    return build_training_points(stream, rs, cfg.points_per_epoch, cfg.ratio, sub_seed(cfg.seed, "sampling", epoch));
}

nn::MLPParams initial_classifier(std::size_t dim, std::size_t classes, const TrainConfig& cfg) {
    return nn::MLPParams::init(dim, cfg.hidden, classes, sub_seed(cfg.seed, "init"));
}

HybridModel train_hybrid(const EventStream& stream, const RuleSet& rules, const TrainConfig& cfg) {
    cfg.validate();
    const RuleSet rs = cfg.apply_window(rules);
    const EventStream data = stream.without_ground_truth();

    HybridModel model{initial_classifier(data.dim(), rs.num_classes(), cfg), {}};
    nn::AdamState adam = nn::AdamState::for_params(model.params);
    const nn::AdamConfig opt{cfg.lr};

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto samples = build_training_points(data, rs, cfg, epoch);
        for (const auto& s : samples) {
            auto q = nn::query_forward(model.params, data, s, rs);
            const auto loss = nn::bce_loss(q.prob, s.label);
            if (!std::isfinite(loss.loss))
                throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", step " +
                                   std::to_string(model.log.losses.size()));
            model.log.losses.push_back(loss.loss);
            nn::optimizer_step(model.params, nn::backward(q, loss.dloss_dprob), adam, opt);
        }
    }
    return model;
}

SoundEval eval_sound(const nn::MLPParams& params, const EventStream& stream) {
    if (!stream.has_ground_truth()) throw ValidationError("ground truth required");
    if (stream.length() == 0) throw ValidationError("empty evaluation set");
    const auto& gt = *stream.gt_class();
    const std::size_t c = params.num_classes();
    SoundEval ev;
    ev.confusion.assign(c, std::vector<std::size_t>(c, 0));
    std::size_t correct = 0;
    for (TimePoint t = 0; t < stream.length(); ++t) {
        const ClassId pred = nn::mlp_forward(params, stream.feature(t)).argmax();
        if (gt[t] >= c) throw ValidationError("ground-truth class outside classifier range");
        ++ev.confusion[gt[t]][pred];
        if (pred == gt[t]) ++correct;
    }
    ev.accuracy = static_cast<double>(correct) / static_cast<double>(stream.length());
    return ev;
}

double eval_sound_accuracy(const nn::MLPParams& params, const EventStream& stream) {
    return eval_sound(params, stream).accuracy;
}

std::vector<TimePoint> pattern_eval_points(const EventStream& stream, const RuleSet& rs, std::uint64_t seed) {
    const auto& events = stream.events();
    const std::size_t first = rs.max_window() ? rs.max_window() - 1 : 0;
    std::vector<TimePoint> pos, neg;
    for (TimePoint t = first; t < events.size(); ++t) (events[t].empty() ? neg : pos).push_back(t);
    Rng rng(seed);
    seeded_shuffle(neg.begin(), neg.end(), rng);
    neg.resize(std::min(neg.size(), pos.size()));
    pos.insert(pos.end(), neg.begin(), neg.end());
    std::sort(pos.begin(), pos.end());
    return pos;
}

PatternEval eval_pattern(const QueryScorer& scorer, const EventStream& stream, const RuleSet& rs, double threshold,
                         std::uint64_t seed) {
    const auto& events = stream.events();
    const std::size_t f = rs.num_fluents();
    PatternEval ev;
    for (TimePoint t : pattern_eval_points(stream, rs, seed)) {
        const auto probs = scorer(t);
        const auto best = std::max_element(probs.begin(), probs.end());
        const bool none = best == probs.end() || *best < threshold;
        bool correct = false;
        if (none) {
            correct = events[t].empty();
        } else {
            const auto idx = static_cast<std::size_t>(best - probs.begin());
            const EventLabel pred{idx < f ? Polarity::Start : Polarity::End, idx < f ? idx : idx - f};
            correct = std::find(events[t].begin(), events[t].end(), pred) != events[t].end();
        }
        (events[t].empty() ? ev.negatives : ev.positives) += 1;
        ev.correct += correct;
        ++ev.total;
    }
    ev.accuracy = ev.total ? static_cast<double>(ev.correct) / static_cast<double>(ev.total) : 0.0;
    return ev;
}

QueryScorer hybrid_scorer(const nn::MLPParams& params, const EventStream& stream, const RuleSet& rs) {
    auto dists = std::make_shared<std::vector<ClassDistribution>>(nn::classify_stream(params, stream));
    return [dists, rs](TimePoint t) {
        std::vector<double> out(2 * rs.num_fluents(), 0.0);
        for (const auto& r : rs.rules)
            if (t + 1 >= r.window)
                out[query_index(r.polarity, r.fluent, rs.num_fluents())] = pattern_prob(*dists, r, t);
        return out;
    };
}

double eval_pattern_accuracy(const nn::MLPParams& params, const EventStream& stream, const RuleSet& rs,
                             double threshold, std::uint64_t seed) {
    return eval_pattern(hybrid_scorer(params, stream, rs), stream, rs, threshold, seed).accuracy;
}

}  // namespace cep::train
