#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "cep/core.hpp"
#include "cep/mlp.hpp"

namespace cep::train {

struct TrainConfig {
    std::size_t epochs = 10;
    std::size_t points_per_epoch = 750;
    std::size_t window = 0;  // 0 keeps the windows written in the rules
    double ratio = 1.0;      // negatives per positive
    double lr = 1e-3;
    std::uint64_t seed = 1;
    std::size_t hidden = 128;
    double threshold = 0.5;  // pattern-accuracy decision threshold

    /// Throws ValidationError on a non-positive field.
    void validate() const;

    /// Rules with the configured window applied (and re-validated).
    RuleSet apply_window(const RuleSet& rs) const;
};

/// Draws one epoch of query samples from the stream's complex-event labels:
/// up to budget/(1+ratio) true transitions (all of them if they fit, a seeded
/// subset otherwise) plus `ratio` negatives per positive, drawn uniformly from
/// non-firing (kind, fluent, t) triples with a full window. With no positives
/// the whole budget is negatives. The result is shuffled; deterministic in seed.
std::vector<QuerySample> build_training_points(const EventStream& stream, const RuleSet& rs, std::size_t budget,
                                               double ratio, std::uint64_t seed);

/// Epoch `epoch` of the configured protocol (seed derived from cfg.seed).
std::vector<QuerySample> build_training_points(const EventStream& stream, const RuleSet& rs, const TrainConfig& cfg,
                                               std::size_t epoch);

struct TrainingLog {
    std::vector<double> losses;  // one per gradient step
};

struct HybridModel {
    nn::MLPParams params;
    TrainingLog log;
};

/// Initial classifier for a configuration (what epochs=0 returns).
nn::MLPParams initial_classifier(std::size_t dim, std::size_t classes, const TrainConfig& cfg);

/// End-to-end training of the frame classifier through the pattern formulas,
/// one Adam step per query sample. Frame labels of `stream` are never read;
/// only its complex-event labels are. Throws NumericError on a non-finite loss.
HybridModel train_hybrid(const EventStream& stream, const RuleSet& rs, const TrainConfig& cfg);

struct SoundEval {
    double accuracy = 0.0;
    std::vector<std::vector<std::size_t>> confusion;  // [truth][predicted]
};

/// Frame accuracy of argmax(classifier) against frame labels.
SoundEval eval_sound(const nn::MLPParams& params, const EventStream& stream);
double eval_sound_accuracy(const nn::MLPParams& params, const EventStream& stream);

/// Query probabilities at t, ordered start(f0..fF-1), end(f0..fF-1).
using QueryScorer = std::function<std::vector<double>(TimePoint)>;

/// Index of a (kind, fluent) query in scorer output / pattern classes.
inline std::size_t query_index(Polarity kind, FluentId f, std::size_t fluents) {
    return kind == Polarity::Start ? f : fluents + f;
}

/// Evaluation anchors: every step where some transition fires plus an equal
/// number (or all available) of seeded non-firing steps, ascending. Only
/// steps with a full window for every rule qualify.
std::vector<TimePoint> pattern_eval_points(const EventStream& stream, const RuleSet& rs, std::uint64_t seed);

struct PatternEval {
    double accuracy = 0.0;
    std::size_t correct = 0;
    std::size_t total = 0;
    std::size_t positives = 0;
    std::size_t negatives = 0;
};

/// Predicts argmax over the query probabilities, or "none" when every one is
/// below threshold; correct when the prediction is one of the transitions
/// firing at the point (or "none" where nothing fires).
PatternEval eval_pattern(const QueryScorer& scorer, const EventStream& stream, const RuleSet& rs, double threshold,
                         std::uint64_t seed);

/// Hybrid scorer: classifier outputs fed to the pattern formulas.
QueryScorer hybrid_scorer(const nn::MLPParams& params, const EventStream& stream, const RuleSet& rs);

double eval_pattern_accuracy(const nn::MLPParams& params, const EventStream& stream, const RuleSet& rs,
                             double threshold = 0.5, std::uint64_t seed = 0);

}  // namespace cep::train
