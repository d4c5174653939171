#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cep/checkpoint.hpp"
#include "cep/dataio.hpp"
#include "cep/training.hpp"

namespace cep::experiment {

enum class ModelKind { Hybrid, PureNN };

const char* to_string(ModelKind kind) noexcept;

struct FoldMetrics {
    int fold = 0;
    double sound_acc = 0.0;
    double pattern_acc = 0.0;
    std::vector<std::vector<std::size_t>> sound_confusion;
    std::size_t pattern_correct = 0;
    std::size_t pattern_total = 0;
};

struct MetricsReport {
    ModelKind model = ModelKind::Hybrid;
    std::size_t window = 0;
    train::TrainConfig config;
    std::vector<FoldMetrics> folds;  // in requested fold order
    double mean_sound_acc = 0.0;
    double mean_pattern_acc = 0.0;
};

/// {model, window, folds: [{fold, sound_acc, pattern_acc, pattern_correct,
///  pattern_total, sound_confusion}], mean_sound_acc, mean_pattern_acc,
///  config: {...}, seed}
std::string metrics_to_json(const MetricsReport& report);

struct FoldRun {
    FoldMetrics metrics;
    Checkpoint checkpoint;
};

/// Trains on every fold except `test_fold` and evaluates on `test_fold`.
/// All randomness is derived from (cfg.seed, test_fold), so hybrid and PureNN
/// runs of the same fold see identical streams and training samples.
FoldRun run_fold(const data::Dataset& data, const RuleSet& rs, const train::TrainConfig& cfg, ModelKind kind,
                 int test_fold);

/// Runs the requested test folds, in parallel across at most `threads`
/// workers (0: CEP_THREADS or hardware concurrency). Results are merged in
/// fold order; the report does not depend on the thread count.
MetricsReport cross_validate(const data::Dataset& data, const RuleSet& rs, const train::TrainConfig& cfg,
                             ModelKind kind, std::span<const int> test_folds, unsigned threads = 0,
                             std::vector<Checkpoint>* checkpoints = nullptr);

/// Worker cap from CEP_THREADS, else hardware concurrency (at least 1).
unsigned default_threads();

}  // namespace cep::experiment
