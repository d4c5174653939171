#include "cep/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <thread>

#include <json.hpp>

#include "cep/error.hpp"
#include "cep/purenn.hpp"
#include "cep/rng.hpp"

namespace cep::experiment {

const char* to_string(ModelKind kind) noexcept { return kind == ModelKind::Hybrid ? "hybrid" : "purenn"; }

std::string metrics_to_json(const MetricsReport& r) {
    using nlohmann::json;
    json folds = json::array();
    for (const auto& f : r.folds)
        folds.push_back({{"fold", f.fold},
                         {"sound_acc", f.sound_acc},
                         {"pattern_acc", f.pattern_acc},
                         {"pattern_correct", f.pattern_correct},
                         {"pattern_total", f.pattern_total},
                         {"sound_confusion", f.sound_confusion}});
    const auto& c = r.config;
    json config{{"epochs", c.epochs},   {"points", c.points_per_epoch}, {"window", r.window},
                {"ratio", c.ratio},     {"lr", c.lr},                   {"hidden", c.hidden},
                {"threshold", c.threshold}};
    json j{{"model", to_string(r.model)},
           {"window", r.window},
           {"folds", folds},
           {"mean_sound_acc", r.mean_sound_acc},
           {"mean_pattern_acc", r.mean_pattern_acc},
           {"config", config},
           {"seed", c.seed}};
    return j.dump(2);
}

FoldRun run_fold(const data::Dataset& data, const RuleSet& rules, const train::TrainConfig& cfg, ModelKind kind,
                 int test_fold) {
    const RuleSet rs = cfg.apply_window(rules);
    std::vector<int> train_folds;
    for (int f : data.manifest().fold_ids())
        if (f != test_fold) train_folds.push_back(f);
    if (train_folds.empty()) throw ValidationError("no training folds besides fold " + std::to_string(test_fold));
    const int test[] = {test_fold};

    train::TrainConfig fold_cfg = cfg;
    fold_cfg.seed = sub_seed(cfg.seed, "fold", static_cast<std::uint64_t>(test_fold));

    const EventStream train_stream =
        data::assemble_sequence(data, train_folds, sub_seed(fold_cfg.seed, "assembly-train"), rs);
    const EventStream test_stream = data::assemble_sequence(data, test, sub_seed(fold_cfg.seed, "assembly-test"), rs);
    const std::uint64_t eval_seed = sub_seed(fold_cfg.seed, "eval");

    FoldRun run;
    run.metrics.fold = test_fold;
    run.checkpoint.kind = to_string(kind);
    run.checkpoint.seed = cfg.seed;
    train::SoundEval sound;
    train::PatternEval pattern;
    if (kind == ModelKind::Hybrid) {
        auto model = train::train_hybrid(train_stream, rs, fold_cfg);
        sound = train::eval_sound(model.params, test_stream);
        pattern = train::eval_pattern(train::hybrid_scorer(model.params, test_stream, rs), test_stream, rs,
                                      cfg.threshold, eval_seed);
        run.checkpoint.classifier = std::move(model.params);
    } else {
        auto model = purenn::train_purenn(train_stream, rs, fold_cfg);
        sound = train::eval_sound(model.params.frame, test_stream);
        pattern = train::eval_pattern(purenn::purenn_scorer(model.params, test_stream), test_stream, rs,
                                      cfg.threshold, eval_seed);
        run.checkpoint.classifier = std::move(model.params.frame);
        run.checkpoint.head = std::move(model.params.head);
        run.checkpoint.window = model.params.window;
    }
    run.metrics.sound_acc = sound.accuracy;
    run.metrics.sound_confusion = std::move(sound.confusion);
    run.metrics.pattern_acc = pattern.accuracy;
    run.metrics.pattern_correct = pattern.correct;
    run.metrics.pattern_total = pattern.total;
    return run;
}

unsigned default_threads() {
    if (const char* env = std::getenv("CEP_THREADS")) {
        const long n = std::strtol(env, nullptr, 10);
        if (n > 0) return static_cast<unsigned>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

MetricsReport cross_validate(const data::Dataset& data, const RuleSet& rules, const train::TrainConfig& cfg,
                             ModelKind kind, std::span<const int> test_folds, unsigned threads,
                             std::vector<Checkpoint>* checkpoints) {
    cfg.validate();
    if (test_folds.empty()) throw ValidationError("no folds requested");
    const RuleSet rs = cfg.apply_window(rules);

    std::vector<FoldRun> runs(test_folds.size());
    std::vector<std::exception_ptr> errors(test_folds.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < test_folds.size(); i = next++) {
            try {
                runs[i] = run_fold(data, rs, cfg, kind, test_folds[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned n = std::min<unsigned>(threads ? threads : default_threads(),
                                          static_cast<unsigned>(test_folds.size()));
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < n; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    MetricsReport report;
    report.model = kind;
    report.window = rs.max_window();
    report.config = cfg;
    for (auto& run : runs) {
        report.mean_sound_acc += run.metrics.sound_acc;
        report.mean_pattern_acc += run.metrics.pattern_acc;
        report.folds.push_back(run.metrics);
        if (checkpoints) checkpoints->push_back(std::move(run.checkpoint));
    }
    report.mean_sound_acc /= static_cast<double>(runs.size());
    report.mean_pattern_acc /= static_cast<double>(runs.size());
    return report;
}

}  // namespace cep::experiment
