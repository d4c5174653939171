#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "cep/dataio.hpp"
#include "cep/error.hpp"
#include "cep/training.hpp"
#include "oracles.hpp"

using namespace cep;
using namespace cep::train;

namespace {

/// Stream of one-hot features (dim = classes) with labels and annotations.
EventStream labelled_stream(const std::vector<ClassId>& gt, std::size_t classes, const RuleSet& rs) {
    std::vector<double> f(gt.size() * classes, 0.0);
    for (std::size_t t = 0; t < gt.size(); ++t) f[t * classes + gt[t]] = 1.0;
    EventStream s(classes, std::move(f), gt);
    s.set_events(annotate_ground_truth(s, rs));
    return s;
}

/// Classifier that reproduces one-hot inputs exactly (to within exp(-1000)).
nn::MLPParams perfect_classifier(std::size_t classes) {
    auto p = nn::MLPParams::zeros(classes, classes, classes);
    for (std::size_t i = 0; i < classes; ++i) {
        p.hidden.weight[i * classes + i] = 1.0;
        p.output.weight[i * classes + i] = 1000.0;
    }
    return p;
}

std::vector<ClassId> balanced_labels(std::size_t classes, std::size_t reps) {
    std::vector<ClassId> gt;
    for (std::size_t r = 0; r < reps; ++r)
        for (ClassId c = 0; c < classes; ++c) {
            gt.push_back(c);
            if (r % 2 == 0) gt.push_back(c);
        }
    return gt;
}

}  // namespace

TEST_SUITE("training") {
    TEST_CASE("sampling with no true events gives only negatives") {
        auto rs = testing::single_fluent_rules(3, 0, 1, 2, 2);
        auto s = labelled_stream({2, 2, 2, 0, 2, 1, 2, 2}, 3, rs);
        auto pts = build_training_points(s, rs, 10, 1.0, 1);
        CHECK(pts.size() == 10);
        for (const auto& q : pts) {
            CHECK_FALSE(q.label);
            CHECK(q.t >= 1);
        }
    }

    TEST_CASE("sampling balances positives and negatives") {
        auto rs = testing::single_fluent_rules(3, 0, 1, 2, 2);
        // Starts fire at t = 1, 4, 7, 10, 13.
        auto s = labelled_stream({0, 0, 2, 0, 0, 2, 0, 0, 2, 0, 0, 2, 0, 0, 2}, 3, rs);
        for (std::size_t budget : {10u, 50u}) {
            auto pts = build_training_points(s, rs, budget, 1.0, 7);
            const auto pos = std::count_if(pts.begin(), pts.end(), [](const QuerySample& q) { return q.label; });
            CHECK(pos == 5);
            CHECK(pts.size() == 10);
            for (const auto& q : pts) {
                const bool fires = std::find(s.events()[q.t].begin(), s.events()[q.t].end(),
                                             EventLabel{q.kind, q.fluent}) != s.events()[q.t].end();
                CHECK(fires == q.label);
            }
        }
        // Budget smaller than the positives: capped at budget / (1 + ratio).
        auto few = build_training_points(s, rs, 6, 1.0, 7);
        CHECK(std::count_if(few.begin(), few.end(), [](const QuerySample& q) { return q.label; }) == 3);
        CHECK(few.size() == 6);
        // Ratio 3: three negatives per positive.
        auto skew = build_training_points(s, rs, 40, 3.0, 7);
        CHECK(std::count_if(skew.begin(), skew.end(), [](const QuerySample& q) { return !q.label; }) == 15);
    }

    TEST_CASE("sampling is deterministic in the seed") {
        auto rs = testing::single_fluent_rules(3, 0, 1, 2, 3);
        std::mt19937_64 rng(1);
        std::vector<ClassId> gt(200);
        for (auto& g : gt) g = rng() % 3;
        auto s = labelled_stream(gt, 3, rs);
        for (int i = 0; i < 1000; ++i) {
            const std::uint64_t seed = rng();
            REQUIRE(build_training_points(s, rs, 20, 1.0, seed) == build_training_points(s, rs, 20, 1.0, seed));
        }
        CHECK_FALSE(build_training_points(s, rs, 20, 1.0, 1) == build_training_points(s, rs, 20, 1.0, 2));
    }

    TEST_CASE("config validation") {
        TrainConfig c;
        CHECK_NOTHROW(c.validate());
        c.ratio = 0.0;
        CHECK_THROWS_AS(c.validate(), ValidationError);
        c = TrainConfig{};
        c.points_per_epoch = 0;
        CHECK_THROWS_AS(c.validate(), ValidationError);
        c = TrainConfig{};
        c.window = 1;
        CHECK_THROWS_AS(c.validate(), ValidationError);
    }

    TEST_CASE("epochs = 0 returns the initialisation") {
        auto rs = testing::single_fluent_rules(3, 0, 1, 2, 2);
        auto s = labelled_stream({0, 0, 1, 1, 2, 0, 0}, 3, rs);
        TrainConfig cfg;
        cfg.epochs = 0;
        cfg.hidden = 8;
        auto m = train_hybrid(s, rs, cfg);
        CHECK(m.params == initial_classifier(3, 3, cfg));
        CHECK(m.log.losses.empty());
    }

    TEST_CASE("training never reads frame labels") {
        auto rs = testing::single_fluent_rules(3, 0, 1, 2, 2);
        std::mt19937_64 rng(2);
        std::vector<ClassId> gt(60);
        for (auto& g : gt) g = rng() % 3;
        auto s = labelled_stream(gt, 3, rs);

        // Same features and events, scrambled frame labels.
        std::vector<ClassId> scrambled(gt.size());
        for (auto& g : scrambled) g = rng() % 3;
        EventStream s2(3, std::vector<double>(s.features().begin(), s.features().end()), scrambled);
        s2.set_events(s.events());

        TrainConfig cfg;
        cfg.epochs = 2;
        cfg.points_per_epoch = 40;
        cfg.hidden = 8;
        auto a = train_hybrid(s, rs, cfg);
        auto b = train_hybrid(s2, rs, cfg);
        CHECK(a.params == b.params);
        CHECK(a.log.losses == b.log.losses);
        for (double l : a.log.losses) CHECK(std::isfinite(l));
    }

    TEST_CASE("sound accuracy") {
        auto rs = testing::single_fluent_rules(10, 0, 1, 2, 2);
        const auto gt = balanced_labels(10, 4);
        auto s = labelled_stream(gt, 10, rs);
        CHECK(eval_sound_accuracy(perfect_classifier(10), s) == 1.0);

        // Uniform outputs: ties break toward class 0, which is 10% of a balanced stream.
        auto uniform = nn::MLPParams::zeros(10, 4, 10);
        CHECK(eval_sound_accuracy(uniform, s) == doctest::Approx(0.1));

        auto ev = eval_sound(perfect_classifier(10), s);
        CHECK(ev.confusion[3][3] == static_cast<std::size_t>(std::count(gt.begin(), gt.end(), 3)));

        EventStream empty(10, {}, std::vector<ClassId>{});
        CHECK_THROWS_WITH_AS(eval_sound_accuracy(uniform, empty), "empty evaluation set", ValidationError);
        CHECK_THROWS_AS(eval_sound_accuracy(uniform, s.without_ground_truth()), ValidationError);
    }

    TEST_CASE("pattern accuracy") {
        auto rs = data::synth_ruleset(10, 5, 2);
        const auto gt = balanced_labels(10, 6);
        auto s = labelled_stream(gt, 10, rs);
        const auto points = pattern_eval_points(s, rs, 3);
        std::size_t pos = 0;
        for (TimePoint t : points) pos += !s.events()[t].empty();
        CHECK(pos > 0);
        CHECK(points.size() == 2 * pos);

        CHECK(eval_pattern_accuracy(perfect_classifier(10), s, rs, 0.5, 3) == 1.0);

        // Uniform classifier: every query scores 0.01, so "none" everywhere.
        auto uniform = nn::MLPParams::zeros(10, 4, 10);
        auto ev = eval_pattern(hybrid_scorer(uniform, s, rs), s, rs, 0.5, 3);
        CHECK(ev.correct == ev.negatives);
        CHECK(ev.accuracy == doctest::Approx(0.5));
        CHECK(hybrid_scorer(uniform, s, rs)(5)[0] == doctest::Approx(0.01));

        // Threshold above 1: the perfect classifier also predicts "none" everywhere.
        auto high = eval_pattern(hybrid_scorer(perfect_classifier(10), s, rs), s, rs, 1.1, 3);
        CHECK(high.accuracy == doctest::Approx(static_cast<double>(high.negatives) / static_cast<double>(high.total)));
    }

    TEST_CASE("hybrid training learns the synthetic classes from pattern labels alone") {
        data::SynthConfig sc;
        sc.per_class = 30;
        sc.seed = 4;
        auto synth = data::synth_generate(sc);
        std::vector<double> feats;
        std::vector<ClassId> gt;
        for (const auto& fold : synth.folds)
            for (const auto& f : fold) {
                feats.insert(feats.end(), f.features.begin(), f.features.end());
                gt.insert(gt.end(), f.gt_class->begin(), f.gt_class->end());
            }
        EventStream s(sc.dim, feats, gt);
        s.set_events(annotate_ground_truth(s, synth.rules));
        TrainConfig cfg;
        cfg.epochs = 4;
        cfg.hidden = 32;
        cfg.lr = 3e-3;
        auto m = train_hybrid(s, synth.rules, cfg);
        CHECK(eval_sound_accuracy(m.params, s) > 0.9);
        for (double l : m.log.losses) REQUIRE(std::isfinite(l));
    }
}
