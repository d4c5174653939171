#include <doctest.h>

#include <algorithm>
#include <random>

#include "cep/core.hpp"
#include "cep/error.hpp"
#include "oracles.hpp"

using namespace cep;

namespace {

RuleSet shooting_rules() {
    return RuleSet{{"gunshot", "siren"},
                   {"shooting"},
                   {{0, Polarity::Start, 0, 2, 3}, {0, Polarity::End, 1, 2, 3}}};
}

EventStream stream_of(std::vector<ClassId> gt) {
    const std::size_t n = gt.size();
    return EventStream(1, std::vector<double>(n, 0.0), std::move(gt));
}

}  // namespace

TEST_SUITE("core") {
    TEST_CASE("validate_ruleset accepts a well-formed set") { CHECK(validate_ruleset(shooting_rules()).empty()); }

    TEST_CASE("validate_ruleset reports a missing End rule") {
        auto rs = shooting_rules();
        rs.rules.pop_back();
        auto v = validate_ruleset(rs);
        REQUIRE(v.size() == 1);
        CHECK(v[0] == "fluent shooting: missing End rule");
    }

    TEST_CASE("validate_ruleset reports count exceeding window") {
        auto rs = shooting_rules();
        rs.rules[0].count = 3;
        rs.rules[0].window = 2;
        auto v = validate_ruleset(rs);
        REQUIRE(v.size() == 1);
        CHECK(v[0].find("count exceeds window") != std::string::npos);
        CHECK(v[0].find("shooting") != std::string::npos);
    }

    TEST_CASE("validate_ruleset flags duplicates and bad triggers") {
        auto rs = shooting_rules();
        rs.classes.push_back("siren");
        rs.rules.push_back({0, Polarity::Start, 7, 2, 2});
        auto v = validate_ruleset(rs);
        auto has = [&](const char* s) {
            return std::any_of(v.begin(), v.end(), [&](const std::string& m) { return m.find(s) != std::string::npos; });
        };
        CHECK(has("duplicate class name"));
        CHECK(has("trigger class out of range"));
        CHECK(has("multiple Start rules"));
    }

    TEST_CASE("ClassDistribution invariants") {
        CHECK_THROWS_AS(ClassDistribution({0.5, 0.6}), DomainError);
        CHECK_THROWS_AS(ClassDistribution({-0.1, 1.1}), DomainError);
        CHECK(ClassDistribution({0.25, 0.25, 0.5}).argmax() == 2);
        CHECK(ClassDistribution({0.5, 0.5}).argmax() == 0);
    }

    TEST_CASE("annotation: adjacent repeats with w=2") {
        RuleSet rs{{"g", "x"}, {"f"}, {{0, Polarity::Start, 0, 2, 2}, {0, Polarity::End, 1, 2, 2}}};
        auto ev = annotate_ground_truth(stream_of({0, 0}), rs);
        CHECK(ev[0].empty());
        REQUIRE(ev[1].size() == 1);
        CHECK(ev[1][0] == EventLabel{Polarity::Start, 0});
    }

    TEST_CASE("annotation: gap defeats w=2 but not w=3") {
        RuleSet rs{{"g", "x"}, {"f"}, {{0, Polarity::Start, 0, 2, 2}, {0, Polarity::End, 1, 2, 2}}};
        auto ev = annotate_ground_truth(stream_of({0, 1, 0}), rs);
        CHECK(std::all_of(ev.begin(), ev.end(), [](const auto& s) { return s.empty(); }));

        auto rs3 = rs.with_window(3);
        auto ev3 = annotate_ground_truth(stream_of({0, 1, 0}), rs3);
        CHECK(ev3[0].empty());
        CHECK(ev3[1].empty());
        REQUIRE(ev3[2].size() == 1);
        CHECK(ev3[2][0].kind == Polarity::Start);
    }

    TEST_CASE("annotation re-fires on overlapping windows") {
        RuleSet rs{{"g", "x"}, {"f"}, {{0, Polarity::Start, 0, 2, 2}, {0, Polarity::End, 1, 2, 2}}};
        auto ev = annotate_ground_truth(stream_of({0, 0, 0}), rs);
        CHECK(ev[1].size() == 1);
        CHECK(ev[2].size() == 1);
    }

    TEST_CASE("annotation requires ground truth") {
        EventStream s(2, {0, 0, 0, 0});
        CHECK_THROWS_WITH_AS(annotate_ground_truth(s, shooting_rules()), "ground truth required", ValidationError);
    }

    TEST_CASE("annotation is invariant under consistent class renaming") {
        std::mt19937_64 rng(11);
        for (int iter = 0; iter < 1000; ++iter) {
            const std::size_t c = 2 + rng() % 4;
            auto rs = testing::single_fluent_rules(c, rng() % c, rng() % c, 2, 2 + rng() % 3);
            std::vector<ClassId> gt(1 + rng() % 12);
            for (auto& g : gt) g = rng() % c;

            std::vector<ClassId> perm(c);
            for (std::size_t i = 0; i < c; ++i) perm[i] = i;
            std::shuffle(perm.begin(), perm.end(), rng);
            auto renamed = rs;
            for (auto& r : renamed.rules) r.trigger_class = perm[r.trigger_class];
            auto gt2 = gt;
            for (auto& g : gt2) g = perm[g];

            REQUIRE(annotate_classes(gt, rs) == annotate_classes(gt2, renamed));
        }
    }
}
