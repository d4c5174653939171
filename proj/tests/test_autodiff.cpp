#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "cep/checkpoint.hpp"
#include "cep/circuit.hpp"
#include "cep/error.hpp"
#include "cep/inference.hpp"
#include "cep/optimizer.hpp"
#include "oracles.hpp"

using namespace cep;
using namespace cep::nn;

namespace {

EventStream random_features(std::mt19937_64& rng, std::size_t n, std::size_t dim) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> f(n * dim);
    for (double& v : f) v = g(rng);
    return EventStream(dim, std::move(f));
}

/// Rule set with `classes` classes and one fluent using the given window.
RuleSet rules(std::size_t classes, std::size_t window, std::size_t count = 2) {
    return testing::single_fluent_rules(classes, 0, classes > 1 ? 1 : 0, count, window);
}

}  // namespace

TEST_SUITE("autodiff") {
    TEST_CASE("mlp_forward with zero parameters is uniform") {
        auto p = MLPParams::zeros(4, 8, 5);
        auto d = mlp_forward(p, std::vector<double>{1, -2, 3, 0.5});
        for (double v : d.probs()) CHECK(v == doctest::Approx(0.2).epsilon(1e-15));
    }

    TEST_CASE("mlp_forward saturates toward a dominant logit") {
        auto p = MLPParams::zeros(2, 2, 3);
        double last = 0.0;
        for (double logit : {1.0, 5.0, 10.0, 30.0}) {
            p.output.bias = {0.0, logit, 0.0};
            const double v = mlp_forward(p, std::vector<double>{0, 0})[1];
            CHECK(v > last);
            last = v;
        }
        p.output.bias = {0.0, 700.0, 0.0};
        CHECK(mlp_forward(p, std::vector<double>{0, 0})[1] == 1.0);
    }

    TEST_CASE("mlp_forward outputs are normalised") {
        std::mt19937_64 rng(1);
        for (int i = 0; i < 1000; ++i) {
            auto p = MLPParams::init(1 + rng() % 10, 1 + rng() % 20, 2 + rng() % 10, rng());
            for (auto t : p.tensors())
                for (double& v : t) v *= 1.0 + static_cast<double>(rng() % 20);
            std::normal_distribution<double> g(0.0, 3.0);
            std::vector<double> x(p.input_dim());
            for (double& v : x) v = g(rng);
            auto d = mlp_forward(p, x);
            double sum = 0.0;
            for (double v : d.probs()) {
                REQUIRE(v >= 0.0);
                REQUIRE(v <= 1.0);
                sum += v;
            }
            REQUIRE(std::abs(sum - 1.0) < 1e-9);
        }
    }

    TEST_CASE("mlp_forward rejects a wrong dimension") {
        auto p = MLPParams::zeros(4, 2, 2);
        CHECK_THROWS_AS(mlp_forward(p, std::vector<double>{1, 2, 3}), ValidationError);
    }

    TEST_CASE("init is seeded and bounded") {
        auto a = MLPParams::init(16, 32, 10, 5);
        auto b = MLPParams::init(16, 32, 10, 5);
        CHECK(a == b);
        CHECK_FALSE(a == MLPParams::init(16, 32, 10, 6));
        for (double w : a.hidden.weight) CHECK(std::abs(w) <= 0.25);
        for (double w : a.output.weight) CHECK(std::abs(w) <= 1.0 / std::sqrt(32.0));
    }

    TEST_CASE("query_forward matches start_prob on classifier outputs") {
        std::mt19937_64 rng(2);
        for (int i = 0; i < 200; ++i) {
            const std::size_t c = 2 + rng() % 4;
            const std::size_t w = 2 + rng() % 4;
            auto rs = rules(c, w, 2 + rng() % (w - 1));
            auto p = MLPParams::init(5, 7, c, rng());
            auto s = random_features(rng, w + rng() % 5, 5);
            const auto dists = classify_stream(p, s);
            const QuerySample q{rng() % 2 ? Polarity::Start : Polarity::End, 0, w - 1 + rng() % (s.length() - w + 1), true};
            const auto r = query_forward(p, s, q, rs);
            REQUIRE(r.prob == pattern_prob(dists, rs.rule_for(0, q.kind), q.t));
        }
    }

    TEST_CASE("query_forward with uniform classifier, C=10, k=2, w=2") {
        auto p = MLPParams::zeros(3, 4, 10);
        std::mt19937_64 rng(3);
        auto s = random_features(rng, 4, 3);
        auto r = query_forward(p, s, {Polarity::Start, 0, 1, true}, rules(10, 2));
        CHECK(r.prob == doctest::Approx(0.01).epsilon(1e-12));
    }

    TEST_CASE("query_forward of a saturated classifier on a positive sample") {
        // Features are one-hot of the class; output weights copy them with a large gain.
        auto p = MLPParams::zeros(2, 2, 2);
        p.hidden.weight = {1, 0, 0, 1};
        p.output.weight = {1000, 0, 0, 1000};
        EventStream s(2, {1, 0, 1, 0, 0, 1});
        CHECK(query_forward(p, s, {Polarity::Start, 0, 1, true}, rules(2, 2)).prob == 1.0);
        CHECK(query_forward(p, s, {Polarity::End, 0, 2, false}, rules(2, 2)).prob == 0.0);
    }

    TEST_CASE("query_forward enforces the window precondition") {
        auto p = MLPParams::zeros(2, 2, 2);
        EventStream s(2, std::vector<double>(10, 0.0));
        CHECK_THROWS_AS(query_forward(p, s, {Polarity::Start, 0, 1, true}, rules(2, 3)), WindowError);
    }

    TEST_CASE("circuit size grows linearly in the window") {
        auto p = MLPParams::zeros(3, 4, 3);
        EventStream s(3, std::vector<double>(30, 0.1));
        std::vector<std::size_t> sizes;
        for (std::size_t w = 2; w <= 5; ++w)
            sizes.push_back(query_forward(p, s, {Polarity::Start, 0, 6, true}, rules(3, w)).circuit.size());
        // 6 nodes per frame (input, affine, relu, affine, softmax, pick) + 4 DP nodes per earlier frame.
        for (std::size_t i = 1; i < sizes.size(); ++i) CHECK(sizes[i] - sizes[i - 1] == 10);
        CHECK(sizes[0] == 18);
    }

    TEST_CASE("backward is linear in the seed") {
        std::mt19937_64 rng(4);
        auto p = MLPParams::init(4, 6, 3, 9);
        auto s = random_features(rng, 5, 4);
        auto q1 = query_forward(p, s, {Polarity::Start, 0, 3, true}, rules(3, 3));
        auto q2 = query_forward(p, s, {Polarity::Start, 0, 3, true}, rules(3, 3));
        auto g1 = backward(q1, 1.0);
        auto g2 = backward(q2, 2.0);
        auto t1 = g1.tensors();
        auto t2 = g2.tensors();
        for (std::size_t i = 0; i < t1.size(); ++i)
            for (std::size_t j = 0; j < t1[i].size(); ++j) REQUIRE(t2[i][j] == 2.0 * t1[i][j]);
    }

    TEST_CASE("dead paths get zero gradient") {
        std::mt19937_64 rng(5);
        auto p = MLPParams::init(4, 6, 3, 1);
        // Hidden unit 2 never activates; input feature 1 is always zero.
        for (std::size_t c = 0; c < 4; ++c) p.hidden.weight[2 * 4 + c] = 0.0;
        p.hidden.bias[2] = -5.0;
        auto s = random_features(rng, 4, 4);
        std::vector<double> f(s.features().begin(), s.features().end());
        for (std::size_t t = 0; t < 4; ++t) f[t * 4 + 1] = 0.0;
        EventStream s2(4, f);
        auto q = query_forward(p, s2, {Polarity::End, 0, 3, true}, rules(3, 3));
        auto g = backward(q, 1.0);
        for (std::size_t c = 0; c < 4; ++c) CHECK(g.hidden.weight[2 * 4 + c] == 0.0);
        CHECK(g.hidden.bias[2] == 0.0);
        for (std::size_t r = 0; r < 3; ++r) CHECK(g.output.weight[r * 6 + 2] == 0.0);
        for (std::size_t h = 0; h < 6; ++h) CHECK(g.hidden.weight[h * 4 + 1] == 0.0);
    }

    TEST_CASE("query gradients match central differences") {
        std::mt19937_64 rng(6);
        for (int i = 0; i < 25; ++i) {
            const std::size_t c = 2 + rng() % 3, w = 2 + rng() % 4, d = 2 + rng() % 4;
            auto rs = rules(c, w, 2 + rng() % (w - 1));
            auto p = MLPParams::init(d, 3 + rng() % 5, c, rng());
            auto s = random_features(rng, w + 2, d);
            const QuerySample q{rng() % 2 ? Polarity::Start : Polarity::End, 0, w - 1 + rng() % 3, true};
            auto fwd = query_forward(p, s, q, rs);
            auto g = backward(fwd, 1.0);
            auto res = testing::check_gradients(p, g, [&](const MLPParams& pp) { return query_forward(pp, s, q, rs).prob; });
            REQUIRE(res.max_violation <= 1.0);
        }
    }

    TEST_CASE("primitive adjoints match central differences") {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(0.05, 0.95);
        for (int i = 0; i < 200; ++i) {
            const double a = u(rng), b = u(rng);
            // f(a, b) = (a * (1 - b) + b) * softmax([a, b])[0]
            auto build = [](double x, double y, Circuit& c, NodeId& na, NodeId& nb) {
                na = c.input(std::vector<double>{x});
                nb = c.input(std::vector<double>{y});
                NodeId s = c.softmax(c.concat(std::vector<NodeId>{na, nb}));
                NodeId lhs = c.add(c.mul(na, c.complement(nb)), nb);
                return c.mul(lhs, c.pick(s, 0));
            };
            Circuit c;
            NodeId na, nb;
            NodeId out = build(a, b, c, na, nb);
            c.backward(out, 1.0);
            const double h = 1e-5;
            auto eval = [&](double x, double y) {
                Circuit cc;
                NodeId xa, xb;
                return cc.scalar(build(x, y, cc, xa, xb));
            };
            const double da = (eval(a + h, b) - eval(a - h, b)) / (2 * h);
            const double db = (eval(a, b + h) - eval(a, b - h)) / (2 * h);
            REQUIRE(std::abs(c.adjoint(na)[0] - da) <= std::max(1e-4 * std::abs(da), 1e-6));
            REQUIRE(std::abs(c.adjoint(nb)[0] - db) <= std::max(1e-4 * std::abs(db), 1e-6));
        }
    }

    TEST_CASE("bce_loss") {
        auto l = bce_loss(1.0, true);
        CHECK(l.loss == doctest::Approx(1e-7).epsilon(1e-3));
        CHECK(bce_loss(0.5, true).loss == doctest::Approx(std::log(2.0)));
        CHECK(bce_loss(0.5, false).loss == doctest::Approx(std::log(2.0)));
        CHECK(bce_loss(0.3, true).dloss_dprob < 0.0);
        CHECK(bce_loss(0.3, false).dloss_dprob > 0.0);
        CHECK(std::isfinite(bce_loss(0.0, true).loss));
        CHECK(std::isfinite(bce_loss(1.0, false).dloss_dprob));
        const double h = 1e-6;
        CHECK(bce_loss(0.4, true).dloss_dprob ==
              doctest::Approx((bce_loss(0.4 + h, true).loss - bce_loss(0.4 - h, true).loss) / (2 * h)).epsilon(1e-6));
    }

    TEST_CASE("Adam: zero gradients leave parameters unchanged") {
        auto p = MLPParams::init(3, 4, 2, 1);
        const auto before = p;
        auto state = AdamState::for_params(p);
        optimizer_step(p, MLPParams::zeros(3, 4, 2), state, AdamConfig{});
        CHECK(p == before);
    }

    TEST_CASE("Adam minimises a quadratic") {
        std::vector<double> theta{1.0};
        AdamMoments st(1);
        for (int i = 0; i < 5000; ++i) {
            const std::vector<double> g{2.0 * theta[0]};
            adam_step(theta, g, st, AdamConfig{0.01});
        }
        CHECK(std::abs(theta[0]) < 1e-2);
    }

    TEST_CASE("Adam is deterministic") {
        auto run = [] {
            auto p = MLPParams::init(5, 6, 3, 42);
            auto st = AdamState::for_params(p);
            std::mt19937_64 rng(42);
            std::normal_distribution<double> g(0.0, 1.0);
            for (int i = 0; i < 50; ++i) {
                auto grads = MLPParams::zeros(5, 6, 3);
                for (auto t : grads.tensors())
                    for (double& v : t) v = g(rng);
                optimizer_step(p, grads, st, AdamConfig{});
            }
            return p;
        };
        auto a = run(), b = run();
        for (std::size_t i = 0; i < 4; ++i)
            CHECK(std::memcmp(a.tensors()[i].data(), b.tensors()[i].data(), a.tensors()[i].size_bytes()) == 0);
    }

    TEST_CASE("Adam refuses non-finite gradients") {
        auto p = MLPParams::init(2, 2, 2, 1);
        const auto before = p;
        auto st = AdamState::for_params(p);
        auto g = MLPParams::zeros(2, 2, 2);
        g.output.bias[1] = NAN;
        CHECK_THROWS_AS(optimizer_step(p, g, st, AdamConfig{}), NumericError);
        CHECK(p == before);
        CHECK(st == AdamState::for_params(p));
        CHECK_THROWS_AS(optimizer_step(p, MLPParams::zeros(3, 2, 2), st, AdamConfig{}), ValidationError);
    }

    TEST_CASE("checkpoint round-trips bit-exactly") {
        Checkpoint c;
        c.seed = 99;
        c.classifier = MLPParams::init(7, 9, 4, 3);
        c.classifier.hidden.weight[0] = 1.0 / 3.0;
        c.classifier.output.bias[0] = -0.0;
        c.classifier.output.bias[1] = 5e-324;
        auto back = checkpoint_from_json(checkpoint_to_json(c));
        CHECK(back == c);
        CHECK(std::signbit(back.classifier.output.bias[0]));

        c.kind = "purenn";
        c.head = MLPParams::init(8, 5, 3, 4);
        c.window = 2;
        CHECK(checkpoint_from_json(checkpoint_to_json(c)) == c);
        CHECK_THROWS_AS(checkpoint_from_json("{\"format\":\"x\"}"), ValidationError);
    }
}
