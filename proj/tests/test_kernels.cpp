#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "cep/kernels.hpp"

using namespace cep::kernels;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = g(rng);
    return v;
}

double max_rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(a[i])));
    return worst;
}

std::vector<Isa> vector_isas() {
    std::vector<Isa> out;
    for (Isa isa : {Isa::Avx2, Isa::Neon})
        if (supported(isa)) out.push_back(isa);
    return out;
}

}  // namespace

TEST_SUITE("kernels") {
    TEST_CASE("dispatch reports a usable table") {
        CHECK(supported(Isa::Scalar));
        const auto& k = active();
        CHECK(supported(k.isa));
        CHECK(table(Isa::Scalar).isa == Isa::Scalar);
        MESSAGE("active kernels: " << to_string(k.isa));
    }

    TEST_CASE("scalar kernels compute the textbook formulas") {
        const auto& s = table(Isa::Scalar);
        const std::vector<double> w{1, 2, 3, 4, 5, 6};  // 2 x 3
        const std::vector<double> b{0.5, -1};
        const std::vector<double> x{1, 0, -1};
        std::vector<double> y(2);
        s.affine(w.data(), b.data(), x.data(), y.data(), 2, 3);
        CHECK(y == std::vector<double>{-1.5, -3.0});

        std::vector<double> gx(3, 1.0);
        const std::vector<double> gy{1, 2};
        s.affine_backward_input(w.data(), gy.data(), gx.data(), 2, 3);
        CHECK(gx == std::vector<double>{10, 13, 16});

        std::vector<double> gw(6, 0.0);
        s.outer_accumulate(gy.data(), x.data(), gw.data(), 2, 3);
        CHECK(gw == std::vector<double>{1, 0, -1, 2, 0, -2});
    }

    TEST_CASE("vector kernels match the scalar reference") {
        std::mt19937_64 rng(17);
        const auto& ref = table(Isa::Scalar);
        for (Isa isa : vector_isas()) {
            const auto& k = table(isa);
            CAPTURE(to_string(isa));
            for (int iter = 0; iter < 1000; ++iter) {
                const std::size_t rows = 1 + rng() % 40;
                const std::size_t cols = 1 + rng() % 70;
                const auto w = random_vec(rng, rows * cols);
                const auto b = random_vec(rng, rows);
                const auto x = random_vec(rng, cols);
                const auto gy = random_vec(rng, rows);

                std::vector<double> y0(rows), y1(rows);
                ref.affine(w.data(), b.data(), x.data(), y0.data(), rows, cols);
                k.affine(w.data(), b.data(), x.data(), y1.data(), rows, cols);
                REQUIRE(max_rel_diff(y0, y1) < 1e-12);

                auto gx0 = random_vec(rng, cols), gx1 = gx0;
                ref.affine_backward_input(w.data(), gy.data(), gx0.data(), rows, cols);
                k.affine_backward_input(w.data(), gy.data(), gx1.data(), rows, cols);
                REQUIRE(max_rel_diff(gx0, gx1) < 1e-12);

                auto gw0 = random_vec(rng, rows * cols), gw1 = gw0;
                ref.outer_accumulate(gy.data(), x.data(), gw0.data(), rows, cols);
                k.outer_accumulate(gy.data(), x.data(), gw1.data(), rows, cols);
                REQUIRE(max_rel_diff(gw0, gw1) < 1e-12);
            }
        }
    }

    TEST_CASE("vector Adam update is bit-identical to scalar") {
        std::mt19937_64 rng(23);
        for (Isa isa : vector_isas()) {
            const auto& k = table(isa);
            for (int iter = 0; iter < 1000; ++iter) {
                const std::size_t n = 1 + rng() % 50;
                auto p0 = random_vec(rng, n), g = random_vec(rng, n), m0 = random_vec(rng, n), v0 = random_vec(rng, n);
                for (double& v : v0) v = std::abs(v);
                auto p1 = p0, m1 = m0, v1 = v0;
                const double step = 1.0 + static_cast<double>(rng() % 100);
                AdamCoefficients c{1e-3, 0.9, 0.999, 1e-8, 1.0 - std::pow(0.9, step), 1.0 - std::pow(0.999, step)};
                table(Isa::Scalar).adam_update(p0.data(), g.data(), m0.data(), v0.data(), n, c);
                k.adam_update(p1.data(), g.data(), m1.data(), v1.data(), n, c);
                REQUIRE(p0 == p1);
                REQUIRE(m0 == m1);
                REQUIRE(v0 == v1);
            }
        }
    }
}
