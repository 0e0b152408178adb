#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "stiga/bspline.hpp"

using namespace stiga;

TEST_CASE("uniform open knot vectors") {
    const KnotVector kv1 = KnotVector::uniform_open(1, 1);
    CHECK(kv1.knots() == std::vector<double>{0.0, 0.0, 1.0, 1.0});
    CHECK(kv1.num_basis() == 2);

    const KnotVector kv2 = KnotVector::uniform_open(2, 2);
    CHECK(kv2.knots() == std::vector<double>{0.0, 0.0, 0.0, 0.5, 1.0, 1.0, 1.0});
    CHECK(kv2.num_basis() == 4);

    CHECK(KnotVector::uniform_open(3, 32).num_basis() == 35);
    CHECK(KnotVector::uniform_open(3, 32).mesh_size() == doctest::Approx(1.0 / 32));

    CHECK_THROWS_AS(KnotVector::uniform_open(0, 4), std::invalid_argument);
    CHECK_THROWS_AS(KnotVector::uniform_open(2, 0), std::invalid_argument);
}

TEST_CASE("linear hat values") {
    const KnotVector kv = KnotVector::uniform_open(1, 1);
    double vals[2];
    const int first = kv.eval_basis(0.25, 0, vals);
    CHECK(first == 0);
    CHECK(vals[0] == doctest::Approx(0.75));
    CHECK(vals[1] == doctest::Approx(0.25));
    CHECK_THROWS_AS(kv.eval_basis(-0.1, 0, vals), std::invalid_argument);
    CHECK_THROWS_AS(kv.eval_basis(1.1, 0, vals), std::invalid_argument);
}

TEST_CASE("partition of unity, non-negativity and local support") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int p = 1; p <= 8; ++p) {
        const KnotVector kv = KnotVector::uniform_open(p, 16);
        std::vector<double> vals(p + 1);
        for (int trial = 0; trial < 50; ++trial) {
            const double x = unif(rng);
            const int first = kv.eval_basis(x, 0, vals);
            const int span = kv.find_span(x);
            CHECK(first == span - p);
            double sum = 0.0;
            for (double v : vals) {
                CHECK(v >= 0.0);
                sum += v;
            }
            CHECK(std::abs(sum - 1.0) <= 1e-13);

            kv.eval_basis(x, 1, vals);
            double dsum = 0.0;
            for (double v : vals) dsum += v;
            CHECK(std::abs(dsum) <= 1e-11 * p / kv.mesh_size());
        }
    }
}

TEST_CASE("deriv-0 sums at x = 0.3, p = 2, 4 elements") {
    const KnotVector kv = KnotVector::uniform_open(2, 4);
    std::vector<double> vals(3);
    kv.eval_basis(0.3, 1, vals);
    CHECK(std::abs(vals[0] + vals[1] + vals[2]) <= 1e-12);
}

TEST_CASE("right-limit convention at x = 1") {
    for (int p : {1, 2, 4}) {
        const KnotVector kv = KnotVector::uniform_open(p, 5);
        std::vector<double> vals(p + 1);
        const int first = kv.eval_basis(1.0, 0, vals);
        CHECK(first + p == kv.num_basis() - 1);
        CHECK(vals[p] == doctest::Approx(1.0));
        for (int r = 0; r < p; ++r) CHECK(vals[r] == doctest::Approx(0.0));
    }
}

TEST_CASE("derivatives match central finite differences") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> unif(0.05, 0.95);
    const double delta = 1e-6;
    for (int p : {1, 2, 3, 5}) {
        const KnotVector kv = KnotVector::uniform_open(p, 8);
        std::vector<double> d(p + 1), lo(p + 1), hi(p + 1);
        for (int trial = 0; trial < 20; ++trial) {
            // keep the stencil inside one knot span
            double x = unif(rng);
            const int span = kv.find_span(x);
            const auto [a, b] = std::pair(kv.knots()[span], kv.knots()[span + 1]);
            x = std::clamp(x, a + 2 * delta, b - 2 * delta);
            const int f0 = kv.eval_basis(x, 1, d);
            const int f1 = kv.eval_basis(x - delta, 0, lo);
            kv.eval_basis(x + delta, 0, hi);
            REQUIRE(f0 == f1);
            for (int r = 0; r <= p; ++r) {
                const double fd = (hi[r] - lo[r]) / (2 * delta);
                CHECK(d[r] == doctest::Approx(fd).epsilon(1e-5));
            }
        }
    }
}

TEST_CASE("spline spaces drop boundary functions") {
    const SplineSpace1D sp = SplineSpace1D::spatial(2, 8);
    CHECK(sp.dim() == 8);
    const SplineSpace1D tm = SplineSpace1D::temporal(2, 8);
    CHECK(tm.dim() == 9);
    CHECK_THROWS_AS(SplineSpace1D::spatial(1, 1), std::invalid_argument); // n = 0
}

TEST_CASE("gauss rules") {
    const KnotVector single = KnotVector::uniform_open(1, 1);
    const QuadratureRule mid = gauss_rule(single, 1);
    REQUIRE(mid.num_points() == 1);
    CHECK(mid.nodes[0] == doctest::Approx(0.5));
    CHECK(mid.weights[0] == doctest::Approx(1.0));

    const QuadratureRule two = gauss_rule(single, 2);
    REQUIRE(two.num_points() == 2);
    const double off = 1.0 / (2.0 * std::sqrt(3.0));
    CHECK(two.nodes[0] == doctest::Approx(0.5 - off));
    CHECK(two.nodes[1] == doctest::Approx(0.5 + off));
    CHECK(two.weights[0] == doctest::Approx(0.5));
    CHECK(two.weights[1] == doctest::Approx(0.5));

    double integral = 0.0; // int_0^1 x^3 dx, exact for the 2-point rule
    for (int i = 0; i < 2; ++i)
        integral += two.weights[i] * std::pow(two.nodes[i], 3);
    CHECK(integral == doctest::Approx(0.25).epsilon(1e-14));

    // weights positive, nodes strictly inside spans, multi-element layout
    const KnotVector kv = KnotVector::uniform_open(3, 4);
    const QuadratureRule rule = gauss_rule(kv, 4);
    REQUIRE(rule.num_points() == 16);
    for (int q = 0; q < rule.num_points(); ++q) {
        CHECK(rule.weights[q] > 0.0);
        const auto [a, b] = kv.element(rule.element_of(q));
        CHECK(rule.nodes[q] > a);
        CHECK(rule.nodes[q] < b);
    }
}
