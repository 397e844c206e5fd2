#include "qform/geometry.hpp"
#include "qform/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace qform;

TEST_CASE("wrap_angle normalizes to [0, 2*pi)") {
    CHECK(wrap_angle(0.0) == 0.0);
    CHECK(wrap_angle(-0.2) == doctest::Approx(kTwoPi - 0.2).epsilon(1e-12));
    CHECK(wrap_angle(4.0 * std::numbers::pi + 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(wrap_angle(std::numeric_limits<double>::infinity()), std::invalid_argument);
    CHECK_THROWS_AS(wrap_angle(std::nan("")), std::invalid_argument);
}

TEST_CASE("wrap_angle is idempotent") {
    Rng rng(11);
    for (int k = 0; k < 1000; ++k) {
        const double theta = rng.uniform(-50.0, 50.0);
        const double once = wrap_angle(theta);
        CHECK(once >= 0.0);
        CHECK(once < kTwoPi);
        CHECK(wrap_angle(once) == once);
    }
}

TEST_CASE("signed_angle_diff") {
    CHECK(signed_angle_diff(0.1, 0.1) == 0.0);
    CHECK(signed_angle_diff(0.1, 6.2) == doctest::Approx(0.1 - 6.2 + kTwoPi).epsilon(1e-12));
    CHECK(signed_angle_diff(6.2, 0.1) == doctest::Approx(-(0.1 - 6.2 + kTwoPi)).epsilon(1e-12));
    CHECK_THROWS_AS(signed_angle_diff(-0.1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(signed_angle_diff(0.0, kTwoPi), std::invalid_argument);
}

TEST_CASE("signed_angle_diff antisymmetry away from the -pi edge") {
    Rng rng(12);
    for (int k = 0; k < 1000; ++k) {
        const double a = rng.uniform(0.0, kTwoPi);
        const double b = rng.uniform(0.0, kTwoPi);
        const double ab = signed_angle_diff(a, b);
        if (ab == -std::numbers::pi) continue;
        CHECK(signed_angle_diff(b, a) == doctest::Approx(-ab).epsilon(1e-12));
    }
}

TEST_CASE("abs_to_rel") {
    SUBCASE("unit offset along x") {
        const FormationState y = abs_to_rel({{0, 0}, {1, 0}});
        REQUIRE(y.size() == 1);
        CHECK(y[0].r == doctest::Approx(1.0));
        CHECK(y[0].theta == doctest::Approx(0.0));
    }
    SUBCASE("two vertical edges") {
        const FormationState y = abs_to_rel({{0, 0}, {0, 2}, {0, 4}});
        REQUIRE(y.size() == 2);
        for (const PolarVec& e : y) {
            CHECK(e.r == doctest::Approx(2.0).epsilon(1e-12));
            CHECK(e.theta == doctest::Approx(std::numbers::pi / 2).epsilon(1e-12));
        }
    }
    SUBCASE("coincident agents are a degenerate edge") {
        CHECK_THROWS_AS(abs_to_rel({{0, 0}, {0, 0}}), std::invalid_argument);
    }
}

TEST_CASE("rel_to_abs") {
    SUBCASE("single edge from the origin") {
        const AbsState q = rel_to_abs({{1.0, 0.0}}, {0, 0});
        REQUIRE(q.size() == 2);
        CHECK(q[1].x() == doctest::Approx(1.0));
        CHECK(q[1].y() == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("cumulative sum from a shifted anchor") {
        const AbsState q = rel_to_abs({{2.0, std::numbers::pi / 2}, {2.0, std::numbers::pi / 2}}, {5, 5});
        REQUIRE(q.size() == 3);
        CHECK(q[1].isApprox(CartVec{5, 7}, 1e-12));
        CHECK(q[2].isApprox(CartVec{5, 9}, 1e-12));
    }
}

namespace {

FormationState random_formation(Rng& rng, int n) {
    FormationState y;
    for (int k = 0; k < n; ++k) y.push_back({rng.uniform(0.1, 50.0), rng.uniform(0.0, kTwoPi - 1e-9)});
    return y;
}

}  // namespace

TEST_CASE("round trip abs_to_rel(rel_to_abs(y)) == y") {
    Rng rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + static_cast<int>(rng.below(6));
        const FormationState y = random_formation(rng, n);
        const CartVec anchor{rng.uniform(-10, 10), rng.uniform(-10, 10)};
        const FormationState back = abs_to_rel(rel_to_abs(y, anchor));
        REQUIRE(back.size() == y.size());
        for (std::size_t k = 0; k < y.size(); ++k) {
            CHECK(back[k].r == doctest::Approx(y[k].r).epsilon(1e-12));
            const double dt = std::abs(back[k].theta - y[k].theta);
            CHECK(std::min(dt, kTwoPi - dt) < 1e-12);
        }
    }
}

TEST_CASE("rel_to_abs is translation invariant") {
    Rng rng(14);
    for (int trial = 0; trial < 50; ++trial) {
        const FormationState y = random_formation(rng, 4);
        const CartVec c1{rng.uniform(-5, 5), rng.uniform(-5, 5)};
        const CartVec c2{rng.uniform(-5, 5), rng.uniform(-5, 5)};
        const AbsState q1 = rel_to_abs(y, c1);
        const AbsState q2 = rel_to_abs(y, c2);
        const CartVec shift = c2 - c1;
        for (std::size_t k = 0; k < q1.size(); ++k) CHECK((q2[k] - q1[k]).isApprox(shift, 1e-12));
    }
}
