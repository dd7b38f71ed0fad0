#include <doctest.h>

#include <cmath>

#include "towerlab/energy.hpp"
#include "towerlab/fields.hpp"

using namespace tl;

// Reference values: tests/oracles/compute_oracles.py
TEST_CASE("ring scale matches the closed-form sum") {
    CHECK(solve_mu({3, 8}) == doctest::Approx(0.015888607054969906).epsilon(1e-13));
    CHECK(solve_mu({4, 8}) == doctest::Approx(0.095238095238095238).epsilon(1e-13));
    CHECK(solve_mu({5, 8}) == doctest::Approx(0.15836548933456333).epsilon(1e-13));
    CHECK(solve_mu({3, 16}) == doctest::Approx(0.0022957627286499828).epsilon(1e-13));
    CHECK(solve_mu({4, 32}) == doctest::Approx(0.0058651026392961877).epsilon(1e-13));
}

TEST_CASE("ring scale in four dimensions is 6/(k^2-1)") {
    for (int k : {8, 12, 20}) CHECK(solve_mu({4, k}) == doctest::Approx(6.0 / (k * k - 1)).epsilon(1e-13));
}

TEST_CASE("tower configuration is validated") {
    CHECK_THROWS(build_tower({3, 7}));
    CHECK_THROWS(build_tower({6, 8}));
    CHECK_THROWS(build_tower({2, 8}));
}

TEST_CASE("standard bubble values") {
    const double r0[] = {1.3160740129524925, 2.8284271247461901, 7.621991222319221};
    const double r7[] = {1.0781698411762709, 1.8982732380846913, 4.1907238303623115};
    for (int n = 3; n <= 5; ++n) {
        ScalarField u = standard_bubble(n);
        Vec x(n);
        CHECK(u(x) == doctest::Approx(r0[n - 3]).epsilon(1e-14));
        x[n - 1] = 0.7;
        CHECK(u(x) == doctest::Approx(r7[n - 3]).epsilon(1e-14));
    }
}

TEST_CASE("standard bubble solves the critical equation") {
    for (int n = 3; n <= 5; ++n) {
        ScalarField e = tower_residual(single_bubble(n));
        for (double r : {0.0, 0.3, 1.0, 4.0}) {
            Vec x(n);
            x[0] = r;
            CHECK(std::abs(e(x)) < 1e-12);
        }
    }
}

TEST_CASE("tower profile is Kelvin invariant, rotation invariant and even") {
    TowerProfile t = build_tower({3, 8});
    CHECK(t.spikes.size() == 8);
    for (const Vec& x : {Vec(3, {0.3, 0.2, 0.1}), Vec(3, {1.7, -0.4, 0.9}), Vec(3, {0.05, 0.5, -0.3})}) {
        const double v = t.field(x);
        CHECK(std::pow(norm(x), -1.0) * t.field(invert(x)) == doctest::Approx(v).epsilon(1e-12));
        CHECK(t.field(rotate_in_plane(x, 2.0 * M_PI / 8)) == doctest::Approx(v).epsilon(1e-12));
        Vec y = x;
        y[2] = -y[2];
        CHECK(t.field(y) == doctest::Approx(v).epsilon(1e-12));
    }
}

TEST_CASE("single bubble energy matches the Sobolev constant") {
    const double ref[] = {4.2736640683230423, 26.318945069571623, 168.87205295254771};
    for (int n = 3; n <= 5; ++n) {
        WholeSpaceEnergy w = whole_space_energy(standard_bubble(n));
        CHECK(w.energy == doctest::Approx(ref[n - 3]).epsilon(1e-6));
        CHECK(w.gradient == doctest::Approx(w.potential).epsilon(1e-8));
    }
}

TEST_CASE("weighted norm rejects an exponent outside (n/2, n)") {
    ScalarField e = tower_residual(build_tower({4, 8}));
    CHECK_THROWS(weighted_norm(e, NormFlavor::Lq, 1.5));
    CHECK_THROWS(weighted_norm(e, NormFlavor::Lq, 4.5));
}
