#include <doctest.h>

#include <cmath>

#include "towerlab/energy.hpp"

using namespace tl;

TEST_CASE("epsilon factor") {
    CHECK(zeta_of(3, 0.02) == doctest::Approx(-0.047492218589755353).epsilon(1e-13));
    CHECK(zeta_of(3, 0.0) == 0.0);
}

TEST_CASE("single-bubble constants") {
    ConstantSet c = constant_set(single_bubble(3));
    CHECK(c.gradient == doctest::Approx(c.potential).epsilon(1e-8));
    CHECK(c.gamma == doctest::Approx(4.2736640683230423).epsilon(1e-6));
    CHECK(c.chi == doctest::Approx(c.potential / 6.0));
    CHECK(c.bubbles == 1);
    CHECK_FALSE(c.log_flagged);
}

TEST_CASE("pair admissibility") {
    PairConfig p;
    p.first = BubbleParams::identity(3);
    p.second = BubbleParams::identity(3);
    p.first.xi = Vec(3, {0.5, 0, 0});
    p.second.xi = Vec(3, {-0.5, 0, 0});
    DomainSpec dom = DomainSpec::annulus(3, 0.1);
    CHECK(p.violation(dom).empty());
    p.second.xi = Vec(3, {0.55, 0, 0});
    CHECK_FALSE(p.violation(dom).empty());
}

TEST_CASE("coupled scale") {
    ConstantSet c = constant_set(single_bubble(3));
    CHECK(coupled_lambda(c, 2.0, 0.01) == doctest::Approx(c.beta * 4.0 * 0.01));
}
