#include <doctest.h>

#include <cmath>

#include "towerlab/greens.hpp"

using namespace tl;

// Reference values: tests/oracles/compute_oracles.py
TEST_CASE("ball Green's function by images") {
    GreensProvider g(DomainSpec::ball(3), GreensBackend::ClosedForm);
    CHECK(g.green(Vec(3, {0.3, 0.1, -0.2}), Vec(3, {-0.4, 0.25, 0.1})) ==
          doctest::Approx(0.031699093481624228).epsilon(1e-13));
    CHECK(g.green(Vec(3, {0.6, 0, 0}), Vec(3, {0, 0.5, 0.2})) == doctest::Approx(0.022980858110472298).epsilon(1e-13));
}

TEST_CASE("annulus Green's function by zonal series") {
    GreensOptions opt;
    opt.series_tol = 1e-15;
    opt.series_cap = 200;
    GreensProvider g(DomainSpec::annulus(3, 0.2), GreensBackend::Series, opt);
    CHECK(g.green(Vec(3, {0.3, 0.1, -0.2}), Vec(3, {-0.4, 0.25, 0.1})) ==
          doctest::Approx(0.0058636529620850199).epsilon(1e-12).scale(0));
    CHECK(g.green(Vec(3, {0.6, 0, 0}), Vec(3, {0, 0.5, 0.2})) == doctest::Approx(0.011943377707477366).epsilon(1e-12).scale(0));
    GreensProvider h(DomainSpec::annulus(3, 0.05), GreensBackend::Series, opt);
    CHECK(h.green(Vec(3, {0.1, 0, 0}), Vec(3, {-0.1, 0, 0})) == doctest::Approx(0.059237982242210707).epsilon(1e-12).scale(0));
}

TEST_CASE("Green's function is symmetric and vanishes on the boundary") {
    GreensProvider g(DomainSpec::annulus(3, 0.2), GreensBackend::Series);
    Vec x(3, {0.3, 0.4, 0.1}), y(3, {-0.2, 0.5, -0.3});
    CHECK(g.green(x, y) == doctest::Approx(g.green(y, x)).epsilon(1e-8));
    CHECK(std::abs(g.green(Vec(3, {0.0, 0.0, 1.0}), y)) < 1e-8);
    CHECK(std::abs(g.green(Vec(3, {0.2, 0.0, 0.0}), y)) < 1e-8);
}

TEST_CASE("antipodal pair in the ball has positive interaction") {
    GreensProvider g(DomainSpec::ball(3), GreensBackend::ClosedForm);
    HoleReport r = check_hole_criterion(g, 0.5, 20);
    CHECK(r.antipodal_phi == doctest::Approx(0.090187801085407357).epsilon(1e-12));
    CHECK_FALSE(r.all_negative);
}

TEST_CASE("domain specs are validated") {
    CHECK_THROWS(DomainSpec::annulus(3, 1.2).validate());
    CHECK_THROWS(DomainSpec::annulus(3, -0.1).validate());
    CHECK(DomainSpec::annulus(3, 0.1).boundary_distance(Vec(3, {0.5, 0, 0})) == doctest::Approx(0.4));
}
