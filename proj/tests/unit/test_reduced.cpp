#include <doctest.h>

#include <cmath>

#include "towerlab/reduced.hpp"

using namespace tl;

TEST_CASE("reduced energy closed form") {
    PsiTerms t{0.3, 0.5, 0.2, 1.1, 0.9};
    const double l1 = 1.5, l2 = 0.7;
    const double ref = 0.5 * 0.3 * 1.21 * l1 * l1 + 0.5 * 0.5 * 0.81 * l2 * l2 - 0.2 * 1.1 * 0.9 * l1 * l2 +
                       std::log(l1 * l2);
    CHECK(psi_value(t, l1, l2) == doctest::Approx(ref).epsilon(1e-14));
    CHECK(t.phi() == doctest::Approx(std::sqrt(0.15) - 0.2));
}

TEST_CASE("stationary scales zero the scale gradient") {
    PsiTerms t{0.1, 0.2, 0.3, 1.1, 0.9};
    StationaryLambda s = stationary_lambda(t);
    REQUIRE(s.exists);
    const double h = 1e-6;
    const double d1 = (psi_value(t, s.big1 + h, s.big2) - psi_value(t, s.big1 - h, s.big2)) / (2 * h);
    const double d2 = (psi_value(t, s.big1, s.big2 + h) - psi_value(t, s.big1, s.big2 - h)) / (2 * h);
    CHECK(std::abs(d1) < 1e-7);
    CHECK(std::abs(d2) < 1e-7);
    CHECK(s.psi == doctest::Approx(psi_value(t, s.big1, s.big2)));
}

TEST_CASE("stationary scales need the interaction to dominate") {
    CHECK_FALSE(stationary_lambda(PsiTerms{0.3, 0.5, 0.2, 1.1, 0.9}).exists);
    CHECK(stationary_lambda(PsiTerms{0.1, 0.1, 0.3, 1.0, 1.0}).exists);
}

TEST_CASE("reduced coordinates round trip") {
    ConfigPair c;
    c.first = BubbleParams::identity(3);
    c.second = BubbleParams::identity(3);
    c.first.lambda = 2.0;
    c.second.lambda = 3.0;
    c.first.xi = Vec(3, {0.4, 0.1, 0.0});
    c.second.xi = Vec(3, {-0.3, 0.2, 0.1});
    c.first.a = {0.1, 0.0};
    Eigen::VectorXd z = to_reduced(c);
    CHECK(z.size() == reduced_dim(3));
    Eigen::VectorXd w = to_reduced(from_reduced(z, 3));
    CHECK((z - w).norm() < 1e-14);
}

TEST_CASE("constraint violations throw") {
    GreensProvider g(DomainSpec::annulus(3, 0.1), GreensBackend::Series);
    ConfigPair c;
    c.first = BubbleParams::identity(3);
    c.second = BubbleParams::identity(3);
    c.first.xi = Vec(3, {0.12, 0, 0});
    c.second.xi = Vec(3, {-0.5, 0, 0});
    CHECK_THROWS(psi(g, single_bubble(3), c));
}

TEST_CASE("gradient of the reduced energy matches central differences") {
    GreensProvider g(DomainSpec::annulus(3, 0.1), GreensBackend::Series);
    ConfigPair c;
    c.first = BubbleParams::identity(3);
    c.second = BubbleParams::identity(3);
    c.first.lambda = 1.3;
    c.second.lambda = 0.8;
    c.first.xi = Vec(3, {0.4, 0.1, 0.0});
    c.second.xi = Vec(3, {-0.3, 0.2, 0.1});
    BubbleSum base = single_bubble(3);
    PsiGradient gr = grad_psi(g, base, c);
    Eigen::VectorXd z = to_reduced(c);
    const double h = 1e-6;
    Eigen::VectorXd zp = z, zm = z;
    zp[0] += h;
    zm[0] -= h;
    CHECK(gr.g[0] == doctest::Approx((psi_reduced(g, base, zp) - psi_reduced(g, base, zm)) / (2 * h)).epsilon(1e-5));
}

TEST_CASE("hole criterion fails on the annulus at the default hole size") {
    GreensProvider g(DomainSpec::annulus(3, 0.05), GreensBackend::Series);
    HoleReport r = check_hole_criterion(g, 0.1, 20);
    CHECK_FALSE(r.all_negative);
    CHECK(r.max_phi > 0.0);
}
