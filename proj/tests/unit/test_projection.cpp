#include <doctest.h>

#include <cmath>

#include "towerlab/family.hpp"
#include "towerlab/projection.hpp"

using namespace tl;

TEST_CASE("exact projection vanishes on both boundary spheres") {
    TowerProfile t = build_tower({3, 8});
    BubbleParams p = BubbleParams::identity(3);
    p.lambda = 0.2;
    p.xi = Vec(3, {0.5, 0.1, 0.0});
    p.a = {0.1, 0.0};
    ExactProjection e(DomainSpec::annulus(3, 0.1), transform(t.shape, p));
    CHECK(e.boundary_residual() < 1e-10);
    // the correction is harmonic
    Vec x(3, {-0.3, 0.4, 0.2});
    const double h = 1e-3;
    double lap = -6.0 * e.correction(x);
    for (int i = 0; i < 3; ++i) {
        Vec d(3);
        d[i] = h;
        lap += e.correction(x + d) + e.correction(x - d);
    }
    CHECK(std::abs(lap / (h * h)) < 1e-3);
}

TEST_CASE("exact projection in four dimensions") {
    BubbleParams p = BubbleParams::identity(4);
    p.lambda = 0.1;
    p.xi = Vec(4, {0.0, 0.4, 0.1, 0.0});
    ExactProjection e(DomainSpec::annulus(4, 0.2), transform(single_bubble(4), p));
    CHECK(e.boundary_residual() < 1e-10);
}

TEST_CASE("projection correction approaches its leading term") {
    BubbleParams templ = BubbleParams::identity(3);
    templ.xi = Vec(3, {0.4, 0.0, 0.0});
    OrderFit f = expansion_order_fit_exact(DomainSpec::annulus(3, 0.1), templ, single_bubble(3),
                                           {0.2, 0.1, 0.05, 0.025});
    CHECK(f.slope > 1.3);
    CHECK(f.coefficient_error < 0.05);
}

TEST_CASE("grid projection agrees with the exact one") {
    BubbleParams p = BubbleParams::identity(3);
    p.lambda = 0.15;
    p.xi = Vec(3, {0.5, 0.0, 0.0});
    DomainSpec dom = DomainSpec::annulus(3, 0.1);
    ProjectionResult r = project_bubble(dom, p, single_bubble(3), GridSpec{32, 1.0});
    ExactProjection e(dom, transform(single_bubble(3), p));
    Vec x(3, {-0.5, 0.125, 0.0});
    CHECK(r.pq.interpolate(x) == doctest::Approx(e.value(x)).epsilon(0.05));
}
