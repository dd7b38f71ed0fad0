#include <doctest.h>

#include <cmath>

#include "towerlab/family.hpp"
#include "towerlab/fields.hpp"

using namespace tl;

TEST_CASE("identity parameters reproduce the base") {
    TowerProfile t = build_tower({4, 8});
    BubbleParams id = BubbleParams::identity(4);
    for (const Vec& x : {Vec(4, {0.2, 0.1, -0.3, 0.4}), Vec(4, {1.1, 0.0, 0.0, 0.2})})
        CHECK(q_family(id, t.field, x) == doctest::Approx(t.field(x)).epsilon(1e-14));
}

TEST_CASE("rotation matrices are orthogonal") {
    RotationChart c{{0.3, -0.2, 0.7, 0.1, -0.5}};
    Eigen::MatrixXd r = rotation_matrix(4, c);
    CHECK((r * r.transpose() - Eigen::MatrixXd::Identity(4, 4)).norm() < 1e-14);
    CHECK(r.determinant() == doctest::Approx(1.0));
}

TEST_CASE("bubble transform agrees with the family map") {
    TowerProfile t = build_tower({3, 8});
    BubbleParams p = BubbleParams::identity(3);
    p.lambda = 0.2;
    p.xi = Vec(3, {0.3, -0.1, 0.05});
    p.a = {0.15, -0.1};
    p.theta.theta = {0.4, -0.2, 0.3};
    BubbleSum s = transform(t.shape, p);
    for (const Vec& x : {Vec(3, {0.1, 0.2, 0.3}), Vec(3, {0.35, -0.05, 0.0}), Vec(3, {-0.6, 0.4, 0.2})})
        CHECK(s.value(x) == doctest::Approx(q_family(p, t.field, x)).epsilon(1e-11));
}

TEST_CASE("a single bubble is carried to a bubble centred at xi") {
    BubbleParams p = BubbleParams::identity(3);
    p.lambda = 0.1;
    p.xi = Vec(3, {0.2, 0.0, 0.0});
    BubbleSum s = transform(single_bubble(3), p);
    REQUIRE(s.bubbles().size() == 1);
    CHECK(norm(s.bubbles()[0].center - p.xi) < 1e-15);
    CHECK(s.bubbles()[0].scale == doctest::Approx(0.1));
}
