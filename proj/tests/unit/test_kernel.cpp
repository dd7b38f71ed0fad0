#include <doctest.h>

#include <cmath>

#include "towerlab/fields.hpp"
#include "towerlab/kernel.hpp"

using namespace tl;

TEST_CASE("kernel members match parameter derivatives") {
    KernelBasis basis(build_tower({3, 8}).field);
    CHECK(basis.size() == 9);
    for (const Vec& x : {Vec(3, {0.3, 0.2, 0.1}), Vec(3, {-0.7, 0.4, 0.5})})
        for (int a = 0; a < basis.size(); ++a) {
            const double scale = 1.0 + std::abs(basis.value(a, x));
            CHECK(derivative_identity_residual(basis, a, x, 1e-4) < 1e-5 * scale);
        }
}

TEST_CASE("the opposite sign on the a-derivatives does not match") {
    KernelBasis basis(build_tower({3, 8}).field);
    const int n = 3;
    Vec x(3, {0.3, 0.2, 0.1});
    for (int a : {n + 2, n + 3}) {
        CHECK(identity_sign(n, a, SignConvention::Derived) == -identity_sign(n, a, SignConvention::FlippedA));
        const double z = std::abs(basis.value(a, x));
        CHECK(derivative_identity_residual(basis, a, x, 1e-4, SignConvention::FlippedA) ==
              doctest::Approx(2.0 * z).epsilon(1e-4));
    }
}

TEST_CASE("kernel members solve the linearized equation") {
    KernelBasis basis(standard_bubble(3));
    for (int a = 0; a < basis.size(); ++a) CHECK(linearized_residual(basis, a, Vec(3, {0.4, -0.3, 0.2})) < 1e-4);
}
