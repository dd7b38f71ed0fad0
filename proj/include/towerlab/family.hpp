#pragma once

#include <Eigen/Dense>

#include <array>
#include <vector>

#include "towerlab/field.hpp"
#include "towerlab/fields.hpp"

namespace tl {

// Angles ordered (t12, t13..t1n, t23..t2n); 2n-3 entries.
struct RotationChart {
    std::vector<double> theta;

    static RotationChart identity(int n) { return {std::vector<double>(2 * n - 3, 0.0)}; }
};

// R = R12 * prod_l R1l * prod_l R2l, each factor a plane rotation.
Eigen::MatrixXd rotation_matrix(int n, const RotationChart& chart);

// Index of the plane angle (i, j), 0-based axes with i in {0, 1} and j > i.
int chart_index(int n, int i, int j);

struct BubbleParams {
    double lambda = 1.0;
    Vec xi;
    std::array<double, 2> a{0.0, 0.0};
    RotationChart theta;

    static BubbleParams identity(int n);
    int dim() const { return xi.n; }
    Vec a_embedded() const;
    Vec xi_hat() const;  // R_theta xi
    Vec a_hat() const;   // R_theta a
};

// (x - xi)/|x - xi| - a |x - xi| / lambda; throws at x = xi.
Vec eta(double lambda, const Vec& xi, const Vec& a, const Vec& x);

// Member of the parameter family over a base field:
//   lambda^{-(n-2)/2} D(w)^{-(n-2)/2} base(R (w - a|w|^2) / D(w)),
//   w = (x - R xi)/lambda,  D(w) = 1 - 2 a.w + |a|^2 |w|^2 = |eta|^2.
// D is polynomial in w, so the bubble centre needs no special case. For a
// Kelvin-invariant base the equivalent form lambda^{-(n-2)/2} |w|^{2-n}
// base(R (w/|w|^2 - a)) is used where |w|^2 > D(w), which avoids the zero of D.
class FamilyMember {
public:
    FamilyMember(const BubbleParams& params, ScalarField base);

    double value(const Vec& x) const;
    // -Δ of the member from -Δ of the base (conformal weight (n+2)/2).
    double transported_source(const Vec& x, const ScalarField& base_source) const;
    std::vector<FeatureHint> features() const;
    ScalarField field() const;

private:
    struct Frame {
        Vec arg;
        double weight;  // lambda^{-1} D^{-1}, or its Kelvin counterpart
    };
    Frame frame(const Vec& x) const;

    BubbleParams params_;
    ScalarField base_;
    int n_;
    Eigen::MatrixXd rot_;
    Vec center_, a_;
};

double q_family(const BubbleParams& params, const ScalarField& base, const Vec& x);

// Exact image of a bubble superposition under the family map; every bubble
// is carried to another bubble.
BubbleSum transform(const BubbleSum& base, const BubbleParams& params);

}  // namespace tl
