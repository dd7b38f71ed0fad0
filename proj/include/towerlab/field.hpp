#pragma once

#include <functional>
#include <vector>

#include "towerlab/vec.hpp"

namespace tl {

// A point where a field concentrates, with its length scale. Quadrature
// builds one spherical piece per hint. A singular hint marks an integrable
// point singularity of the integrand (e.g. a Newton kernel).
struct FeatureHint {
    Vec center;
    double scale = 1.0;
    bool singular = false;
};

struct ScalarField {
    int dim = 0;
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> grad;  // optional

    // Quadrature hints; they do not change the values.
    std::vector<FeatureHint> features;
    int symmetry_order = 1;         // invariant under rotation by 2pi/k in the (x1,x2)-plane
    bool axial = false;             // depends on x3..xn only through their norm
    bool kelvin_invariant = false;  // |x|^{2-n} f(x/|x|^2) = f(x)

    double operator()(const Vec& x) const { return value(x); }
    bool has_gradient() const { return static_cast<bool>(grad); }
    Vec gradient(const Vec& x) const;
};

}  // namespace tl
