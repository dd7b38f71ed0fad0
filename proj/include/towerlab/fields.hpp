#pragma once

#include <vector>

#include "towerlab/field.hpp"
#include "towerlab/quadrature.hpp"
#include "towerlab/vec.hpp"

namespace tl {

double critical_exponent(int n);  // p = (n+2)/(n-2)
double bubble_gamma(int n);       // [n(n-2)/4]^{(n-2)/4}
double sphere_area(int n);        // area of the unit sphere in R^n
double newton_constant(int n);    // b_n = 1 / ((n-2) |S^{n-1}|)

// Standard bubble profile U(r) with its first two radial derivatives.
struct RadialValues {
    double u, du, d2u;
};
RadialValues bubble_radial(int n, double r);

// sign * s^{-(n-2)/2} U((x - center)/s)
struct Bubble {
    double sign = 1.0;
    Vec center;
    double scale = 1.0;
};

// Signed superposition of standard bubbles. Each term solves -Δb = |b|^{p-1} b,
// so the Laplacian of the sum is known in closed form.
class BubbleSum {
public:
    BubbleSum() = default;
    BubbleSum(int n, std::vector<Bubble> bubbles, bool kelvin_invariant = false, int symmetry_order = 1);

    int dim() const { return n_; }
    double exponent() const { return p_; }
    const std::vector<Bubble>& bubbles() const { return bubbles_; }
    bool kelvin_invariant() const { return kelvin_; }
    int symmetry_order() const { return symmetry_; }

    double value(const Vec& x) const;
    Vec gradient(const Vec& x) const;
    // -Δ of the sum, i.e. sum of sign * b^p
    double source(const Vec& x) const;
    // value and source in one pass
    void value_and_source(const Vec& x, double& v, double& s) const;

    std::vector<FeatureHint> features() const;
    ScalarField field() const;
    ScalarField source_field() const;

private:
    int n_ = 0;
    double p_ = 0.0, gamma_ = 0.0;
    std::vector<Bubble> bubbles_;
    bool kelvin_ = false;
    int symmetry_ = 1;
};

BubbleSum single_bubble(int n);

ScalarField standard_bubble(int n);

struct TowerConfig {
    int n = 3;
    int k = 8;
    void validate() const;
};

struct TowerProfile {
    TowerConfig config;
    double mu = 0.0;
    std::vector<Vec> spikes;
    double gamma = 0.0;
    BubbleSum shape;
    ScalarField field;
};

double solve_mu(const TowerConfig& config);
TowerProfile build_tower(const TowerConfig& config);

// E = ΔQ + |Q|^{p-1} Q for a bubble superposition (exact Laplacian).
ScalarField tower_residual(const BubbleSum& shape);
ScalarField tower_residual(const TowerProfile& profile);

enum class NormFlavor { Sup, Lq };

struct NormOptions {
    QuadratureOptions quadrature;
    int shells = 200;
    double r_min = 1e-3, r_max = 1e3;
    int directions = 64;    // fixed angular sample set per shell
    int spike_samples = 16; // extra shells around each feature
};

// Sup flavor: sup of (1+|y|^{n-2})|f| over a fixed sample set.
// Lq flavor: || (1+|y|)^{n+2-2n/q} f ||_{L^q(R^n)}, requires n/2 < q < n.
double weighted_norm(const ScalarField& field, NormFlavor flavor, double q, const NormOptions& opt = {});

// |Q(x) - b_n ∫ |z-x|^{2-n} (-ΔQ)(z) dz|
double green_representation_check(const BubbleSum& shape, const Vec& x, const QuadratureOptions& opt = {});

Vec rotate_in_plane(const Vec& x, double angle);

}  // namespace tl
