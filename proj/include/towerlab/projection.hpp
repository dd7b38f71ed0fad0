#pragma once

#include <memory>
#include <string>
#include <vector>

#include "towerlab/family.hpp"
#include "towerlab/fields.hpp"
#include "towerlab/greens.hpp"
#include "towerlab/grid.hpp"

namespace tl {

// Exact projection of a bubble superposition onto H^1_0 of a ball or annulus,
// in any supported dimension. Each bubble's boundary trace is matched by
// point-charge images (inside the unit sphere and outside the inner sphere);
// the remaining mismatch of the two images is removed by a zonal series.
class ExactProjection {
public:
    ExactProjection(const DomainSpec& domain, BubbleSum q, int max_degree = 64);

    const BubbleSum& bubbles() const { return q_; }
    const DomainSpec& domain() const { return domain_; }
    double correction(const Vec& x) const;   // harmonic extension of the trace
    double value(const Vec& x) const;        // PQ = Q - correction
    double source(const Vec& x) const { return q_.source(x); }  // -Δ PQ
    // max |PQ| over a fixed sample of boundary points
    double boundary_residual() const;
    ScalarField field() const;

private:
    struct Term {
        Vec axis;
        std::vector<double> inner, outer;  // coefficients of r^l and r^{-(l+n-2)}
    };
    double ball_image(const Bubble& b, double radius, const Vec& x) const;
    double hole_image(const Bubble& b, const Vec& x) const;

    DomainSpec domain_;
    BubbleSum q_;
    std::vector<Term> terms_;
    int degree_ = 0;
};

struct ProjectionResult {
    BubbleParams params;
    GridField phi;  // harmonic extension of the trace of Q_A
    GridField pq;   // Q_A - phi, zero outside the domain
    SolveReport solve;
};

// Discrete harmonic extension of the trace of `boundary` (n = 3 grids).
GridField harmonic_extension(const DomainSpec& domain, const ScalarField& boundary, const GridSpec& spec = {},
                             SolveReport* report = nullptr);

ProjectionResult project_bubble(const DomainSpec& domain, const BubbleParams& params, const BubbleSum& base,
                                const GridSpec& spec = {});

// 24 points at distance >= min_center from xi_hat and >= 3h from the boundary,
// optionally rotated in the (x1,x2)-plane.
std::vector<Vec> probe_set(const DomainSpec& domain, const Vec& xi_hat, double h, double rotation = 0.0,
                           double min_center = 0.25);

struct OrderFit {
    std::vector<double> lambdas;
    std::vector<double> residuals;     // max over probes of |phi - leading|
    std::vector<double> coefficients;  // median over probes of phi / (b_n^{-1} lambda^{(n-2)/2} H)
    double slope = 0.0;
    double predicted_coefficient = 0.0;  // Q(-a_hat) (= Q(a_hat) for even bases)
    double coefficient_error = 0.0;      // relative, extrapolated to lambda -> 0
};

// Fits log r(lambda) against log lambda. The leading term uses the grid
// harmonic extension of Γ(. - xi_hat) so the discretization cancels.
OrderFit expansion_order_fit(const DomainSpec& domain, const BubbleParams& templ, const BubbleSum& base,
                             const std::vector<double>& lambdas, const GridSpec& spec = {}, double rotation = 0.0);

// Mesh-free counterpart (any n): the correction of the exact projection is
// compared with the expansion on a probe set.
OrderFit expansion_order_fit_exact(const DomainSpec& domain, const BubbleParams& templ, const BubbleSum& base,
                                   const std::vector<double>& lambdas);

struct ResidualNorms {
    double l2 = 0.0;
    double max = 0.0;
};

// Δ_h u + |u|^{p-1+eps} u over interior nodes (u = 0 on the boundary).
ResidualNorms nonlinear_residual(const GridDomain& grid, const GridField& u, double epsilon);

struct NewtonOptions {
    int max_iters = 10;
    double step_floor = 1.0 / 256.0;
    double tol = 1e-10;
    int inner_max_iters = 2000;
    double inner_tol = 1e-8;                      // relative, for the linearized solve
    bool nonlinear = true;                        // false: linear Poisson surrogate -Δu = f
    std::function<double(const Vec&)> source;     // f for the surrogate
};

struct NewtonResult {
    GridField u;
    std::vector<double> residuals;  // grid-L2 residual before each step and at the end
    std::vector<double> steps;      // accepted damping factors
    bool converged = false;
    bool diverged = false;          // the damped step stopped reducing the residual
    bool trivial = false;           // converged to u = 0
};

NewtonResult newton_refine(const GridDomain& grid, const GridField& u0, double epsilon, const NewtonOptions& opt = {});

}  // namespace tl
