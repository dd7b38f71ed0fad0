#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "towerlab/field.hpp"

namespace tl {

// Gauss-Legendre nodes and weights on [a, b].
std::vector<std::pair<double, double>> gauss_legendre(int order, double a, double b);

struct QuadratureOptions {
    int radial_order = 8;         // nodes per radial panel
    double inner_radius = 0.05;   // first panel [0, inner_radius], in units of the piece scale
    double panel_ratio = 1.6;     // geometric growth of the radial panels
    double outer_radius = 2e4;    // start of the inverted tail
    int tail_order = 16;
    int polar_order = 6;          // nodes per polar panel (5 panels graded to the equator)
    int azimuth = 48;             // per 2pi for satellite pieces, per sector for axis pieces
    int fiber = 8;                // nodes on S^{n-3} when the integrand is not axial
    double partition_exponent = 4.0;
    double support_radius = 0.0;  // nodes with |x| beyond it are dropped (0: none)

    // Every resolution parameter multiplied by `factor` (radial panels refined too).
    QuadratureOptions refined(double factor) const;
};

// One spherical product rule around centers[center], restricted to an
// azimuth window and counted `multiplicity` times (orbit symmetry).
struct Piece {
    int center = 0;
    double multiplicity = 1.0;
    double phi_lo = 0.0;
    double phi_hi = 0.0;  // phi_hi <= phi_lo means the full circle
};

// One piece per center, or one piece per symmetry orbit when the centers
// are invariant under rotation by 2pi/k in the (x1,x2)-plane.
std::vector<Piece> make_pieces(const std::vector<FeatureHint>& centers, int symmetry_order);

using NodeVisitor = std::function<void(const Vec&, double)>;

// Visits nodes x with weights w so that sum w f(x) approximates the integral
// of f over R^n. Weights include the partition of unity over `centers`.
// `axial` integrands are sampled on a single fiber point.
void visit_nodes(int n, const std::vector<FeatureHint>& centers, const std::vector<Piece>& pieces,
                 bool axial, const QuadratureOptions& opt, const NodeVisitor& visit);

// Convenience wrapper: integral of f using the hints carried by `shape`.
double integrate(const ScalarField& shape, const std::function<double(const Vec&)>& f,
                 const QuadratureOptions& opt = {});

// Several integrands at once over the same nodes.
std::vector<double> integrate_many(int n, const std::vector<FeatureHint>& centers, int symmetry_order,
                                   bool axial, const QuadratureOptions& opt, int count,
                                   const std::function<void(const Vec&, double*)>& f);

}  // namespace tl
