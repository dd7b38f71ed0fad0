#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "towerlab/grid.hpp"
#include "towerlab/vec.hpp"

namespace tl {

enum class DomainKind { Ball, Annulus, Grid };

// Unit ball, annulus {delta < |x| < 1}, or a grid domain given by a level
// function (negative inside) on the box [-1, 1]^3.
struct DomainSpec {
    DomainKind kind = DomainKind::Ball;
    int n = 3;
    double delta = 0.0;
    LevelFunction level;  // Grid kind only

    static DomainSpec ball(int n);
    static DomainSpec annulus(int n, double delta);
    static DomainSpec grid(LevelFunction level);

    void validate() const;
    LevelFunction level_function() const;
    bool contains(const Vec& x) const;
    double boundary_distance(const Vec& x) const;  // exact for ball and annulus
    std::string describe() const;
};

// b_n |x|^{2-n}, the fundamental solution of -Δ.
double fundamental_solution(const Vec& x);

enum class GreensBackend { ClosedForm, Series, Grid };

struct GreensOptions {
    int series_cap = 80;
    double series_tol = 1e-8;
    GridSpec grid;
    double cg_tol = 1e-8;
};

struct GreensStatus {
    bool converged = true;
    int terms = 0;
    double tail = 0.0;
};

// G(x, y) = Γ(x - y) - H(x, y), -Δ_x G = δ_y, G = 0 on the boundary.
class GreensProvider {
public:
    GreensProvider(DomainSpec domain, GreensBackend backend, GreensOptions opt = {});

    const DomainSpec& domain() const { return domain_; }
    GreensBackend backend() const { return backend_; }
    int dim() const { return domain_.n; }

    double green(const Vec& x, const Vec& y, GreensStatus* st = nullptr) const;
    double regular_part(const Vec& x, const Vec& y, GreensStatus* st = nullptr) const;
    double robin(const Vec& x, GreensStatus* st = nullptr) const;

    // Grid backend: discrete harmonic extension of Γ(. - y), cached per source.
    std::shared_ptr<const GridField> regular_field(const Vec& y) const;
    std::shared_ptr<const GridDomain> grid_domain() const;
    std::size_t cached_solves() const;

private:
    double series_regular(const Vec& x, const Vec& y, GreensStatus* st) const;

    DomainSpec domain_;
    GreensBackend backend_;
    GreensOptions opt_;
    struct GridState;
    std::shared_ptr<GridState> grid_;
};

// Regular part of the unit-ball Green's function (image formula).
double ball_regular_part(const Vec& x, const Vec& y);

// H(x1,x1)^{1/2} H(x2,x2)^{1/2} - G(x1, x2)
double phi_pair(const GreensProvider& g, const Vec& xi1, const Vec& xi2);

struct HoleReport {
    double sigma = 0.0;
    int samples = 0;
    double min_phi = 0.0, max_phi = 0.0;
    bool all_negative = false;
    double antipodal_phi = 0.0;
    std::vector<double> values;
};

// Pairs on {|x1| = |x2| = sigma}: the antipodal pair along e1 first, then
// independent gaussian directions.
std::vector<std::pair<Vec, Vec>> sphere_pairs(int n, double sigma, int samples, unsigned seed = 1);

// Samples pairs with |x1| = |x2| = sigma (deterministic directions, the
// antipodal pair first) and reports the range of phi_pair.
HoleReport check_hole_criterion(const GreensProvider& g, double sigma, int samples, unsigned seed = 1);

// Shared grid for a domain/resolution pair (built once, reused).
std::shared_ptr<const GridDomain> shared_grid(const DomainSpec& domain, const GridSpec& spec);

}  // namespace tl
