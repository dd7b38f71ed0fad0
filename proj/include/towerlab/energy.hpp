#pragma once

#include <vector>

#include "towerlab/family.hpp"
#include "towerlab/fields.hpp"
#include "towerlab/greens.hpp"
#include "towerlab/grid.hpp"
#include "towerlab/projection.hpp"
#include "towerlab/quadrature.hpp"

namespace tl {

// eps^{eps p / (2(p - 1 + eps))} - 1
double zeta_of(int n, double epsilon);

struct EnergyConfig {
    int n = 3;
    double p = 5.0;
    double epsilon = 0.0;
    double zeta = 0.0;
    QuadratureOptions quadrature;

    static EnergyConfig make(int n, double epsilon, const QuadratureOptions& q = {});
};

struct WholeSpaceEnergy {
    double gradient = 0.0;   // ∫|∇Q|^2
    double potential = 0.0;  // ∫|Q|^{p+1}
    double energy = 0.0;     // ½ gradient - potential/(p+1)
    double change = 0.0;     // relative change of energy under quadrature refinement
    bool converged = false;
};

WholeSpaceEnergy whole_space_energy(const ScalarField& base, const QuadratureOptions& opt = {},
                                    double tolerance = 1e-6);

// ½ h^3 u^T A u - h^3/(p+1+eps) Σ|u|^{p+1+eps} over interior nodes (u = 0 on the boundary).
double domain_energy(const GridDomain& grid, const GridField& u, double epsilon);

struct DomainIntegrals {
    double gradient = 0.0;   // ∫_Ω |∇u|^2
    double potential = 0.0;  // ∫_Ω |u|^{p+1+eps}
    double energy = 0.0;
};

// Mesh-free energy of a projected bubble sum on a ball or annulus, scaled by
// `factor`. The gradient term is ∫_Ω (-Δu) u, exact since u = 0 on ∂Ω.
DomainIntegrals exact_domain_energy(const ExactProjection& u, double epsilon, const QuadratureOptions& opt = {},
                                    double factor = 1.0);

// Quadrature settings for integrals over the unit ball or annulus.
QuadratureOptions bounded_quadrature(const QuadratureOptions& base = {});

struct ConstantSet {
    int n = 3;
    double p = 5.0;
    double b = 0.0;             // b_n
    double gradient = 0.0;      // ∫|∇Q|^2
    double potential = 0.0;     // ∫|Q|^{p+1}
    double log_moment = 0.0;    // ∫|Q|^{p+1} log|Q|
    double gamma = 0.0;         // ½∫|∇Q|^2 - ∫|Q|^{p+1}/(p+1)
    double alpha = 0.0;         // b_n^{-2}/2
    double beta = 0.0;          // ∫|Q|^{p+1}/(n alpha)
    double chi = 0.0;           // ∫|Q|^{p+1}/(p+1)
    double eta = 0.0;           // ε-coefficient with the coupling lambda^{n-2} = beta Λ^2 eps
    double eta_bare = 0.0;   // same without the chi log(beta)/(p+1) term
    double w = 0.0;             // ∫|Q|^{p+1}/n
    double s_estimate = 0.0;    // gamma / (number of bubbles)
    double s_bubble = 0.0;      // energy of the standard bubble
    int bubbles = 1;
    bool log_flagged = false;   // quadrature nodes met the zero set of Q
};

ConstantSet constant_set(const BubbleSum& base, const QuadratureOptions& opt = {});

struct AlphaFit {
    std::vector<double> lambdas;
    std::vector<double> values;  // (∫|∇Q|^2 - ∫_Ω|∇PQ|^2) / (2 H Q(a)^2 lambda^{n-2})
    double target = 0.0;         // b_n^{-2}/2
    double max_error = 0.0;      // relative
};

// Single bubble on the unit ball centred at `center`.
AlphaFit fit_alpha(int n, const std::vector<double>& lambdas, const Vec& center, const QuadratureOptions& opt = {});

struct PairConfig {
    BubbleParams first, second;
    double separation = 0.1;  // distance to the boundary and between the centres

    // Empty when admissible, else the violated clause.
    std::string violation(const DomainSpec& domain) const;
    PairConfig swapped() const { return {second, first, separation}; }
};

struct TermPair {
    double direct = 0.0;
    double expansion = 0.0;
};

struct EnergyReport {
    double lambda1 = 0.0, lambda2 = 0.0;
    double direct = 0.0;
    double expansion = 0.0;
    double residual = 0.0;  // direct - expansion
    TermPair self_gradient[2];   // ∫_Ω |∇PQ_i|^2
    TermPair interaction;        // ∫_Ω ∇PQ_1·∇PQ_2
    TermPair cross;              // (1/(p+1))∫_Ω [|PQ_1+PQ_2|^{p+1} - |PQ_1|^{p+1} - |PQ_2|^{p+1}]
    TermPair self_potential[2];  // (1/(p+1))∫_Ω |PQ_i|^{p+1}
    double breakdown = 0.0;      // the expansion recombined from the term expansions
};

// Mesh-free check of the two-bubble J_0 expansion for each lambda (both
// bubbles take the same lambda).
std::vector<EnergyReport> expansion_check_j0(const DomainSpec& domain, const BubbleSum& base,
                                             const ConstantSet& constants, const PairConfig& pair,
                                             const std::vector<double>& lambdas,
                                             const QuadratureOptions& opt = {});

struct JepsEntry {
    double epsilon = 0.0;
    double lambda1 = 0.0, lambda2 = 0.0;
    double direct = 0.0;
    double expansion = 0.0;          // J_0 expansion plus the epsilon terms before the coupling
    double expansion_reduced = 0.0;  // 2γ + χ ε log ε + η ε + w ε Ψ with Ψ without the tower factors
    double residual = 0.0;
    double scaled_residual = 0.0;    // |residual| / epsilon
};

struct JepsReport {
    std::vector<JepsEntry> entries;
    bool monotone = false;
    double fitted_chi = 0.0;    // coefficient of ε log ε from the direct values
    double fitted_eta = 0.0;
    double chi_error = 0.0;     // relative to constants.chi
    double shift_factor = 2.0;  // Λ1Λ2 -> c Λ1Λ2
    double shift_epsilon = 0.0;
    double shift_direct = 0.0;
    double shift_predicted = 0.0;
    double shift_bare = 0.0; // same shift without the tower factors
    double shift_error = 0.0;
};

// λ_i^{n-2} = beta Λ_i^2 eps; Λ_i taken from pair.first/second.lambda.
JepsReport expansion_check_jeps(const DomainSpec& domain, const BubbleSum& base, const ConstantSet& constants,
                                const PairConfig& pair, const std::vector<double>& epsilons,
                                const QuadratureOptions& opt = {});

// λ from Λ and ε under the coupling.
double coupled_lambda(const ConstantSet& c, double big_lambda, double epsilon);

}  // namespace tl
