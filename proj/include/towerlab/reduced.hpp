#pragma once

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "towerlab/energy.hpp"
#include "towerlab/family.hpp"
#include "towerlab/fields.hpp"
#include "towerlab/greens.hpp"

namespace tl {

// Two parameter sets with Λ_i stored in the lambda fields.
struct ConfigPair {
    BubbleParams first, second;
    double separation = 0.05;     // dist(ξ_i, ∂Ω) > δ and |ξ_1 - ξ_2| > δ
    double lambda_window = 1e-3;  // window < Λ_i < 1/window

    std::string violation(const DomainSpec& domain) const;  // empty when admissible
    ConfigPair swapped() const { return {second, first, separation, lambda_window}; }
    PairConfig pair() const { return {first, second, separation}; }
};

// Green's data and tower values entering Ψ.
struct PsiTerms {
    double h1 = 0.0, h2 = 0.0, g12 = 0.0;  // H(ξ1,ξ1), H(ξ2,ξ2), G(ξ1,ξ2)
    double q1 = 0.0, q2 = 0.0;             // Q(â1), Q(â2)
    double phi() const;                    // sqrt(h1 h2) - g12
};

PsiTerms psi_terms(const GreensProvider& g, const BubbleSum& base, const Vec& xi1, const Vec& xi2, const Vec& a1,
                   const Vec& a2);
double psi_value(const PsiTerms& t, double big1, double big2);

// ½H11 Q1² Λ1² + ½H22 Q2² Λ2² - G12 Q1 Q2 Λ1 Λ2 + log Λ1Λ2; throws naming the violated constraint.
double psi(const GreensProvider& g, const BubbleSum& base, const ConfigPair& pair);

// Reduced coordinates z = (Λ1, Λ2, ξ1, ξ2, a1, a2) in hatted variables, 2n + 6 entries.
int reduced_dim(int n);
Eigen::VectorXd to_reduced(const ConfigPair& pair);
ConfigPair from_reduced(const Eigen::VectorXd& z, int n, const ConfigPair& limits = {});
double psi_reduced(const GreensProvider& g, const BubbleSum& base, const Eigen::VectorXd& z);

struct PsiGradient {
    Eigen::VectorXd g;
    bool one_sided = false;  // a coordinate was near a constraint
};

PsiGradient grad_psi(const GreensProvider& g, const BubbleSum& base, const ConfigPair& pair, double rel_step = 1e-5);

// Central second differences over the listed reduced coordinates.
Eigen::MatrixXd hessian_psi(const GreensProvider& g, const BubbleSum& base, const Eigen::VectorXd& z,
                            const std::vector<int>& coords, double step = 1e-4);

struct StationaryLambda {
    bool exists = false;
    double big1 = 0.0, big2 = 0.0, psi = 0.0;                  // with the tower factors
    double big1_bare = 0.0, big2_bare = 0.0, psi_bare = 0.0;  // without them
    double psi_at_bare = 0.0;  // Ψ evaluated at the bare Λ
};

// Closed-form solution of ∂Ψ/∂Λ1 = ∂Ψ/∂Λ2 = 0 at fixed (ξ, a).
StationaryLambda stationary_lambda(const PsiTerms& t);

struct NegativeDirection {
    bool exists = false;
    double d1 = 0.0, d2 = 0.0;  // unit, positive components
    double eigenvalue = 0.0;
    double determinant = 0.0;
    double phi = 0.0;
};

NegativeDirection negative_direction(const PsiTerms& t);
NegativeDirection negative_direction(const GreensProvider& g, const BubbleSum& base, const Vec& xi1, const Vec& xi2,
                                     const Vec& a1, const Vec& a2);

// Radius of the a-disk used by the search: 0.5, or 0.2 when Q changes sign on |a| <= 0.5.
struct ARange {
    double radius = 0.5;
    double min_q = 0.0, max_q = 0.0;  // Q over the disk actually used
    bool sign_change = false;         // on |a| <= 0.5
};
ARange a_range(const BubbleSum& base);

struct BracketOptions {
    int pair_samples = 64;   // pairs on S
    int a_radii = 4;         // a-grid: radii per disk
    int a_angles = 8;        // a-grid: angles per circle
    int interior_samples = 400;  // candidate pairs for W^l_rho
    double rho = 0.05;
    double l_fraction = 0.5;     // l = l_fraction |max_S φ|, so that S lies in W^l_rho
    double r_max = 80.0;         // escalation cap for R
    unsigned seed = 1;
    BracketOptions doubled() const;
};

struct LevelBracket {
    bool hole_ok = false;
    bool valid = false;
    double sigma = 0.0, R = 0.0;
    int attempts = 0;
    double A = 0.0, B = 0.0;
    double boundary_max = 0.0;   // r in {1/R, R}, a in the disk
    double edge_max = 0.0;       // r in {1/R, R}, a on the circle
    double hyperbola_min = 0.0;  // min over W^l_rho x I x disk
    double l = 0.0;
    int interior_pairs = 0;
    int skipped = 0;             // (ξ, a) samples without a negative direction
    ARange a;
    HoleReport hole;
    std::string failure;
};

LevelBracket level_bracket(const GreensProvider& g, const BubbleSum& base, double sigma, double R,
                           const BracketOptions& opt = {});

struct SaddleOptions {
    bool symmetric = true;  // ξ2 = -ξ1, Λ1 = Λ2, a2 = -a1
    int seeds = 10;
    unsigned seed = 1;
    double tolerance = 1e-6;
    int max_iters = 60;
    int directions = 32;  // phase-1 directions on S
};

struct SaddleResult {
    ConfigPair critical;
    double psi = 0.0;
    double grad_norm = 0.0;
    std::vector<double> hessian_eigenvalues;  // (Λ, ξ)-block
    double lambda_curvature = 0.0;            // d^T Ψ_ΛΛ d along the negative direction
    bool converged = false;
    bool saddle = false;
    bool in_bracket = false;
    bool pinned = false;
    std::vector<double> trace;         // gradient norm per Newton step
    std::vector<double> seed_values;   // Ψ reached from each perturbed seed
    std::vector<bool> seed_converged;
    std::vector<double> seed_grads;    // final gradient norm from each seed
    double seed_spread = 0.0;
    StationaryLambda stationary;
    std::string failure;
};

SaddleResult saddle_search(const GreensProvider& g, const BubbleSum& base, const LevelBracket& bracket,
                           const SaddleOptions& opt = {});

struct AssembleReport {
    GridField u;
    double epsilon = 0.0, zeta = 0.0;
    double lambda1 = 0.0, lambda2 = 0.0;
    double min_value = 0.0, max_value = 0.0;
    bool sign_changing = false;
    double center_value[2] = {0.0, 0.0};     // u at ξ1, ξ2
    double center_profile[2] = {0.0, 0.0};   // (1+ζ) λ^{-(n-2)/2} Q(0) there
    ResidualNorms residual;
    double energy = 0.0;        // mesh-free
    double energy_grid = 0.0;   // grid quadrature of the same
    double energy_target = 0.0; // 2 (k+1) S-estimate
    double energy_error = 0.0;  // relative
    bool ok = false;
    std::string failure;
};

// u = (1+ζ)(PQ1 + PQ2) with λ_i^{n-2} = β Λ_i² ε.
AssembleReport assemble_ansatz(const DomainSpec& domain, const BubbleSum& base, const ConstantSet& constants,
                               const ConfigPair& critical, double epsilon, const GridSpec& spec = {},
                               const QuadratureOptions& opt = {});

struct LandscapeRow {
    double radius = 0.0, big = 0.0, psi = 0.0, phi = 0.0;
};

// Ψ over (|ξ1|, Λ) in the symmetric class with a = 0, ξ1 on the x1-axis.
std::vector<LandscapeRow> landscape(const GreensProvider& g, const BubbleSum& base, int radii, int lambdas,
                                    double log_lambda_min, double log_lambda_max, double margin = 0.02);

}  // namespace tl
