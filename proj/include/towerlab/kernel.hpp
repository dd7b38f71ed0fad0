#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "towerlab/family.hpp"
#include "towerlab/field.hpp"
#include "towerlab/quadrature.hpp"

namespace tl {

// Kernel index layout (3n functions):
//   0           dilation            nu Q + x.grad Q
//   1..n        translations        d_i Q
//   n+1         rotation in (1,2)   -x2 d1 Q + x1 d2 Q
//   n+2, n+3    Kelvin-type         -2 x_i z0 + |x|^2 z_i,  i = 1, 2
//   n+4..2n+1   rotation in (1,l)   -x_l z1 + x1 z_l,  l = 3..n
//   2n+2..3n-1  rotation in (2,l)   -x_l z2 + x2 z_l,  l = 3..n
class KernelBasis {
public:
    explicit KernelBasis(ScalarField base);

    int dim() const { return n_; }
    int size() const { return 3 * n_; }
    const ScalarField& base() const { return base_; }

    double value(int alpha, const Vec& x) const;
    // All 3n values at x from one gradient evaluation.
    void values(const Vec& x, double* out) const;
    ScalarField member(int alpha) const;

    // Parity of z_alpha under x_j -> -x_j (+1 even, -1 odd) when the base is
    // even in every coordinate; 0 when the base is not even in x_j.
    std::vector<int> parity(int alpha) const;

private:
    ScalarField base_;
    int n_;
    std::vector<bool> even_;
};

// Sign attached to each parameter derivative in z_alpha = sign * d/dA_alpha Q_A.
enum class SignConvention {
    Derived,  // minus for lambda, xi and a; plus for theta
    FlippedA  // minus for lambda and xi; plus for a and theta
};

double identity_sign(int n, int alpha, SignConvention conv);

// Parameter record moved by t along the coordinate that generates z_alpha.
BubbleParams parameter_shift(int n, int alpha, double t);

// |sign * central difference of q_family along alpha at the identity - z_alpha(x)|
double derivative_identity_residual(const KernelBasis& basis, int alpha, const Vec& x, double h,
                                    SignConvention conv = SignConvention::Derived);

// |Δz + p|Q|^{p-1} z| at x, Laplacian by central differences with step h.
double linearized_residual(const KernelBasis& basis, int alpha, const Vec& x, double h = 1e-3);

struct CouplingBlock {
    int first = 0, second = 0;
    Eigen::Matrix2d block;
    double determinant = 0.0;
    double condition = 0.0;
};

struct GramReport {
    int n = 0;
    Eigen::MatrixXd matrix;
    Eigen::VectorXd singular_values;
    double condition = 0.0;
    int rank = 0;
    double asymmetry = 0.0;        // max |M - M^T|
    double max_parity_entry = 0.0; // largest entry forced to zero by parity, relative to the diagonal scale
    std::vector<CouplingBlock> blocks;
    std::vector<std::pair<int, int>> flagged;  // entries that moved more than the tolerance under refinement
};

struct GramOptions {
    QuadratureOptions quadrature{6, 0.05, 1.8, 2e4, 12, 5, 32, 6, 4.0};
    double refinement = 1.5;       // second pass for the convergence flags
    double flag_tolerance = 1e-3;  // relative to the diagonal scale
    bool check_convergence = true;
};

GramReport gram_matrix(const KernelBasis& basis, const GramOptions& opt = {});

}  // namespace tl
