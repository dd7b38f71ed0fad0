#include "towerlab/kernel.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

#include "towerlab/fields.hpp"

namespace tl {

namespace {

Vec reflect(const Vec& x, int j) {
    Vec y = x;
    y[j] = -y[j];
    return y;
}

bool even_in(const ScalarField& f, int j) {
    static const double probes[][5] = {{0.31, -0.47, 0.22, 0.13, -0.05},
                                       {-1.7, 0.9, -0.6, 0.4, 0.25},
                                       {0.05, 0.02, 1.3, -0.8, 0.6}};
    for (const auto& pr : probes) {
        Vec x(f.dim);
        for (int i = 0; i < f.dim; ++i) x[i] = pr[i];
        double a = f(x), b = f(reflect(x, j));
        if (std::abs(a - b) > 1e-12 * (1.0 + std::abs(a))) return false;
    }
    return true;
}

void check_alpha(int n, int alpha) {
    if (alpha < 0 || alpha >= 3 * n) throw std::out_of_range("kernel index out of range");
}

}  // namespace

KernelBasis::KernelBasis(ScalarField base) : base_(std::move(base)), n_(base_.dim) {
    if (!base_.has_gradient()) throw std::invalid_argument("KernelBasis: base needs an analytic gradient");
    for (int j = 0; j < n_; ++j) even_.push_back(even_in(base_, j));
}

void KernelBasis::values(const Vec& x, double* out) const {
    const int n = n_;
    const double q = base_(x);
    const Vec g = base_.gradient(x);
    const double r2 = norm2(x);
    const double z0 = 0.5 * (n - 2) * q + dot(g, x);
    out[0] = z0;
    for (int i = 0; i < n; ++i) out[1 + i] = g[i];
    out[n + 1] = -x[1] * g[0] + x[0] * g[1];
    out[n + 2] = -2.0 * x[0] * z0 + r2 * g[0];
    out[n + 3] = -2.0 * x[1] * z0 + r2 * g[1];
    for (int l = 3; l <= n; ++l) {
        out[n + l + 1] = -x[l - 1] * g[0] + x[0] * g[l - 1];
        out[2 * n + l - 1] = -x[l - 1] * g[1] + x[1] * g[l - 1];
    }
}

double KernelBasis::value(int alpha, const Vec& x) const {
    check_alpha(n_, alpha);
    double buf[3 * kMaxDim];
    values(x, buf);
    return buf[alpha];
}

ScalarField KernelBasis::member(int alpha) const {
    check_alpha(n_, alpha);
    ScalarField f;
    f.dim = n_;
    auto self = std::make_shared<KernelBasis>(*this);
    f.value = [self, alpha](const Vec& x) { return self->value(alpha, x); };
    f.features = base_.features;
    return f;
}

std::vector<int> KernelBasis::parity(int alpha) const {
    check_alpha(n_, alpha);
    const int n = n_;
    std::vector<int> p(n, 1);
    if (alpha >= 1 && alpha <= n) {
        p[alpha - 1] = -1;
    } else if (alpha == n + 1) {
        p[0] = p[1] = -1;
    } else if (alpha == n + 2) {
        p[0] = -1;
    } else if (alpha == n + 3) {
        p[1] = -1;
    } else if (alpha >= n + 4 && alpha <= 2 * n + 1) {
        p[0] = -1;
        p[alpha - n - 2] = -1;
    } else if (alpha >= 2 * n + 2) {
        p[1] = -1;
        p[alpha - 2 * n] = -1;
    }
    for (int j = 0; j < n; ++j)
        if (!even_[j]) p[j] = 0;
    return p;
}

double identity_sign(int n, int alpha, SignConvention conv) {
    check_alpha(n, alpha);
    if (alpha <= n) return -1.0;
    if (alpha == n + 2 || alpha == n + 3) return conv == SignConvention::Derived ? -1.0 : 1.0;
    return 1.0;
}

BubbleParams parameter_shift(int n, int alpha, double t) {
    check_alpha(n, alpha);
    BubbleParams p = BubbleParams::identity(n);
    if (alpha == 0) {
        p.lambda += t;
    } else if (alpha <= n) {
        p.xi[alpha - 1] = t;
    } else if (alpha == n + 1) {
        p.theta.theta[chart_index(n, 0, 1)] = t;
    } else if (alpha == n + 2 || alpha == n + 3) {
        p.a[alpha - n - 2] = t;
    } else if (alpha <= 2 * n + 1) {
        p.theta.theta[chart_index(n, 0, alpha - n - 2)] = t;
    } else {
        p.theta.theta[chart_index(n, 1, alpha - 2 * n)] = t;
    }
    return p;
}

double derivative_identity_residual(const KernelBasis& basis, int alpha, const Vec& x, double h,
                                    SignConvention conv) {
    if (!(h > 0.0)) throw std::invalid_argument("derivative_identity_residual: h must be positive");
    const int n = basis.dim();
    double fp = q_family(parameter_shift(n, alpha, h), basis.base(), x);
    double fm = q_family(parameter_shift(n, alpha, -h), basis.base(), x);
    double fd = (fp - fm) / (2.0 * h);
    return std::abs(identity_sign(n, alpha, conv) * fd - basis.value(alpha, x));
}

double linearized_residual(const KernelBasis& basis, int alpha, const Vec& x, double h) {
    const int n = basis.dim();
    const double p = critical_exponent(n);
    const double z = basis.value(alpha, x);
    double lap = 0.0;
    for (int i = 0; i < n; ++i) {
        Vec e = unit(n, i);
        lap += (basis.value(alpha, x + h * e) - 2.0 * z + basis.value(alpha, x - h * e)) / (h * h);
    }
    return std::abs(lap + p * std::pow(std::abs(basis.base()(x)), p - 1.0) * z);
}

namespace {

Eigen::MatrixXd gram_pass(const KernelBasis& basis, const QuadratureOptions& q) {
    const int n = basis.dim();
    const int m = basis.size();
    const double p = critical_exponent(n);
    std::vector<FeatureHint> centers = basis.base().features;
    if (centers.empty()) centers.push_back({Vec(n), 1.0, false});
    auto sums = integrate_many(n, centers, 1, false, q, m * m, [&](const Vec& x, double* out) {
        double z[3 * kMaxDim];
        basis.values(x, z);
        const double w = std::pow(std::abs(basis.base()(x)), p - 1.0);
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) out[a * m + b] = w * z[a] * z[b];
    });
    Eigen::MatrixXd g(m, m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) g(a, b) = sums[a * m + b];
    return g;
}

}  // namespace

GramReport gram_matrix(const KernelBasis& basis, const GramOptions& opt) {
    const int n = basis.dim();
    const int m = basis.size();
    GramReport r;
    r.n = n;
    r.matrix = gram_pass(basis, opt.quadrature);
    r.asymmetry = (r.matrix - r.matrix.transpose()).cwiseAbs().maxCoeff();

    double diag = r.matrix.diagonal().cwiseAbs().maxCoeff();
    std::vector<std::vector<int>> par;
    for (int a = 0; a < m; ++a) par.push_back(basis.parity(a));
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            bool forced = false;
            for (int j = 0; j < n; ++j) forced = forced || par[a][j] * par[b][j] < 0;
            if (forced) r.max_parity_entry = std::max(r.max_parity_entry, std::abs(r.matrix(a, b)) / diag);
        }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(r.matrix);
    r.singular_values = svd.singularValues();
    const double smax = r.singular_values(0), smin = r.singular_values(m - 1);
    r.condition = smin > 0.0 ? smax / smin : INFINITY;
    for (int i = 0; i < m; ++i)
        if (r.singular_values(i) > 1e-10 * smax) ++r.rank;

    for (auto [a, b] : {std::pair{1, n + 2}, std::pair{2, n + 3}}) {
        CouplingBlock cb;
        cb.first = a;
        cb.second = b;
        cb.block << r.matrix(a, a), r.matrix(a, b), r.matrix(b, a), r.matrix(b, b);
        cb.determinant = cb.block.determinant();
        Eigen::JacobiSVD<Eigen::Matrix2d> s2(cb.block);
        cb.condition = s2.singularValues()(0) / s2.singularValues()(1);
        r.blocks.push_back(cb);
    }

    if (opt.check_convergence) {
        Eigen::MatrixXd fine = gram_pass(basis, opt.quadrature.refined(opt.refinement));
        for (int a = 0; a < m; ++a)
            for (int b = a; b < m; ++b)
                if (std::abs(fine(a, b) - r.matrix(a, b)) > opt.flag_tolerance * diag) r.flagged.push_back({a, b});
    }
    return r;
}

}  // namespace tl
