#include "towerlab/projection.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <gsl/gsl_integration.h>
#include <gsl/gsl_sf_gegenbauer.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tl {

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec perpendicular(const Vec& e) {
    Vec p = std::abs(e[0]) < 0.9 ? unit(e.n, 0) : unit(e.n, 1);
    p = p - dot(p, e) * e;
    return (1.0 / norm(p)) * p;
}

// Fibonacci directions in the first three coordinates.
std::vector<Vec> fibonacci_directions(int n, int count) {
    std::vector<Vec> out;
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < count; ++i) {
        double y = 1.0 - 2.0 * (i + 0.5) / count;
        double r = std::sqrt(1.0 - y * y);
        Vec d(n);
        d[0] = r * std::cos(golden * i);
        d[1] = r * std::sin(golden * i);
        d[2] = y;
        out.push_back(d);
    }
    return out;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double m = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

ExactProjection::ExactProjection(const DomainSpec& domain, BubbleSum q, int max_degree)
    : domain_(domain), q_(std::move(q)) {
    domain_.validate();
    if (domain_.kind == DomainKind::Grid) throw std::invalid_argument("ExactProjection: ball or annulus only");
    if (q_.dim() != domain_.n) throw std::invalid_argument("ExactProjection: dimension mismatch");
    if (domain_.kind == DomainKind::Ball) return;

    const int n = domain_.n;
    const double nu = 0.5 * (n - 2);
    const double d = domain_.delta;
    const int nodes = max_degree + 32;
    gsl_integration_fixed_workspace* ws =
        gsl_integration_fixed_alloc(gsl_integration_fixed_gegenbauer, nodes, -1.0, 1.0, nu - 0.5, 0.0);
    const double* tn = gsl_integration_fixed_nodes(ws);
    const double* wn = gsl_integration_fixed_weights(ws);
    std::vector<double> norm_l(max_degree + 1);
    for (int l = 0; l <= max_degree; ++l)
        norm_l[l] = std::exp(std::log(kPi) + (1.0 - 2.0 * nu) * std::log(2.0) + std::lgamma(l + 2.0 * nu) -
                             std::lgamma(l + 1.0) - std::log(l + nu) - 2.0 * std::lgamma(nu));
    std::vector<double> c(max_degree + 1);
    for (const Bubble& b : q_.bubbles()) {
        Term t;
        double zr = norm(b.center);
        t.axis = zr > 0.0 ? (1.0 / zr) * b.center : unit(n, 0);
        Vec perp = perpendicular(t.axis);
        std::vector<double> f(max_degree + 1, 0.0), g(max_degree + 1, 0.0);
        for (int k = 0; k < nodes; ++k) {
            double tk = tn[k];
            Vec x = tk * t.axis + std::sqrt(std::max(0.0, 1.0 - tk * tk)) * perp;
            double fo = -hole_image(b, x);
            double gi = -ball_image(b, 1.0, d * x);
            gsl_sf_gegenpoly_array(max_degree, nu, tk, c.data());
            for (int l = 0; l <= max_degree; ++l) {
                f[l] += wn[k] * fo * c[l];
                g[l] += wn[k] * gi * c[l];
            }
        }
        double scale = 0.0;
        for (int l = 0; l <= max_degree; ++l) {
            f[l] /= norm_l[l];
            g[l] /= norm_l[l];
            scale = std::max(scale, std::abs(f[l]) + std::abs(g[l]));
        }
        int last = 0;
        for (int l = 0; l <= max_degree; ++l)
            if (std::abs(f[l]) + std::abs(g[l]) > 1e-16 * scale) last = l;
        t.inner.resize(last + 1);
        t.outer.resize(last + 1);
        for (int l = 0; l <= last; ++l) {
            const int m = l + n - 2;
            double bt = (g[l] - f[l] * std::pow(d, l)) / (1.0 - std::pow(d, 2 * l + n - 2));
            t.outer[l] = bt;
            t.inner[l] = f[l] - bt * std::pow(d, m);
        }
        degree_ = std::max(degree_, last);
        terms_.push_back(std::move(t));
    }
    gsl_integration_fixed_free(ws);
}

double ExactProjection::ball_image(const Bubble& b, double radius, const Vec& x) const {
    const int n = domain_.n;
    const double nu = 0.5 * (n - 2);
    const double s = b.scale;
    const double z2 = norm2(b.center);
    const double big = s * s + radius * radius + z2;
    const double disc = std::sqrt(std::max(0.0, big * big - 4.0 * radius * radius * z2));
    const double cm = 2.0 * z2 / (big + disc);
    const double expr = cm * norm2(x) - 2.0 * dot(x, b.center) + big - radius * radius * cm;
    return b.sign * bubble_gamma(n) * std::pow(2.0 * s / expr, nu);
}

double ExactProjection::hole_image(const Bubble& b, const Vec& x) const {
    const int n = domain_.n;
    const double d = domain_.delta;
    const double r2 = norm2(x);
    Vec y = (d * d / r2) * x;
    return std::pow(d / std::sqrt(r2), n - 2) * ball_image(b, d, y);
}

double ExactProjection::correction(const Vec& x) const {
    double v = 0.0;
    for (const Bubble& b : q_.bubbles()) v += ball_image(b, 1.0, x);
    if (domain_.kind == DomainKind::Ball) return v;
    const int n = domain_.n;
    const double nu = 0.5 * (n - 2);
    const double d = domain_.delta;
    const double r = norm(x);
    std::vector<double> c(degree_ + 1);
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        const Bubble& b = q_.bubbles()[i];
        const Term& t = terms_[i];
        v += hole_image(b, x);
        double ct = std::clamp(dot(x, t.axis) / r, -1.0, 1.0);
        int deg = static_cast<int>(t.inner.size()) - 1;
        gsl_sf_gegenpoly_array(std::max(deg, 1), nu, ct, c.data());
        double rl = 1.0, dm = std::pow(d / r, n - 2);
        for (int l = 0; l <= deg; ++l) {
            v += (t.inner[l] * rl + t.outer[l] * dm) * c[l];
            rl *= r;
            dm *= d / r;
        }
    }
    return v;
}

double ExactProjection::value(const Vec& x) const { return q_.value(x) - correction(x); }

double ExactProjection::boundary_residual() const {
    const int n = domain_.n;
    double worst = 0.0;
    auto dirs = fibonacci_directions(n, 60);
    for (const Vec& e : dirs) {
        worst = std::max(worst, std::abs(value(e)));
        if (domain_.kind == DomainKind::Annulus) worst = std::max(worst, std::abs(value(domain_.delta * e)));
    }
    return worst;
}

ScalarField ExactProjection::field() const {
    ScalarField f;
    f.dim = domain_.n;
    auto self = std::make_shared<ExactProjection>(*this);
    f.value = [self](const Vec& x) { return self->value(x); };
    f.features = q_.features();
    return f;
}

GridField harmonic_extension(const DomainSpec& domain, const ScalarField& boundary, const GridSpec& spec,
                             SolveReport* report) {
    auto grid = shared_grid(domain, spec);
    SolveReport rep;
    GridField out = grid->solve(boundary.value, nullptr, &rep);
    if (report) *report = rep;
    if (!rep.converged)
        throw std::runtime_error("harmonic_extension: CG did not converge, residual " + std::to_string(rep.residual));
    return out;
}

ProjectionResult project_bubble(const DomainSpec& domain, const BubbleParams& params, const BubbleSum& base,
                                const GridSpec& spec) {
    auto grid = shared_grid(domain, spec);
    Vec center = params.xi_hat();
    if (domain.boundary_distance(center) < 2.0 * grid->spacing())
        throw std::invalid_argument("project_bubble: bubble centre within 2h of the boundary");
    BubbleSum qa = transform(base, params);
    ProjectionResult r;
    r.params = params;
    auto qv = [&qa](const Vec& x) { return qa.value(x); };
    r.phi = grid->solve(qv, nullptr, &r.solve);
    if (!r.solve.converged) throw std::runtime_error("project_bubble: CG did not converge");
    r.pq = grid->blank();
    for (std::size_t idx : grid->interior_nodes()) r.pq.values[idx] = qa.value(grid->node(idx)) - r.phi.values[idx];
    return r;
}

std::vector<Vec> probe_set(const DomainSpec& domain, const Vec& xi_hat, double h, double rotation, double min_center) {
    const int n = domain.n;
    std::vector<Vec> out;
    auto dirs = fibonacci_directions(n, 40);
    for (double r : {0.55, 0.35, 0.75, 0.45, 0.65, 0.85, 0.25}) {
        for (const Vec& e : dirs) {
            Vec x = r * e;
            if (!domain.contains(x) || domain.boundary_distance(x) < 3.0 * h) continue;
            if (norm(x - xi_hat) < min_center) continue;
            out.push_back(rotate_in_plane(x, rotation));
            if (out.size() == 24) return out;
        }
    }
    return out;
}

namespace {

OrderFit finish_fit(OrderFit fit) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < fit.lambdas.size(); ++i) {
        lx.push_back(std::log(fit.lambdas[i]));
        ly.push_back(std::log(fit.residuals[i]));
    }
    fit.slope = least_squares_slope(lx, ly);
    std::size_t best = std::min_element(fit.lambdas.begin(), fit.lambdas.end()) - fit.lambdas.begin();
    fit.coefficient_error =
        std::abs(fit.coefficients[best] - fit.predicted_coefficient) / std::abs(fit.predicted_coefficient);
    return fit;
}

}  // namespace

OrderFit expansion_order_fit(const DomainSpec& domain, const BubbleParams& templ, const BubbleSum& base,
                             const std::vector<double>& lambdas, const GridSpec& spec, double rotation) {
    if (lambdas.size() < 4) throw std::invalid_argument("expansion_order_fit: need at least 4 lambda values");
    auto grid = shared_grid(domain, spec);
    const int n = domain.n;
    const double bn = newton_constant(n);
    Vec center = templ.xi_hat();
    auto probes = probe_set(domain, center, grid->spacing(), rotation);
    SolveReport rep;
    GridField hfield = grid->solve([center](const Vec& x) { return fundamental_solution(x - center); }, nullptr, &rep);
    OrderFit fit;
    fit.predicted_coefficient = base.value(-templ.a_hat());
    for (double lam : lambdas) {
        BubbleParams p = templ;
        p.lambda = lam;
        ProjectionResult pr = project_bubble(domain, p, base, spec);
        double worst = 0.0;
        std::vector<double> coef;
        const double scale = std::pow(lam, 0.5 * (n - 2)) / bn;
        for (const Vec& x : probes) {
            double phi = pr.phi.interpolate(x);
            double hx = hfield.interpolate(x);
            worst = std::max(worst, std::abs(phi - scale * fit.predicted_coefficient * hx));
            coef.push_back(phi / (scale * hx));
        }
        fit.lambdas.push_back(lam);
        fit.residuals.push_back(worst);
        fit.coefficients.push_back(median(coef));
    }
    return finish_fit(fit);
}

OrderFit expansion_order_fit_exact(const DomainSpec& domain, const BubbleParams& templ, const BubbleSum& base,
                                   const std::vector<double>& lambdas) {
    if (lambdas.size() < 4) throw std::invalid_argument("expansion_order_fit: need at least 4 lambda values");
    const int n = domain.n;
    const double bn = newton_constant(n);
    GreensProvider g(domain, domain.kind == DomainKind::Ball ? GreensBackend::ClosedForm : GreensBackend::Series);
    Vec center = templ.xi_hat();
    auto probes = probe_set(domain, center, 0.0);
    OrderFit fit;
    fit.predicted_coefficient = base.value(-templ.a_hat());
    for (double lam : lambdas) {
        BubbleParams p = templ;
        p.lambda = lam;
        ExactProjection pr(domain, transform(base, p));
        double worst = 0.0;
        std::vector<double> coef;
        const double scale = std::pow(lam, 0.5 * (n - 2)) / bn;
        for (const Vec& x : probes) {
            double phi = pr.correction(x);
            double hx = g.regular_part(x, center);
            worst = std::max(worst, std::abs(phi - scale * fit.predicted_coefficient * hx));
            coef.push_back(phi / (scale * hx));
        }
        fit.lambdas.push_back(lam);
        fit.residuals.push_back(worst);
        fit.coefficients.push_back(median(coef));
    }
    return finish_fit(fit);
}

ResidualNorms nonlinear_residual(const GridDomain& grid, const GridField& u, double epsilon) {
    if (epsilon < 0.0) throw std::invalid_argument("nonlinear_residual: epsilon must be >= 0");
    const double q = critical_exponent(3) - 1.0 + epsilon;
    Eigen::VectorXd v = grid.gather(u);
    Eigen::VectorXd r = -(grid.matrix() * v);
    for (long i = 0; i < v.size(); ++i) r(i) += std::pow(std::abs(v(i)), q) * v(i);
    const double h = grid.spacing();
    return {std::sqrt(h * h * h * r.squaredNorm()), r.cwiseAbs().maxCoeff()};
}

NewtonResult newton_refine(const GridDomain& grid, const GridField& u0, double epsilon, const NewtonOptions& opt) {
    const double q = critical_exponent(3) - 1.0 + epsilon;
    const double h3 = std::pow(grid.spacing(), 3);
    const auto& a = grid.matrix();
    Eigen::VectorXd f = Eigen::VectorXd::Zero(grid.unknowns());
    if (opt.source)
        for (int u = 0; u < grid.unknowns(); ++u) f(u) = opt.source(grid.node(grid.interior_nodes()[u]));

    auto residual = [&](const Eigen::VectorXd& v) {
        Eigen::VectorXd r = a * v - f;
        if (opt.nonlinear)
            for (long i = 0; i < v.size(); ++i) r(i) -= std::pow(std::abs(v(i)), q) * v(i);
        return r;
    };
    auto l2 = [&](const Eigen::VectorXd& r) { return std::sqrt(h3 * r.squaredNorm()); };

    NewtonResult out;
    Eigen::VectorXd v = grid.gather(u0);
    Eigen::VectorXd r = residual(v);
    double rn = l2(r);
    const double r0 = rn;
    out.residuals.push_back(rn);
    for (int it = 0; it < opt.max_iters; ++it) {
        if (rn <= opt.tol * std::max(1.0, r0)) {
            out.converged = true;
            break;
        }
        Eigen::SparseMatrix<double> jac = a;
        if (opt.nonlinear) {
            for (long i = 0; i < v.size(); ++i) jac.coeffRef(i, i) -= (q + 1.0) * std::pow(std::abs(v(i)), q);
        }
        Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::DiagonalPreconditioner<double>> solver;
        solver.setTolerance(opt.inner_tol);
        solver.setMaxIterations(opt.inner_max_iters);
        solver.compute(jac);
        Eigen::VectorXd dv = solver.solve(-r);
        double step = 1.0;
        Eigen::VectorXd trial = v + dv;
        Eigen::VectorXd rt = residual(trial);
        while (l2(rt) >= rn && step > opt.step_floor) {
            step *= 0.5;
            trial = v + step * dv;
            rt = residual(trial);
        }
        double rtn = l2(rt);
        if (!(rtn < rn)) {
            // no damping factor down to the floor reduces the residual
            out.diverged = true;
            break;
        }
        v = trial;
        r = rt;
        rn = rtn;
        out.steps.push_back(step);
        out.residuals.push_back(rn);
    }
    if (!out.converged && !out.diverged && rn <= opt.tol * std::max(1.0, r0)) out.converged = true;
    out.u = grid.blank();
    grid.scatter(v, out.u);
    out.trivial = out.converged && v.cwiseAbs().maxCoeff() < 1e-8;
    return out;
}

}  // namespace tl
