#include "towerlab/energy.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tl {

namespace {

std::vector<FeatureHint> union_features(const BubbleSum& a, const BubbleSum& b) {
    std::vector<FeatureHint> f = a.features();
    for (const auto& h : b.features()) f.push_back(h);
    return f;
}

bool all_axial(const BubbleSum& a) { return a.field().axial; }

GreensProvider provider_for(const DomainSpec& domain) {
    return GreensProvider(domain, domain.kind == DomainKind::Ball ? GreensBackend::ClosedForm : GreensBackend::Series);
}

}  // namespace

double zeta_of(int n, double epsilon) {
    if (epsilon <= 0.0) return 0.0;
    const double p = critical_exponent(n);
    return std::pow(epsilon, epsilon * p / (2.0 * (p - 1.0 + epsilon))) - 1.0;
}

EnergyConfig EnergyConfig::make(int n, double epsilon, const QuadratureOptions& q) {
    if (epsilon < 0.0) throw std::invalid_argument("EnergyConfig: epsilon must be >= 0");
    EnergyConfig c;
    c.n = n;
    c.p = critical_exponent(n);
    c.epsilon = epsilon;
    c.zeta = zeta_of(n, epsilon);
    c.quadrature = q;
    return c;
}

namespace {

std::vector<double> whole_space_integrals(const ScalarField& base, const QuadratureOptions& opt) {
    const int n = base.dim;
    const double p1 = critical_exponent(n) + 1.0;
    std::vector<FeatureHint> centers = base.features;
    if (centers.empty()) centers.push_back({Vec(n), 1.0, false});
    return integrate_many(n, centers, base.symmetry_order, base.axial, opt, 2, [&](const Vec& x, double* out) {
        out[0] = norm2(base.gradient(x));
        out[1] = std::pow(std::abs(base(x)), p1);
    });
}

}  // namespace

WholeSpaceEnergy whole_space_energy(const ScalarField& base, const QuadratureOptions& opt, double tolerance) {
    if (!base.has_gradient()) throw std::invalid_argument("whole_space_energy: base needs an analytic gradient");
    const double p1 = critical_exponent(base.dim) + 1.0;
    auto coarse = whole_space_integrals(base, opt);
    auto fine = whole_space_integrals(base, opt.refined(1.5));
    WholeSpaceEnergy e;
    e.gradient = fine[0];
    e.potential = fine[1];
    e.energy = 0.5 * fine[0] - fine[1] / p1;
    double ec = 0.5 * coarse[0] - coarse[1] / p1;
    e.change = std::abs(e.energy - ec) / std::abs(e.energy);
    e.converged = e.change < tolerance;
    return e;
}

double domain_energy(const GridDomain& grid, const GridField& u, double epsilon) {
    const double q = critical_exponent(3) + 1.0 + epsilon;
    const double h3 = std::pow(grid.spacing(), 3);
    Eigen::VectorXd v = grid.gather(u);
    double grad = v.dot(grid.matrix() * v);
    double pot = 0.0;
    for (long i = 0; i < v.size(); ++i) pot += std::pow(std::abs(v(i)), q);
    return h3 * (0.5 * grad - pot / q);
}

QuadratureOptions bounded_quadrature(const QuadratureOptions& base) {
    QuadratureOptions o = base;
    o.support_radius = 1.0;
    return o;
}

DomainIntegrals exact_domain_energy(const ExactProjection& u, double epsilon, const QuadratureOptions& opt,
                                    double factor) {
    const DomainSpec& domain = u.domain();
    const int n = domain.n;
    const double q = critical_exponent(n) + 1.0 + epsilon;
    const BubbleSum& bs = u.bubbles();
    auto vals = integrate_many(n, bs.features(), 1, all_axial(bs), bounded_quadrature(opt), 2,
                               [&](const Vec& x, double* out) {
                                   if (!domain.contains(x)) return;
                                   double v, s;
                                   bs.value_and_source(x, v, s);
                                   v = factor * (v - u.correction(x));
                                   out[0] = factor * s * v;
                                   out[1] = std::pow(std::abs(v), q);
                               });
    DomainIntegrals d;
    d.gradient = vals[0];
    d.potential = vals[1];
    d.energy = 0.5 * vals[0] - vals[1] / q;
    return d;
}

ConstantSet constant_set(const BubbleSum& base, const QuadratureOptions& opt) {
    const int n = base.dim();
    ConstantSet c;
    c.n = n;
    c.p = critical_exponent(n);
    c.b = newton_constant(n);
    c.bubbles = static_cast<int>(base.bubbles().size());
    const double p1 = c.p + 1.0;
    ScalarField f = base.field();
    bool flagged = false;
    Vec jitter(n);
    for (int i = 0; i < n; ++i) jitter[i] = 1e-7 * (i + 1);
    auto vals = integrate_many(n, f.features, f.symmetry_order, f.axial, opt, 3, [&](const Vec& x, double* out) {
        double v = base.value(x);
        out[0] = norm2(base.gradient(x));
        out[1] = std::pow(std::abs(v), p1);
        double a = std::abs(v);
        if (a < 1e-12) {
            flagged = true;
            a = std::abs(base.value(x + jitter));
        }
        out[2] = a > 1e-300 ? std::pow(a, p1) * std::log(a) : 0.0;
    });
    c.gradient = vals[0];
    c.potential = vals[1];
    c.log_moment = vals[2];
    c.log_flagged = flagged;
    c.gamma = 0.5 * c.gradient - c.potential / p1;
    c.alpha = 0.5 / (c.b * c.b);
    c.beta = c.potential / (n * c.alpha);
    c.chi = c.potential / p1;
    c.w = c.potential / n;
    const double bracket = 2.0 * (c.potential / (p1 * p1) - c.log_moment / p1);
    c.eta = bracket + c.chi * std::log(c.beta);
    c.eta_bare = bracket + c.chi * std::log(c.beta) / p1;
    c.s_estimate = c.gamma / c.bubbles;
    BubbleSum u = single_bubble(n);
    c.s_bubble = whole_space_energy(u.field(), opt).energy;
    return c;
}

AlphaFit fit_alpha(int n, const std::vector<double>& lambdas, const Vec& center, const QuadratureOptions& opt) {
    AlphaFit fit;
    BubbleSum u = single_bubble(n);
    const double bn = newton_constant(n);
    fit.target = 0.5 / (bn * bn);
    const double whole = whole_space_energy(u.field(), opt).gradient;
    const DomainSpec ball = DomainSpec::ball(n);
    const double h = ball_regular_part(center, center);
    const double q0 = u.value(Vec(n));
    for (double lam : lambdas) {
        BubbleParams p = BubbleParams::identity(n);
        p.lambda = lam;
        p.xi = center;
        ExactProjection pq(ball, transform(u, p));
        double inside = exact_domain_energy(pq, 0.0, opt).gradient;
        double v = (whole - inside) / (2.0 * h * q0 * q0 * std::pow(lam, n - 2));
        fit.lambdas.push_back(lam);
        fit.values.push_back(v);
        fit.max_error = std::max(fit.max_error, std::abs(v - fit.target) / fit.target);
    }
    return fit;
}

std::string PairConfig::violation(const DomainSpec& domain) const {
    const Vec x1 = first.xi_hat(), x2 = second.xi_hat();
    if (!domain.contains(x1) || domain.boundary_distance(x1) <= separation) return "dist(xi_1, boundary) > delta";
    if (!domain.contains(x2) || domain.boundary_distance(x2) <= separation) return "dist(xi_2, boundary) > delta";
    if (norm(x1 - x2) <= separation) return "|xi_1 - xi_2| > delta";
    if (std::hypot(first.a[0], first.a[1]) > 0.5) return "|a_1| <= 1/2";
    if (std::hypot(second.a[0], second.a[1]) > 0.5) return "|a_2| <= 1/2";
    return {};
}

namespace {

struct PairIntegrals {
    double grad11, grad22, grad12, pot1, pot2, pot12;
};

PairIntegrals pair_integrals(const DomainSpec& domain, const BubbleSum& q1, const BubbleSum& q2, double epsilon,
                             const QuadratureOptions& opt) {
    const int n = domain.n;
    const double q = critical_exponent(n) + 1.0 + epsilon;
    ExactProjection e1(domain, q1), e2(domain, q2);
    bool axial = all_axial(q1) && all_axial(q2);
    auto v = integrate_many(n, union_features(q1, q2), 1, axial, bounded_quadrature(opt), 6,
                            [&](const Vec& x, double* out) {
                                if (!domain.contains(x)) return;
                                double v1, s1, v2, s2;
                                q1.value_and_source(x, v1, s1);
                                q2.value_and_source(x, v2, s2);
                                v1 -= e1.correction(x);
                                v2 -= e2.correction(x);
                                out[0] = s1 * v1;
                                out[1] = s2 * v2;
                                out[2] = s1 * v2;
                                out[3] = std::pow(std::abs(v1), q);
                                out[4] = std::pow(std::abs(v2), q);
                                out[5] = std::pow(std::abs(v1 + v2), q);
                            });
    return {v[0], v[1], v[2], v[3], v[4], v[5]};
}

// J_0 expansion pieces for the pair at the given lambdas.
struct PairExpansion {
    double h1, h2, g12, q1, q2;
};

PairExpansion pair_geometry(const GreensProvider& g, const BubbleSum& base, const BubbleParams& a,
                            const BubbleParams& b) {
    PairExpansion e;
    Vec x1 = a.xi_hat(), x2 = b.xi_hat();
    e.h1 = g.robin(x1);
    e.h2 = g.robin(x2);
    e.g12 = g.green(x1, x2);
    e.q1 = base.value(a.a_hat());
    e.q2 = base.value(b.a_hat());
    return e;
}

double j0_expansion(const ConstantSet& c, const PairExpansion& e, double l1, double l2) {
    const int n = c.n;
    return 2.0 * c.gamma + c.alpha * e.h1 * e.q1 * e.q1 * std::pow(l1, n - 2) +
           c.alpha * e.h2 * e.q2 * e.q2 * std::pow(l2, n - 2) -
           2.0 * c.alpha * e.g12 * e.q1 * e.q2 * std::pow(l1 * l2, 0.5 * (n - 2));
}

}  // namespace

std::vector<EnergyReport> expansion_check_j0(const DomainSpec& domain, const BubbleSum& base,
                                             const ConstantSet& c, const PairConfig& pair,
                                             const std::vector<double>& lambdas, const QuadratureOptions& opt) {
    std::string bad = pair.violation(domain);
    if (!bad.empty()) throw std::invalid_argument("expansion_check_j0: constraint violated: " + bad);
    const int n = domain.n;
    const double p1 = c.p + 1.0;
    GreensProvider g = provider_for(domain);
    PairExpansion geo = pair_geometry(g, base, pair.first, pair.second);
    std::vector<EnergyReport> out;
    for (double lam : lambdas) {
        BubbleParams a = pair.first, b = pair.second;
        a.lambda = lam;
        b.lambda = lam;
        PairIntegrals in = pair_integrals(domain, transform(base, a), transform(base, b), 0.0, opt);
        EnergyReport r;
        r.lambda1 = lam;
        r.lambda2 = lam;
        const double s1 = geo.h1 * geo.q1 * geo.q1 * std::pow(lam, n - 2);
        const double s2 = geo.h2 * geo.q2 * geo.q2 * std::pow(lam, n - 2);
        const double mix = geo.g12 * geo.q1 * geo.q2 * std::pow(lam * lam, 0.5 * (n - 2));
        r.self_gradient[0] = {in.grad11, c.gradient - 2.0 * c.alpha * s1};
        r.self_gradient[1] = {in.grad22, c.gradient - 2.0 * c.alpha * s2};
        r.interaction = {in.grad12, 2.0 * c.alpha * mix};
        r.cross = {(in.pot12 - in.pot1 - in.pot2) / p1, 4.0 * c.alpha * mix};
        r.self_potential[0] = {in.pot1 / p1, c.potential / p1 - 2.0 * c.alpha * s1};
        r.self_potential[1] = {in.pot2 / p1, c.potential / p1 - 2.0 * c.alpha * s2};
        auto combine = [&](auto pick) {
            return 0.5 * (pick(r.self_gradient[0]) + pick(r.self_gradient[1])) + pick(r.interaction) -
                   pick(r.self_potential[0]) - pick(r.self_potential[1]) - pick(r.cross);
        };
        r.direct = combine([](const TermPair& t) { return t.direct; });
        r.breakdown = combine([](const TermPair& t) { return t.expansion; });
        r.expansion = j0_expansion(c, geo, lam, lam);
        r.residual = r.direct - r.expansion;
        out.push_back(r);
    }
    return out;
}

double coupled_lambda(const ConstantSet& c, double big_lambda, double epsilon) {
    return std::pow(c.beta * big_lambda * big_lambda * epsilon, 1.0 / (c.n - 2));
}

namespace {

struct JepsPoint {
    double direct, expansion, reduced, l1, l2;
};

JepsPoint jeps_point(const DomainSpec& domain, const BubbleSum& base, const ConstantSet& c, const PairExpansion& geo,
                     const PairConfig& pair, double big1, double big2, double eps, const QuadratureOptions& opt) {
    const int n = c.n;
    BubbleParams a = pair.first, b = pair.second;
    a.lambda = coupled_lambda(c, big1, eps);
    b.lambda = coupled_lambda(c, big2, eps);
    PairIntegrals in = pair_integrals(domain, transform(base, a), transform(base, b), eps, opt);
    const double q = c.p + 1.0 + eps;
    JepsPoint r;
    r.l1 = a.lambda;
    r.l2 = b.lambda;
    r.direct = 0.5 * (in.grad11 + in.grad22 + 2.0 * in.grad12) - in.pot12 / q;
    const double bracket = 2.0 * (c.potential / ((c.p + 1.0) * (c.p + 1.0)) - c.log_moment / (c.p + 1.0));
    r.expansion = j0_expansion(c, geo, a.lambda, b.lambda) + eps * bracket +
                  (n - 2.0) * (n - 2.0) / (4.0 * n) * eps * std::log(a.lambda * b.lambda) * c.potential;
    const double psi = 0.5 * geo.h1 * geo.q1 * geo.q1 * big1 * big1 + 0.5 * geo.h2 * geo.q2 * geo.q2 * big2 * big2 -
                       geo.g12 * geo.q1 * geo.q2 * big1 * big2 + std::log(big1 * big2);
    r.reduced = 2.0 * c.gamma + c.chi * eps * std::log(eps) + c.eta_bare * eps + c.w * eps * psi;
    return r;
}

}  // namespace

JepsReport expansion_check_jeps(const DomainSpec& domain, const BubbleSum& base, const ConstantSet& c,
                                const PairConfig& pair, const std::vector<double>& epsilons,
                                const QuadratureOptions& opt) {
    std::string bad = pair.violation(domain);
    if (!bad.empty()) throw std::invalid_argument("expansion_check_jeps: constraint violated: " + bad);
    if (epsilons.size() < 3) throw std::invalid_argument("expansion_check_jeps: need at least 3 epsilon values");
    GreensProvider g = provider_for(domain);
    PairExpansion geo = pair_geometry(g, base, pair.first, pair.second);
    const double big1 = pair.first.lambda, big2 = pair.second.lambda;
    JepsReport rep;
    for (double eps : epsilons) {
        if (eps <= 0.0) throw std::invalid_argument("expansion_check_jeps: epsilon must be positive");
        JepsPoint pt = jeps_point(domain, base, c, geo, pair, big1, big2, eps, opt);
        JepsEntry e;
        e.epsilon = eps;
        e.lambda1 = pt.l1;
        e.lambda2 = pt.l2;
        e.direct = pt.direct;
        e.expansion = pt.expansion;
        e.expansion_reduced = pt.reduced;
        e.residual = pt.direct - pt.expansion;
        e.scaled_residual = std::abs(e.residual) / eps;
        rep.entries.push_back(e);
    }
    // entries ordered by decreasing epsilon for the monotonicity check
    std::vector<JepsEntry> sorted = rep.entries;
    std::sort(sorted.begin(), sorted.end(), [](const JepsEntry& x, const JepsEntry& y) { return x.epsilon > y.epsilon; });
    rep.monotone = true;
    for (std::size_t i = 1; i < sorted.size(); ++i)
        rep.monotone = rep.monotone && sorted[i].scaled_residual < sorted[i - 1].scaled_residual;
    // direct - 2γ = c1 ε log ε + c2 ε, least squares
    Eigen::MatrixXd m(rep.entries.size(), 2);
    Eigen::VectorXd rhs(rep.entries.size());
    for (std::size_t i = 0; i < rep.entries.size(); ++i) {
        double eps = rep.entries[i].epsilon;
        m(i, 0) = eps * std::log(eps);
        m(i, 1) = eps;
        rhs(i) = rep.entries[i].direct - 2.0 * c.gamma;
    }
    Eigen::Vector2d coef = m.colPivHouseholderQr().solve(rhs);
    rep.fitted_chi = coef(0);
    rep.fitted_eta = coef(1);
    rep.chi_error = std::abs(coef(0) - c.chi) / c.chi;

    rep.shift_epsilon = sorted[sorted.size() / 2].epsilon;
    const double root = std::sqrt(rep.shift_factor);
    JepsPoint base_pt = jeps_point(domain, base, c, geo, pair, big1, big2, rep.shift_epsilon, opt);
    JepsPoint moved = jeps_point(domain, base, c, geo, pair, root * big1, root * big2, rep.shift_epsilon, opt);
    rep.shift_direct = moved.direct - base_pt.direct;
    rep.shift_predicted = moved.expansion - base_pt.expansion;
    rep.shift_bare = moved.reduced - base_pt.reduced;
    rep.shift_error = std::abs(rep.shift_direct - rep.shift_predicted) / std::abs(rep.shift_predicted);
    return rep;
}

}  // namespace tl
