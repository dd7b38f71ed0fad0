#include "towerlab/reduced.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace tl {

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec plane_vec(int n, double a0, double a1) {
    Vec v(n);
    v[0] = a0;
    v[1] = a1;
    return v;
}

std::string fmt_num(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace

std::string ConfigPair::violation(const DomainSpec& domain) const {
    std::string s = pair().violation(domain);
    if (!s.empty()) return s;
    if (!(first.lambda > lambda_window && first.lambda < 1.0 / lambda_window)) return "delta < Lambda_1 < 1/delta";
    if (!(second.lambda > lambda_window && second.lambda < 1.0 / lambda_window)) return "delta < Lambda_2 < 1/delta";
    return {};
}

double PsiTerms::phi() const { return std::sqrt(h1 * h2) - g12; }

PsiTerms psi_terms(const GreensProvider& g, const BubbleSum& base, const Vec& xi1, const Vec& xi2, const Vec& a1,
                   const Vec& a2) {
    PsiTerms t;
    t.h1 = g.robin(xi1);
    t.h2 = g.robin(xi2);
    t.g12 = g.green(xi1, xi2);
    t.q1 = base.value(a1);
    t.q2 = base.value(a2);
    return t;
}

double psi_value(const PsiTerms& t, double big1, double big2) {
    return 0.5 * t.h1 * t.q1 * t.q1 * big1 * big1 + 0.5 * t.h2 * t.q2 * t.q2 * big2 * big2 -
           t.g12 * t.q1 * t.q2 * big1 * big2 + std::log(big1 * big2);
}

double psi(const GreensProvider& g, const BubbleSum& base, const ConfigPair& pair) {
    std::string bad = pair.violation(g.domain());
    if (!bad.empty()) throw std::invalid_argument("psi: constraint violated: " + bad);
    PsiTerms t = psi_terms(g, base, pair.first.xi_hat(), pair.second.xi_hat(), pair.first.a_hat(),
                           pair.second.a_hat());
    return psi_value(t, pair.first.lambda, pair.second.lambda);
}

int reduced_dim(int n) { return 2 * n + 6; }

Eigen::VectorXd to_reduced(const ConfigPair& pair) {
    const int n = pair.first.dim();
    Eigen::VectorXd z(reduced_dim(n));
    z(0) = pair.first.lambda;
    z(1) = pair.second.lambda;
    Vec x1 = pair.first.xi_hat(), x2 = pair.second.xi_hat();
    Vec a1 = pair.first.a_hat(), a2 = pair.second.a_hat();
    for (int l = 2; l < n; ++l)
        if (std::abs(a1[l]) > 1e-14 || std::abs(a2[l]) > 1e-14)
            throw std::invalid_argument("to_reduced: rotated a leaves the (x1,x2)-plane");
    for (int i = 0; i < n; ++i) {
        z(2 + i) = x1[i];
        z(2 + n + i) = x2[i];
    }
    z(2 + 2 * n) = a1[0];
    z(3 + 2 * n) = a1[1];
    z(4 + 2 * n) = a2[0];
    z(5 + 2 * n) = a2[1];
    return z;
}

ConfigPair from_reduced(const Eigen::VectorXd& z, int n, const ConfigPair& limits) {
    ConfigPair c = limits;
    c.first = BubbleParams::identity(n);
    c.second = BubbleParams::identity(n);
    c.first.lambda = z(0);
    c.second.lambda = z(1);
    for (int i = 0; i < n; ++i) {
        c.first.xi[i] = z(2 + i);
        c.second.xi[i] = z(2 + n + i);
    }
    c.first.a = {z(2 + 2 * n), z(3 + 2 * n)};
    c.second.a = {z(4 + 2 * n), z(5 + 2 * n)};
    return c;
}

double psi_reduced(const GreensProvider& g, const BubbleSum& base, const Eigen::VectorXd& z) {
    const int n = g.dim();
    Vec x1(n), x2(n);
    for (int i = 0; i < n; ++i) {
        x1[i] = z(2 + i);
        x2[i] = z(2 + n + i);
    }
    PsiTerms t = psi_terms(g, base, x1, x2, plane_vec(n, z(2 + 2 * n), z(3 + 2 * n)),
                           plane_vec(n, z(4 + 2 * n), z(5 + 2 * n)));
    return psi_value(t, z(0), z(1));
}

PsiGradient grad_psi(const GreensProvider& g, const BubbleSum& base, const ConfigPair& pair, double rel_step) {
    std::string bad = pair.violation(g.domain());
    if (!bad.empty()) throw std::invalid_argument("grad_psi: constraint violated: " + bad);
    const int n = g.dim();
    Eigen::VectorXd z = to_reduced(pair);
    PsiGradient out;
    out.g.resize(z.size());
    auto admissible = [&](const Eigen::VectorXd& w) {
        return from_reduced(w, n, pair).violation(g.domain()).empty();
    };
    const double f0 = psi_reduced(g, base, z);
    for (int i = 0; i < z.size(); ++i) {
        const double h = rel_step * std::max(1.0, std::abs(z(i)));
        Eigen::VectorXd zp = z, zm = z;
        zp(i) += h;
        zm(i) -= h;
        bool okp = admissible(zp), okm = admissible(zm);
        if (okp && okm) {
            out.g(i) = (psi_reduced(g, base, zp) - psi_reduced(g, base, zm)) / (2.0 * h);
            continue;
        }
        out.one_sided = true;
        double s = okp ? 1.0 : -1.0;
        Eigen::VectorXd z1 = z, z2 = z;
        z1(i) += s * h;
        z2(i) += 2.0 * s * h;
        out.g(i) = s * (-3.0 * f0 + 4.0 * psi_reduced(g, base, z1) - psi_reduced(g, base, z2)) / (2.0 * h);
    }
    return out;
}

Eigen::MatrixXd hessian_psi(const GreensProvider& g, const BubbleSum& base, const Eigen::VectorXd& z,
                            const std::vector<int>& coords, double step) {
    const int m = static_cast<int>(coords.size());
    Eigen::MatrixXd hm(m, m);
    auto f = [&](const Eigen::VectorXd& w) { return psi_reduced(g, base, w); };
    const double f0 = f(z);
    std::vector<double> h(m);
    for (int i = 0; i < m; ++i) h[i] = step * std::max(1.0, std::abs(z(coords[i])));
    for (int i = 0; i < m; ++i) {
        Eigen::VectorXd zp = z, zm = z;
        zp(coords[i]) += h[i];
        zm(coords[i]) -= h[i];
        hm(i, i) = (f(zp) - 2.0 * f0 + f(zm)) / (h[i] * h[i]);
        for (int j = 0; j < i; ++j) {
            Eigen::VectorXd pp = z, pm = z, mp = z, mm = z;
            pp(coords[i]) += h[i];
            pp(coords[j]) += h[j];
            pm(coords[i]) += h[i];
            pm(coords[j]) -= h[j];
            mp(coords[i]) -= h[i];
            mp(coords[j]) += h[j];
            mm(coords[i]) -= h[i];
            mm(coords[j]) -= h[j];
            hm(i, j) = hm(j, i) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h[i] * h[j]);
        }
    }
    return hm;
}

StationaryLambda stationary_lambda(const PsiTerms& t) {
    StationaryLambda s;
    const double a = t.h1 * t.q1 * t.q1, b = t.h2 * t.q2 * t.q2, c = t.g12 * t.q1 * t.q2;
    const double root = std::sqrt(a * b);
    if (c > root && a > 0.0 && b > 0.0) {
        s.exists = true;
        s.big1 = std::sqrt(std::sqrt(b) / (std::sqrt(a) * (c - root)));
        s.big2 = std::sqrt(std::sqrt(a) / (std::sqrt(b) * (c - root)));
        s.psi = psi_value(t, s.big1, s.big2);
    }
    const double phi = t.phi();
    if (phi < 0.0) {
        s.big1_bare = std::sqrt(-std::sqrt(t.h2) / (std::sqrt(t.h1) * phi));
        s.big2_bare = std::sqrt(-std::sqrt(t.h1) / (std::sqrt(t.h2) * phi));
        s.psi_bare = -0.5 + 0.5 * std::log(1.0 / std::abs(phi));
        s.psi_at_bare = psi_value(t, s.big1_bare, s.big2_bare);
    }
    return s;
}

NegativeDirection negative_direction(const PsiTerms& t) {
    NegativeDirection d;
    const double a = t.h1 * t.q1 * t.q1, b = t.h2 * t.q2 * t.q2, c = t.g12 * t.q1 * t.q2;
    d.phi = t.phi();
    d.determinant = a * b - c * c;
    Eigen::Matrix2d m;
    m << a, -c, -c, b;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m);
    d.eigenvalue = es.eigenvalues()(0);
    Eigen::Vector2d v = es.eigenvectors().col(0);
    if (v(0) < 0.0) v = -v;
    if (d.eigenvalue < 0.0 && v(0) > 0.0 && v(1) > 0.0) {
        d.exists = true;
        d.d1 = v(0);
        d.d2 = v(1);
    }
    return d;
}

NegativeDirection negative_direction(const GreensProvider& g, const BubbleSum& base, const Vec& xi1, const Vec& xi2,
                                     const Vec& a1, const Vec& a2) {
    return negative_direction(psi_terms(g, base, xi1, xi2, a1, a2));
}

ARange a_range(const BubbleSum& base) {
    const int n = base.dim();
    ARange r;
    auto scan = [&](double radius, double& lo, double& hi) {
        lo = INFINITY;
        hi = -INFINITY;
        for (int i = 0; i <= 20; ++i)
            for (int j = 0; j < 64; ++j) {
                double rr = radius * i / 20.0, th = 2.0 * kPi * j / 64.0;
                double v = base.value(plane_vec(n, rr * std::cos(th), rr * std::sin(th)));
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
    };
    double lo, hi;
    scan(0.5, lo, hi);
    r.sign_change = lo < 0.0 && hi > 0.0;
    r.radius = r.sign_change ? 0.2 : 0.5;
    if (r.sign_change) scan(r.radius, lo, hi);
    r.min_q = lo;
    r.max_q = hi;
    return r;
}

BracketOptions BracketOptions::doubled() const {
    BracketOptions o = *this;
    o.pair_samples *= 2;
    o.a_radii *= 2;
    o.a_angles *= 2;
    o.interior_samples *= 2;
    return o;
}

namespace {

struct AGrid {
    std::vector<Vec> points;
    std::vector<bool> edge;
    std::vector<double> q;
};

AGrid make_a_grid(const BubbleSum& base, double radius, int radii, int angles) {
    const int n = base.dim();
    AGrid g;
    g.points.push_back(Vec(n));
    g.edge.push_back(false);
    for (int i = 1; i <= radii; ++i) {
        double r = radius * i / radii;
        for (int j = 0; j < angles; ++j) {
            double th = 2.0 * kPi * j / angles;
            g.points.push_back(plane_vec(n, r * std::cos(th), r * std::sin(th)));
            g.edge.push_back(i == radii);
        }
    }
    for (const Vec& a : g.points) g.q.push_back(base.value(a));
    return g;
}

// Ψ(r d) = ½ r² μ + 2 log r + log(d1 d2) for unit d with eigenvalue μ < 0.
double along_direction(const NegativeDirection& d, double r) {
    return 0.5 * r * r * d.eigenvalue + 2.0 * std::log(r) + std::log(d.d1 * d.d2);
}

std::vector<std::pair<Vec, Vec>> interior_pairs(const GreensProvider& g, int samples, double rho, double l,
                                                unsigned seed) {
    const DomainSpec& dom = g.domain();
    const int n = dom.n;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    auto point = [&]() {
        for (;;) {
            Vec x(n);
            for (int i = 0; i < n; ++i) x[i] = unif(rng);
            if (dom.contains(x) && dom.boundary_distance(x) > rho) return x;
        }
    };
    std::vector<std::pair<Vec, Vec>> out;
    for (int s = 0; s < samples; ++s) {
        Vec a = point(), b = point();
        if (norm(a - b) <= rho) continue;
        if (phi_pair(g, a, b) < -l) out.emplace_back(a, b);
    }
    return out;
}

}  // namespace

LevelBracket level_bracket(const GreensProvider& g, const BubbleSum& base, double sigma, double R,
                           const BracketOptions& opt) {
    const int n = g.dim();
    LevelBracket rep;
    rep.sigma = sigma;
    rep.R = R;
    rep.a = a_range(base);
    rep.hole = check_hole_criterion(g, sigma, opt.pair_samples, opt.seed);
    if (!rep.hole.all_negative) {
        rep.failure = "hole criterion fails on S: max phi = " + fmt_num(rep.hole.max_phi);
        return rep;
    }
    rep.hole_ok = true;
    AGrid ag = make_a_grid(base, rep.a.radius, opt.a_radii, opt.a_angles);
    const int na = static_cast<int>(ag.points.size());

    struct Geo {
        double h1, h2, g12;
    };
    std::vector<Geo> on_s;
    for (const auto& [x1, x2] : sphere_pairs(n, sigma, opt.pair_samples, opt.seed))
        on_s.push_back({g.robin(x1), g.robin(x2), g.green(x1, x2)});

    rep.l = opt.l_fraction * std::abs(rep.hole.max_phi);
    std::vector<Geo> in_w = on_s;
    for (const auto& [x1, x2] : interior_pairs(g, opt.interior_samples, opt.rho, rep.l, opt.seed + 1))
        in_w.push_back({g.robin(x1), g.robin(x2), g.green(x1, x2)});
    rep.interior_pairs = static_cast<int>(in_w.size() - on_s.size());

    rep.hyperbola_min = INFINITY;
    for (const Geo& w : in_w)
        for (int i = 0; i < na; ++i)
            for (int j = 0; j < na; ++j) {
                double a = w.h1 * ag.q[i] * ag.q[i], b = w.h2 * ag.q[j] * ag.q[j], c = w.g12 * ag.q[i] * ag.q[j];
                rep.hyperbola_min = std::min(rep.hyperbola_min, std::sqrt(a * b) - c);
            }

    for (double radius = R;; radius *= 2.0) {
        ++rep.attempts;
        rep.R = radius;
        rep.B = rep.boundary_max = rep.edge_max = -INFINITY;
        rep.skipped = 0;
        for (const Geo& s : on_s)
            for (int i = 0; i < na; ++i)
                for (int j = 0; j < na; ++j) {
                    PsiTerms t{s.h1, s.h2, s.g12, ag.q[i], ag.q[j]};
                    NegativeDirection d = negative_direction(t);
                    if (!d.exists) {
                        ++rep.skipped;
                        continue;
                    }
                    double rstar = std::clamp(std::sqrt(2.0 / std::abs(d.eigenvalue)), 1.0 / radius, radius);
                    rep.B = std::max(rep.B, along_direction(d, rstar));
                    double fb = std::max(along_direction(d, 1.0 / radius), along_direction(d, radius));
                    rep.boundary_max = std::max(rep.boundary_max, fb);
                    if (ag.edge[i] || ag.edge[j]) rep.edge_max = std::max(rep.edge_max, fb);
                }
        rep.A = 0.5 * (rep.B + rep.boundary_max);
        rep.valid = rep.B > rep.boundary_max && rep.hyperbola_min > rep.A;
        if (rep.valid || radius * 2.0 > opt.r_max + 1e-9) break;
    }
    if (!rep.valid) {
        if (!(rep.B > rep.boundary_max))
            rep.failure = "B is attained at r in {1/R, R} for R up to " + fmt_num(rep.R);
        else
            rep.failure = "hyperbola minimum " + fmt_num(rep.hyperbola_min) + " does not exceed A = " + fmt_num(rep.A) +
                          " for R up to " + fmt_num(rep.R);
    }
    return rep;
}

namespace {

// Symmetric-class coordinates y = (log Λ, ξ1, a1) mapped to reduced z.
Eigen::VectorXd expand_symmetric(const Eigen::VectorXd& y, int n) {
    Eigen::VectorXd z(reduced_dim(n));
    z(0) = z(1) = std::exp(y(0));
    for (int i = 0; i < n; ++i) {
        z(2 + i) = y(1 + i);
        z(2 + n + i) = -y(1 + i);
    }
    z(2 + 2 * n) = y(1 + n);
    z(3 + 2 * n) = y(2 + n);
    z(4 + 2 * n) = -y(1 + n);
    z(5 + 2 * n) = -y(2 + n);
    return z;
}

// General coordinates y = (log Λ1, log Λ2, ξ1, ξ2, a1, a2).
Eigen::VectorXd expand_general(const Eigen::VectorXd& y) {
    Eigen::VectorXd z = y;
    z(0) = std::exp(y(0));
    z(1) = std::exp(y(1));
    return z;
}

struct Searcher {
    const GreensProvider& g;
    const BubbleSum& base;
    int n;
    bool symmetric;
    double rho;
    double a_radius;
    ConfigPair limits;

    Eigen::VectorXd expand(const Eigen::VectorXd& y) const {
        return symmetric ? expand_symmetric(y, n) : expand_general(y);
    }
    double value(const Eigen::VectorXd& y) const { return psi_reduced(g, base, expand(y)); }

    Eigen::VectorXd gradient(const Eigen::VectorXd& y) const {
        Eigen::VectorXd gr(y.size());
        for (int i = 0; i < y.size(); ++i) {
            double h = 1e-5 * std::max(1.0, std::abs(y(i)));
            Eigen::VectorXd p = y, m = y;
            p(i) += h;
            m(i) -= h;
            gr(i) = (value(p) - value(m)) / (2.0 * h);
        }
        return gr;
    }

    Eigen::MatrixXd hessian(const Eigen::VectorXd& y) const {
        const int m = static_cast<int>(y.size());
        Eigen::MatrixXd hm(m, m);
        const double f0 = value(y);
        std::vector<double> h(m);
        for (int i = 0; i < m; ++i) h[i] = 1e-4 * std::max(1.0, std::abs(y(i)));
        for (int i = 0; i < m; ++i) {
            Eigen::VectorXd p = y, q = y;
            p(i) += h[i];
            q(i) -= h[i];
            hm(i, i) = (value(p) - 2.0 * f0 + value(q)) / (h[i] * h[i]);
            for (int j = 0; j < i; ++j) {
                Eigen::VectorXd pp = y, pm = y, mp = y, mm = y;
                pp(i) += h[i];
                pp(j) += h[j];
                pm(i) += h[i];
                pm(j) -= h[j];
                mp(i) -= h[i];
                mp(j) += h[j];
                mm(i) -= h[i];
                mm(j) -= h[j];
                hm(i, j) = hm(j, i) = (value(pp) - value(pm) - value(mp) + value(mm)) / (4.0 * h[i] * h[j]);
            }
        }
        return hm;
    }

    // full reduced-coordinate gradient norm
    double full_gradient_norm(const Eigen::VectorXd& y) const {
        ConfigPair c = from_reduced(expand(y), n, limits);
        if (!c.violation(g.domain()).empty()) return INFINITY;
        return grad_psi(g, base, c).g.norm();
    }

    // Keeps ξ inside V_rho and a inside the disk; returns true when it had to move the point.
    bool project(Eigen::VectorXd& y) const {
        const DomainSpec& dom = g.domain();
        bool moved = false;
        auto fix_point = [&](int off) {
            Vec x(n);
            for (int i = 0; i < n; ++i) x[i] = y(off + i);
            double r = norm(x);
            double lo = (dom.kind == DomainKind::Annulus ? dom.delta : 0.0) + rho * 1.0001;
            double hi = 1.0 - rho * 1.0001;
            double rc = std::clamp(r, lo, hi);
            if (rc != r && r > 0.0) {
                for (int i = 0; i < n; ++i) y(off + i) *= rc / r;
                moved = true;
            }
        };
        auto fix_a = [&](int off) {
            double r = std::hypot(y(off), y(off + 1));
            if (r > a_radius) {
                y(off) *= a_radius / r;
                y(off + 1) *= a_radius / r;
                moved = true;
            }
        };
        if (symmetric) {
            fix_point(1);
            fix_a(1 + n);
        } else {
            fix_point(2);
            fix_point(2 + n);
            fix_a(2 + 2 * n);
            fix_a(4 + 2 * n);
        }
        return moved;
    }

    struct Outcome {
        Eigen::VectorXd y;
        double grad = INFINITY;
        bool converged = false;
        bool pinned = false;
        std::vector<double> trace;
    };

    Outcome newton(Eigen::VectorXd y, double tol, int max_iters) const {
        Outcome out;
        out.pinned = project(y);
        double gn = full_gradient_norm(y);
        out.trace.push_back(gn);
        // steps are accepted on the search-coordinate gradient, which is the quantity Newton reduces;
        // convergence is judged on the full reduced gradient
        Eigen::VectorXd gr = gradient(y);
        double merit = gr.norm();
        for (int it = 0; it < max_iters && !(gn < tol); ++it) {
            Eigen::MatrixXd hm = hessian(y);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hm);
            const double top = es.eigenvalues().cwiseAbs().maxCoeff();
            Eigen::VectorXd coeff = es.eigenvectors().transpose() * gr;
            for (int i = 0; i < coeff.size(); ++i) {
                double ev = es.eigenvalues()(i);
                coeff(i) = std::abs(ev) > 1e-5 * top ? coeff(i) / ev : 0.0;
            }
            // modes below the cutoff are flat up to difference noise (rotations of the pair about the origin)
            Eigen::VectorXd step = -(es.eigenvectors() * coeff);
            // trust region: 0.5 in log Λ, 0.05 in space and in a
            double scale = 1.0;
            for (int i = 0; i < step.size(); ++i) {
                bool is_log = symmetric ? i == 0 : i < 2;
                double cap = is_log ? 0.5 : 0.05;
                if (std::abs(step(i)) > cap) scale = std::min(scale, cap / std::abs(step(i)));
            }
            step *= scale;
            bool accepted = false;
            for (int k = 0; k < 12 && !accepted; ++k, step *= 0.5) {
                Eigen::VectorXd trial = y + step;
                bool moved = project(trial);
                double tg = full_gradient_norm(trial);
                if (!std::isfinite(tg)) continue;
                Eigen::VectorXd tgr = gradient(trial);
                if (tgr.norm() < merit || tg < gn) {
                    y = trial;
                    gr = tgr;
                    merit = tgr.norm();
                    gn = tg;
                    out.pinned = out.pinned || moved;
                    accepted = true;
                }
            }
            if (!accepted) break;
            out.trace.push_back(gn);
        }
        out.y = y;
        out.grad = gn;
        out.converged = gn < tol;
        return out;
    }
};

}  // namespace

SaddleResult saddle_search(const GreensProvider& g, const BubbleSum& base, const LevelBracket& bracket,
                           const SaddleOptions& opt) {
    const int n = g.dim();
    SaddleResult res;
    if (!bracket.hole_ok) {
        res.failure = "no bracket: " + bracket.failure;
        return res;
    }
    ConfigPair limits;
    Searcher s{g, base, n, opt.symmetric, 0.05, bracket.a.radius, limits};
    limits.separation = 0.05;
    s.limits = limits;
    const double R = bracket.R;

    // phase 1: max over S x r x a along the negative direction
    AGrid ag = make_a_grid(base, bracket.a.radius, 4, 8);
    const int na = static_cast<int>(ag.points.size());
    double best = -INFINITY, best_tie = INFINITY;
    Eigen::VectorXd y0;
    for (const auto& [x1, x2r] : sphere_pairs(n, bracket.sigma, opt.directions, opt.seed)) {
        Vec x2 = opt.symmetric ? -x1 : x2r;
        for (int i = 0; i < na; ++i) {
            for (int j = 0; j < na; ++j) {
                if (opt.symmetric && j != i) continue;
                Vec a1 = ag.points[i];
                Vec a2 = opt.symmetric ? -a1 : ag.points[j];
                PsiTerms t = psi_terms(g, base, x1, x2, a1, a2);
                NegativeDirection d = negative_direction(t);
                if (!d.exists) continue;
                double rstar = std::clamp(std::sqrt(2.0 / std::abs(d.eigenvalue)), 1.0 / R, R);
                double v = along_direction(d, rstar);
                double tie = norm(x1 + x2);
                if (v > best || (v == best && tie < best_tie)) {
                    best = v;
                    best_tie = tie;
                    if (opt.symmetric) {
                        y0.resize(n + 3);
                        y0(0) = std::log(rstar * d.d1);
                        for (int k = 0; k < n; ++k) y0(1 + k) = x1[k];
                        y0(1 + n) = a1[0];
                        y0(2 + n) = a1[1];
                    } else {
                        y0.resize(2 * n + 6);
                        y0(0) = std::log(rstar * d.d1);
                        y0(1) = std::log(rstar * d.d2);
                        for (int k = 0; k < n; ++k) {
                            y0(2 + k) = x1[k];
                            y0(2 + n + k) = x2[k];
                        }
                        y0(2 + 2 * n) = a1[0];
                        y0(3 + 2 * n) = a1[1];
                        y0(4 + 2 * n) = a2[0];
                        y0(5 + 2 * n) = a2[1];
                    }
                }
            }
        }
    }
    if (y0.size() == 0) {
        res.failure = "phase 1 found no negative direction on S";
        return res;
    }

    // phase 2 from the phase-1 point and from perturbed seeds
    auto main = s.newton(y0, opt.tolerance, opt.max_iters);
    std::mt19937_64 rng(opt.seed + 7);
    std::normal_distribution<double> gauss;
    for (int k = 0; k < opt.seeds; ++k) {
        Eigen::VectorXd y = y0;
        for (int i = 0; i < y.size(); ++i) {
            bool is_log = opt.symmetric ? i == 0 : i < 2;
            y(i) += (is_log ? 0.2 : 0.02) * gauss(rng);
        }
        auto o = s.newton(y, opt.tolerance, opt.max_iters);
        res.seed_values.push_back(s.value(o.y));
        res.seed_converged.push_back(o.converged);
        res.seed_grads.push_back(o.grad);
    }
    if (!res.seed_values.empty()) {
        auto [lo, hi] = std::minmax_element(res.seed_values.begin(), res.seed_values.end());
        res.seed_spread = *hi - *lo;
    }

    Eigen::VectorXd z = s.expand(main.y);
    res.critical = from_reduced(z, n, limits);
    res.psi = psi_reduced(g, base, z);
    res.grad_norm = main.grad;
    res.converged = main.converged;
    res.pinned = main.pinned;
    res.trace = main.trace;
    std::vector<int> block;
    for (int i = 0; i < 2 + 2 * n; ++i) block.push_back(i);
    Eigen::MatrixXd hb = hessian_psi(g, base, z, block);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hb);
    int neg = 0, pos = 0;
    const double top = es.eigenvalues().cwiseAbs().maxCoeff();
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
        double ev = es.eigenvalues()(i);
        res.hessian_eigenvalues.push_back(ev);
        if (ev < -1e-6 * top) ++neg;
        if (ev > 1e-6 * top) ++pos;
    }
    Vec x1 = res.critical.first.xi_hat(), x2 = res.critical.second.xi_hat();
    PsiTerms t = psi_terms(g, base, x1, x2, res.critical.first.a_hat(), res.critical.second.a_hat());
    NegativeDirection d = negative_direction(t);
    if (d.exists) {
        Eigen::Vector2d dv(d.d1, d.d2);
        res.lambda_curvature = dv.dot(hb.topLeftCorner(2, 2) * dv);
    }
    res.saddle = neg >= 1 && pos >= 1 && res.lambda_curvature < 0.0;
    res.in_bracket = bracket.valid && res.psi >= bracket.A && res.psi <= bracket.B;
    res.stationary = stationary_lambda(t);
    if (!res.converged) res.failure = "Newton stopped with gradient norm " + fmt_num(res.grad_norm);
    else if (!res.saddle) res.failure = "critical point lacks the saddle signature";
    else if (!bracket.valid) res.failure = "critical point found but the bracket is invalid: " + bracket.failure;
    else if (!res.in_bracket) res.failure = "critical value outside [A, B]";
    return res;
}

AssembleReport assemble_ansatz(const DomainSpec& domain, const BubbleSum& base, const ConstantSet& c,
                               const ConfigPair& critical, double epsilon, const GridSpec& spec,
                               const QuadratureOptions& opt) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("assemble_ansatz: epsilon must be positive");
    const int n = domain.n;
    AssembleReport rep;
    rep.epsilon = epsilon;
    rep.zeta = zeta_of(n, epsilon);
    BubbleParams p1 = critical.first, p2 = critical.second;
    p1.lambda = coupled_lambda(c, critical.first.lambda, epsilon);
    p2.lambda = coupled_lambda(c, critical.second.lambda, epsilon);
    rep.lambda1 = p1.lambda;
    rep.lambda2 = p2.lambda;
    rep.energy_target = 2.0 * c.bubbles * c.s_estimate;
    auto grid = shared_grid(domain, spec);
    const double h = grid->spacing();
    for (const BubbleParams* p : {&p1, &p2}) {
        if (p->lambda < 3.0 * h) {
            rep.failure = "unresolvable core: lambda = " + fmt_num(p->lambda) + " < 3h = " + fmt_num(3.0 * h);
            return rep;
        }
        if (p->lambda >= domain.boundary_distance(p->xi_hat())) {
            rep.failure = "core exceeds the domain: lambda = " + fmt_num(p->lambda) + " >= dist(xi, boundary) = " +
                          fmt_num(domain.boundary_distance(p->xi_hat()));
            return rep;
        }
    }
    ProjectionResult r1 = project_bubble(domain, p1, base, spec);
    ProjectionResult r2 = project_bubble(domain, p2, base, spec);
    rep.u = grid->blank();
    const double f = 1.0 + rep.zeta;
    for (std::size_t idx : grid->interior_nodes()) rep.u.values[idx] = f * (r1.pq.values[idx] + r2.pq.values[idx]);
    rep.min_value = INFINITY;
    rep.max_value = -INFINITY;
    for (std::size_t idx : grid->interior_nodes()) {
        rep.min_value = std::min(rep.min_value, rep.u.values[idx]);
        rep.max_value = std::max(rep.max_value, rep.u.values[idx]);
    }
    rep.sign_changing = rep.min_value < 0.0 && rep.max_value > 0.0;
    BubbleSum both = transform(base, p1);
    {
        std::vector<Bubble> all = both.bubbles();
        BubbleSum second = transform(base, p2);
        all.insert(all.end(), second.bubbles().begin(), second.bubbles().end());
        both = BubbleSum(n, all);
    }
    const double q0 = base.value(Vec(n));
    const BubbleParams* ps[2] = {&p1, &p2};
    ExactProjection exact(domain, both);
    for (int i = 0; i < 2; ++i) {
        Vec x = ps[i]->xi_hat();
        rep.center_value[i] = f * exact.value(x);
        rep.center_profile[i] = f * std::pow(ps[i]->lambda, -0.5 * (n - 2)) * q0;
    }
    rep.residual = nonlinear_residual(*grid, rep.u, epsilon);
    rep.energy = exact_domain_energy(exact, epsilon, opt, f).energy;
    rep.energy_grid = domain_energy(*grid, rep.u, epsilon);
    rep.energy_error = std::abs(rep.energy - rep.energy_target) / std::abs(rep.energy_target);
    rep.ok = rep.sign_changing && rep.energy_error < 0.25;
    if (!rep.sign_changing) rep.failure = "assembled u does not change sign";
    else if (!rep.ok) rep.failure = "energy off the 2(k+1)S estimate by " + fmt_num(rep.energy_error);
    return rep;
}

std::vector<LandscapeRow> landscape(const GreensProvider& g, const BubbleSum& base, int radii, int lambdas,
                                    double log_lambda_min, double log_lambda_max, double margin) {
    const DomainSpec& dom = g.domain();
    const int n = dom.n;
    const double lo = (dom.kind == DomainKind::Annulus ? dom.delta : 0.0) + margin;
    const double hi = 1.0 - margin;
    std::vector<LandscapeRow> out;
    const double q = base.value(Vec(n));
    for (int i = 0; i < radii; ++i) {
        double s = lo + (hi - lo) * (i + 0.5) / radii;
        Vec x1(n);
        x1[0] = s;
        PsiTerms t{g.robin(x1), g.robin(-x1), g.green(x1, -x1), q, q};
        for (int j = 0; j < lambdas; ++j) {
            double big = std::exp(log_lambda_min + (log_lambda_max - log_lambda_min) * j / std::max(1, lambdas - 1));
            out.push_back({s, big, psi_value(t, big, big), t.phi()});
        }
    }
    return out;
}

}  // namespace tl
