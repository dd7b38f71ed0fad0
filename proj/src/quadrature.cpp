#include "towerlab/quadrature.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace tl {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct GlTableDeleter {
    void operator()(gsl_integration_glfixed_table* t) const { gsl_integration_glfixed_table_free(t); }
};

const gsl_integration_glfixed_table* gl_table(int order) {
    static std::mutex mtx;
    static std::map<int, std::unique_ptr<gsl_integration_glfixed_table, GlTableDeleter>> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(order);
    if (it == cache.end()) {
        it = cache.emplace(order, std::unique_ptr<gsl_integration_glfixed_table, GlTableDeleter>(
                                      gsl_integration_glfixed_table_alloc(order)))
                 .first;
    }
    return it->second.get();
}

double sphere_measure(int m) {
    // area of the unit sphere S^m in R^{m+1}
    return 2.0 * std::pow(kPi, 0.5 * (m + 1)) / std::tgamma(0.5 * (m + 1));
}

struct FiberNode {
    std::array<double, 3> omega{};
    double weight = 0.0;
};

// Quadrature on S^{n-3}; the fiber carries coordinates x3..xn.
std::vector<FiberNode> fiber_rule(int n, bool axial, int count) {
    std::vector<FiberNode> out;
    if (n < 3) return out;
    const int m = n - 3;
    if (axial) {
        FiberNode f;
        f.omega[0] = 1.0;
        f.weight = sphere_measure(m);
        out.push_back(f);
        return out;
    }
    if (m == 0) {
        out.push_back({{1.0, 0.0, 0.0}, 1.0});
        out.push_back({{-1.0, 0.0, 0.0}, 1.0});
    } else if (m == 1) {
        for (int j = 0; j < count; ++j) {
            double chi = (j + 0.5) * 2.0 * kPi / count;
            out.push_back({{std::cos(chi), std::sin(chi), 0.0}, 2.0 * kPi / count});
        }
    } else {
        int nb = std::max(2, count / 2);
        for (auto [u, wu] : gauss_legendre(nb, -1.0, 1.0)) {
            double sb = std::sqrt(std::max(0.0, 1.0 - u * u));
            for (int j = 0; j < count; ++j) {
                double chi = (j + 0.5) * 2.0 * kPi / count;
                out.push_back({{sb * std::cos(chi), sb * std::sin(chi), u}, wu * 2.0 * kPi / count});
            }
        }
    }
    return out;
}

std::vector<std::pair<double, double>> radial_rule(const QuadratureOptions& opt) {
    std::vector<std::pair<double, double>> out;
    auto inner = gauss_legendre(opt.radial_order, 0.0, opt.inner_radius);
    out.insert(out.end(), inner.begin(), inner.end());
    double a = opt.inner_radius;
    while (a < opt.outer_radius) {
        double b = std::min(a * opt.panel_ratio, opt.outer_radius);
        auto panel = gauss_legendre(opt.radial_order, a, b);
        out.insert(out.end(), panel.begin(), panel.end());
        a = b;
    }
    // tail rho = R/t, t in (0, 1]
    for (auto [t, wt] : gauss_legendre(opt.tail_order, 0.0, 1.0)) {
        double rho = opt.outer_radius / t;
        out.emplace_back(rho, wt * opt.outer_radius / (t * t));
    }
    return out;
}

std::vector<std::pair<double, double>> polar_rule(const QuadratureOptions& opt) {
    static const double edges[] = {0.0, 0.5, 0.75, 0.875, 0.95, 1.0};
    std::vector<std::pair<double, double>> out;
    for (int i = 0; i + 1 < 6; ++i) {
        auto panel = gauss_legendre(opt.polar_order, edges[i] * 0.5 * kPi, edges[i + 1] * 0.5 * kPi);
        out.insert(out.end(), panel.begin(), panel.end());
    }
    return out;
}

double in_plane_angle(const Vec& c) { return std::atan2(c[1], c[0]); }

bool on_axis(const FeatureHint& h) {
    return std::hypot(h.center[0], h.center[1]) <= 1e-12 * std::max(1.0, h.scale);
}

Vec rotate_plane(const Vec& x, double ang) {
    Vec y = x;
    double c = std::cos(ang), s = std::sin(ang);
    y[0] = c * x[0] - s * x[1];
    y[1] = s * x[0] + c * x[1];
    return y;
}

}  // namespace

std::vector<std::pair<double, double>> gauss_legendre(int order, double a, double b) {
    const gsl_integration_glfixed_table* t = gl_table(order);
    std::vector<std::pair<double, double>> out(order);
    for (int i = 0; i < order; ++i) {
        double xi = 0.0, wi = 0.0;
        gsl_integration_glfixed_point(a, b, static_cast<size_t>(i), &xi, &wi, t);
        out[i] = {xi, wi};
    }
    std::sort(out.begin(), out.end());
    return out;
}

QuadratureOptions QuadratureOptions::refined(double factor) const {
    QuadratureOptions o = *this;
    auto scale = [factor](int v) { return std::max(1, static_cast<int>(std::lround(v * factor))); };
    o.radial_order = scale(radial_order);
    o.tail_order = scale(tail_order);
    o.polar_order = scale(polar_order);
    o.azimuth = scale(azimuth);
    o.fiber = scale(fiber);
    return o;
}

std::vector<Piece> make_pieces(const std::vector<FeatureHint>& centers, int symmetry_order) {
    std::vector<Piece> plain;
    for (int i = 0; i < static_cast<int>(centers.size()); ++i) plain.push_back({i, 1.0, 0.0, 0.0});
    const int k = symmetry_order;
    if (k <= 1) return plain;

    double ref = 0.0;
    for (const auto& c : centers) {
        if (!on_axis(c)) {
            ref = in_plane_angle(c.center);
            break;
        }
    }
    std::vector<Piece> out;
    std::vector<bool> used(centers.size(), false);
    for (int i = 0; i < static_cast<int>(centers.size()); ++i) {
        if (used[i]) continue;
        used[i] = true;
        if (on_axis(centers[i])) {
            out.push_back({i, static_cast<double>(k), ref - kPi / k, ref + kPi / k});
            continue;
        }
        int found = 1;
        for (int m = 1; m < k; ++m) {
            Vec target = rotate_plane(centers[i].center, 2.0 * kPi * m / k);
            double tol = 1e-9 * (norm(target) + centers[i].scale);
            for (int j = 0; j < static_cast<int>(centers.size()); ++j) {
                if (used[j] || centers[j].singular != centers[i].singular) continue;
                if (std::abs(centers[j].scale - centers[i].scale) > 1e-12 * centers[i].scale) continue;
                if (norm(centers[j].center - target) <= tol) {
                    used[j] = true;
                    ++found;
                    break;
                }
            }
        }
        if (found != k) return plain;
        out.push_back({i, static_cast<double>(k), 0.0, 0.0});
    }
    return out;
}

void visit_nodes(int n, const std::vector<FeatureHint>& centers, const std::vector<Piece>& pieces,
                 bool axial, const QuadratureOptions& opt, const NodeVisitor& visit) {
    const auto radial = radial_rule(opt);
    const auto polar = polar_rule(opt);
    const auto fiber = fiber_rule(n, axial, opt.fiber);
    const double beta = opt.partition_exponent;
    const int nc = static_cast<int>(centers.size());

    auto part = [&](const Vec& x, int self) {
        double mine = 0.0, total = 0.0;
        for (int j = 0; j < nc; ++j) {
            double d2 = norm2(x - centers[j].center);
            double s = centers[j].scale;
            double v = centers[j].singular ? std::pow(s / d2, beta) : std::pow(s / (s * s + d2), beta);
            total += v;
            if (j == self) mine = v;
        }
        return total > 0.0 ? mine / total : 0.0;
    };

    for (const Piece& pc : pieces) {
        const FeatureHint& h = centers[pc.center];
        const double s = h.scale;
        double phi0, width;
        int na;
        if (pc.phi_hi > pc.phi_lo) {
            phi0 = pc.phi_lo;
            width = pc.phi_hi - pc.phi_lo;
            na = std::max(12, static_cast<int>(std::ceil(opt.azimuth * width / (2.0 * kPi))));
        } else {
            phi0 = on_axis(h) ? 0.0 : in_plane_angle(h.center);
            width = 2.0 * kPi;
            na = opt.azimuth;
        }
        std::vector<double> cphi(na), sphi(na);
        for (int j = 0; j < na; ++j) {
            double ph = phi0 + (j + 0.5) * width / na;
            cphi[j] = std::cos(ph);
            sphi[j] = std::sin(ph);
        }
        const double wphi = width / na;

        const double reach = opt.support_radius > 0.0 ? opt.support_radius + norm(h.center) : 0.0;
        for (auto [rho, wr] : radial) {
            const double r = s * rho;
            if (reach > 0.0 && r > reach) continue;
            const double wrad = std::pow(s, n) * std::pow(rho, n - 1) * wr;
            for (auto [psi, wp] : polar) {
                const double sp = std::sin(psi), cp = std::cos(psi);
                const double wpol = sp * std::pow(cp, n - 3) * wp;
                for (const FiberNode& f : fiber) {
                    for (int j = 0; j < na; ++j) {
                        Vec x = h.center;
                        x[0] += r * sp * cphi[j];
                        x[1] += r * sp * sphi[j];
                        for (int l = 2; l < n; ++l) x[l] += r * cp * f.omega[l - 2];
                        if (opt.support_radius > 0.0 && norm2(x) > opt.support_radius * opt.support_radius) continue;
                        double wp_part = part(x, pc.center);
                        if (wp_part < 1e-18) continue;
                        visit(x, pc.multiplicity * wrad * wpol * f.weight * wphi * wp_part);
                    }
                }
            }
        }
    }
}

double integrate(const ScalarField& shape, const std::function<double(const Vec&)>& f,
                 const QuadratureOptions& opt) {
    std::vector<FeatureHint> centers = shape.features;
    if (centers.empty()) centers.push_back({Vec(shape.dim), 1.0, false});
    auto pieces = make_pieces(centers, shape.symmetry_order);
    double sum = 0.0;
    visit_nodes(shape.dim, centers, pieces, shape.axial, opt,
                [&](const Vec& x, double w) { sum += w * f(x); });
    return sum;
}

std::vector<double> integrate_many(int n, const std::vector<FeatureHint>& centers, int symmetry_order,
                                   bool axial, const QuadratureOptions& opt, int count,
                                   const std::function<void(const Vec&, double*)>& f) {
    std::vector<double> sum(count, 0.0), buf(count, 0.0);
    auto pieces = make_pieces(centers, symmetry_order);
    visit_nodes(n, centers, pieces, axial, opt, [&](const Vec& x, double w) {
        std::fill(buf.begin(), buf.end(), 0.0);
        f(x, buf.data());
        for (int i = 0; i < count; ++i) sum[i] += w * buf[i];
    });
    return sum;
}

}  // namespace tl
