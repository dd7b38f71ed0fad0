#include "towerlab/fields.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <memory>
#include <cmath>
#include <stdexcept>

namespace tl {

namespace {

constexpr double kPi = 3.14159265358979323846;

// t^{m/2} for integer m >= 0
inline double pow_half(double t, int m) {
    double r = 1.0;
    for (int i = 0; i < m / 2; ++i) r *= t;
    if (m % 2) r *= std::sqrt(t);
    return r;
}

}  // namespace

Vec ScalarField::gradient(const Vec& x) const {
    if (!grad) throw std::logic_error("ScalarField: no gradient attached");
    return grad(x);
}

double critical_exponent(int n) { return (n + 2.0) / (n - 2.0); }

double bubble_gamma(int n) { return std::pow(n * (n - 2.0) / 4.0, (n - 2.0) / 4.0); }

double sphere_area(int n) { return 2.0 * std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n); }

double newton_constant(int n) { return 1.0 / ((n - 2.0) * sphere_area(n)); }

RadialValues bubble_radial(int n, double r) {
    const double nu = 0.5 * (n - 2);
    const double g = bubble_gamma(n);
    const double q = 1.0 + r * r;
    const double u = g * std::pow(2.0 / q, nu);
    // U' = -2 nu r U / q,  U'' from differentiating once more
    const double du = -2.0 * nu * r * u / q;
    const double d2u = -2.0 * nu * (u / q + r * du / q - 2.0 * r * r * u / (q * q));
    return {u, du, d2u};
}

BubbleSum::BubbleSum(int n, std::vector<Bubble> bubbles, bool kelvin_invariant, int symmetry_order)
    : n_(n), p_(critical_exponent(n)), gamma_(bubble_gamma(n)), bubbles_(std::move(bubbles)),
      kelvin_(kelvin_invariant), symmetry_(symmetry_order) {
    if (n < 3 || n > kMaxDim) throw std::invalid_argument("BubbleSum: dimension must be in 3..5");
}

double BubbleSum::value(const Vec& x) const {
    double v = 0.0;
    for (const Bubble& b : bubbles_) {
        double t = 2.0 * b.scale / (b.scale * b.scale + norm2(x - b.center));
        v += b.sign * gamma_ * pow_half(t, n_ - 2);
    }
    return v;
}

Vec BubbleSum::gradient(const Vec& x) const {
    Vec g(n_);
    const double nu = 0.5 * (n_ - 2);
    for (const Bubble& b : bubbles_) {
        Vec d = x - b.center;
        double q = b.scale * b.scale + norm2(d);
        double u = gamma_ * pow_half(2.0 * b.scale / q, n_ - 2);
        g += (-2.0 * nu * b.sign * u / q) * d;
    }
    return g;
}

double BubbleSum::source(const Vec& x) const {
    double s = 0.0;
    const double gp = std::pow(gamma_, p_);
    for (const Bubble& b : bubbles_) {
        double t = 2.0 * b.scale / (b.scale * b.scale + norm2(x - b.center));
        s += b.sign * gp * pow_half(t, n_ + 2);
    }
    return s;
}

void BubbleSum::value_and_source(const Vec& x, double& v, double& s) const {
    v = 0.0;
    s = 0.0;
    const double gp = std::pow(gamma_, p_);
    for (const Bubble& b : bubbles_) {
        double t = 2.0 * b.scale / (b.scale * b.scale + norm2(x - b.center));
        double th = pow_half(t, n_ - 2);
        v += b.sign * gamma_ * th;
        s += b.sign * gp * th * t * t;
    }
}

std::vector<FeatureHint> BubbleSum::features() const {
    std::vector<FeatureHint> out;
    for (const Bubble& b : bubbles_) out.push_back({b.center, b.scale, false});
    return out;
}

namespace {

bool centers_axial(const std::vector<Bubble>& bs) {
    for (const Bubble& b : bs)
        for (int l = 2; l < b.center.n; ++l)
            if (b.center[l] != 0.0) return false;
    return true;
}

}  // namespace

ScalarField BubbleSum::field() const {
    ScalarField f;
    f.dim = n_;
    auto self = std::make_shared<BubbleSum>(*this);
    f.value = [self](const Vec& x) { return self->value(x); };
    f.grad = [self](const Vec& x) { return self->gradient(x); };
    f.features = features();
    f.symmetry_order = symmetry_;
    f.axial = centers_axial(bubbles_);
    f.kelvin_invariant = kelvin_;
    return f;
}

ScalarField BubbleSum::source_field() const {
    ScalarField f;
    f.dim = n_;
    auto self = std::make_shared<BubbleSum>(*this);
    f.value = [self](const Vec& x) { return self->source(x); };
    f.features = features();
    f.symmetry_order = symmetry_;
    f.axial = centers_axial(bubbles_);
    return f;
}

BubbleSum single_bubble(int n) { return BubbleSum(n, {{1.0, Vec(n), 1.0}}, true, 1); }

ScalarField standard_bubble(int n) {
    if (n < 3) throw std::invalid_argument("standard_bubble: n must be at least 3");
    return single_bubble(n).field();
}

void TowerConfig::validate() const {
    if (n < 3 || n > 5) throw std::invalid_argument("TowerConfig: n must be 3, 4 or 5");
    if (k < 8) throw std::invalid_argument("TowerConfig: k must be at least 8");
}

double solve_mu(const TowerConfig& config) {
    config.validate();
    const double nu = 0.5 * (config.n - 2);
    double sum = 0.0;
    for (int l = 2; l <= config.k; ++l) {
        double theta = 2.0 * kPi * (l - 1) / config.k;
        sum += std::pow(1.0 - std::cos(theta), -nu);
    }
    return std::pow(sum, -1.0 / nu);
}

TowerProfile build_tower(const TowerConfig& config) {
    config.validate();
    TowerProfile t;
    t.config = config;
    t.mu = solve_mu(config);
    t.gamma = bubble_gamma(config.n);
    const double rad = std::sqrt(1.0 - t.mu * t.mu);
    std::vector<Bubble> bubbles;
    bubbles.push_back({1.0, Vec(config.n), 1.0});
    for (int l = 1; l <= config.k; ++l) {
        double theta = 2.0 * kPi * (l - 1) / config.k;
        Vec xi(config.n);
        xi[0] = rad * std::cos(theta);
        xi[1] = rad * std::sin(theta);
        t.spikes.push_back(xi);
        bubbles.push_back({-1.0, xi, t.mu});
    }
    t.shape = BubbleSum(config.n, std::move(bubbles), true, config.k);
    t.field = t.shape.field();
    return t;
}

ScalarField tower_residual(const BubbleSum& shape) {
    ScalarField f;
    f.dim = shape.dim();
    auto self = std::make_shared<BubbleSum>(shape);
    const double p = shape.exponent();
    f.value = [self, p](const Vec& x) {
        double v, s;
        self->value_and_source(x, v, s);
        return -s + std::pow(std::abs(v), p - 1.0) * v;
    };
    ScalarField base = shape.field();
    f.features = base.features;
    f.symmetry_order = base.symmetry_order;
    f.axial = base.axial;
    return f;
}

ScalarField tower_residual(const TowerProfile& profile) { return tower_residual(profile.shape); }

Vec rotate_in_plane(const Vec& x, double angle) {
    Vec y = x;
    double c = std::cos(angle), s = std::sin(angle);
    y[0] = c * x[0] - s * x[1];
    y[1] = s * x[0] + c * x[1];
    return y;
}

namespace {

std::vector<Vec> sample_directions(int n, int count) {
    // product grid in (polar, azimuth), fiber fixed along x3
    int side = std::max(2, static_cast<int>(std::lround(std::sqrt(static_cast<double>(count)))));
    std::vector<Vec> dirs;
    for (int i = 0; i < side; ++i) {
        double psi = (i + 0.5) * kPi / side;  // angle from the x3 axis, full range
        for (int j = 0; j < side; ++j) {
            double phi = (j + 0.5) * 2.0 * kPi / side;
            Vec d(n);
            d[0] = std::sin(psi) * std::cos(phi);
            d[1] = std::sin(psi) * std::sin(phi);
            d[2] = std::cos(psi);
            dirs.push_back(d);
        }
    }
    return dirs;
}

}  // namespace

double weighted_norm(const ScalarField& field, NormFlavor flavor, double q, const NormOptions& opt) {
    const int n = field.dim;
    if (flavor == NormFlavor::Lq) {
        if (!(q > 0.5 * n && q < n)) throw std::invalid_argument("weighted_norm: q must lie in (n/2, n)");
        const double e = (n + 2.0 - 2.0 * n / q) * q;
        double s = integrate(
            field,
            [&](const Vec& y) { return std::pow(1.0 + norm(y), e) * std::pow(std::abs(field(y)), q); },
            opt.quadrature);
        return std::pow(s, 1.0 / q);
    }
    auto weighted = [&](const Vec& y) { return (1.0 + std::pow(norm(y), n - 2)) * std::abs(field(y)); };
    const auto dirs = sample_directions(n, opt.directions);
    double best = weighted(Vec(n));
    Vec best_at(n);
    auto consider = [&](const Vec& y) {
        double v = weighted(y);
        if (v > best) {
            best = v;
            best_at = y;
        }
    };
    const double lr0 = std::log(opt.r_min), lr1 = std::log(opt.r_max);
    for (int i = 0; i < opt.shells; ++i) {
        double r = std::exp(lr0 + (lr1 - lr0) * i / (opt.shells - 1));
        for (const Vec& d : dirs) consider(r * d);
    }
    for (const FeatureHint& h : field.features) {
        for (int j = 0; j < opt.spike_samples; ++j) {
            double r = h.scale * std::pow(2.0, j - 4);
            for (const Vec& d : dirs) consider(h.center + r * d);
        }
    }
    // refine along the ray through the best sample
    double rb = norm(best_at);
    if (rb > 0.0) {
        Vec dir = (1.0 / rb) * best_at;
        auto neg = [&](double r) { return -weighted(r * dir); };
        auto res = boost::math::tools::brent_find_minima(neg, 0.8 * rb, 1.25 * rb, 40);
        best = std::max(best, -res.second);
    }
    return best;
}

double green_representation_check(const BubbleSum& shape, const Vec& x, const QuadratureOptions& opt) {
    const int n = shape.dim();
    const double bn = newton_constant(n);
    std::vector<FeatureHint> centers = shape.features();
    bool merged = false;
    for (auto& c : centers) {
        if (norm(c.center - x) == 0.0) {
            c.singular = true;
            merged = true;
        }
    }
    if (!merged) {
        double sc = 1.0;
        for (const auto& c : centers) sc = std::min(sc, std::max(c.scale, norm(c.center - x)));
        centers.push_back({x, 0.5 * sc, true});
    }
    bool at_origin = norm(x) == 0.0;
    bool axial = shape.field().axial;
    for (int l = 2; l < n; ++l) axial = axial && x[l] == 0.0;
    int sym = at_origin ? shape.symmetry_order() : 1;
    QuadratureOptions o = opt;
    if (shape.symmetry_order() > 1) {
        int k = shape.symmetry_order();
        o.azimuth = ((o.azimuth + k - 1) / k) * k;
    }
    auto vals = integrate_many(n, centers, sym, axial, o, 1, [&](const Vec& z, double* out) {
        double d2 = norm2(z - x);
        out[0] = bn * std::pow(d2, 1.0 - 0.5 * n) * shape.source(z);
    });
    return std::abs(shape.value(x) - vals[0]);
}

}  // namespace tl
