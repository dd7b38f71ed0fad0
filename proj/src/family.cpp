#include "towerlab/family.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

namespace tl {

namespace {

Vec apply(const Eigen::MatrixXd& m, const Vec& x) {
    Vec y(x.n);
    for (int i = 0; i < x.n; ++i) {
        double s = 0.0;
        for (int j = 0; j < x.n; ++j) s += m(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

Vec apply_transpose(const Eigen::MatrixXd& m, const Vec& x) {
    Vec y(x.n);
    for (int i = 0; i < x.n; ++i) {
        double s = 0.0;
        for (int j = 0; j < x.n; ++j) s += m(j, i) * x[j];
        y[i] = s;
    }
    return y;
}

Eigen::MatrixXd plane_rotation(int n, int i, int j, double t) {
    Eigen::MatrixXd r = Eigen::MatrixXd::Identity(n, n);
    double c = std::cos(t), s = std::sin(t);
    // e_i -> c e_i + s e_j,  e_j -> -s e_i + c e_j
    r(i, i) = c;
    r(j, i) = s;
    r(i, j) = -s;
    r(j, j) = c;
    return r;
}

}  // namespace

int chart_index(int n, int i, int j) {
    if (i == 0 && j == 1) return 0;
    if (i == 0 && j >= 2) return j - 1;
    if (i == 1 && j >= 2) return (n - 2) + (j - 1);
    throw std::invalid_argument("chart_index: plane not in the chart");
}

Eigen::MatrixXd rotation_matrix(int n, const RotationChart& chart) {
    if (static_cast<int>(chart.theta.size()) != 2 * n - 3)
        throw std::invalid_argument("rotation_matrix: chart needs 2n-3 angles");
    Eigen::MatrixXd r = plane_rotation(n, 0, 1, chart.theta[0]);
    for (int l = 2; l < n; ++l) r = r * plane_rotation(n, 0, l, chart.theta[chart_index(n, 0, l)]);
    for (int l = 2; l < n; ++l) r = r * plane_rotation(n, 1, l, chart.theta[chart_index(n, 1, l)]);
    return r;
}

BubbleParams BubbleParams::identity(int n) {
    BubbleParams p;
    p.lambda = 1.0;
    p.xi = Vec(n);
    p.theta = RotationChart::identity(n);
    return p;
}

Vec BubbleParams::a_embedded() const {
    Vec v(dim());
    v[0] = a[0];
    v[1] = a[1];
    return v;
}

Vec BubbleParams::xi_hat() const { return apply(rotation_matrix(dim(), theta), xi); }

Vec BubbleParams::a_hat() const { return apply(rotation_matrix(dim(), theta), a_embedded()); }

Vec eta(double lambda, const Vec& xi, const Vec& a, const Vec& x) {
    Vec d = x - xi;
    double r = norm(d);
    if (r == 0.0) throw std::domain_error("eta: singular at x = xi");
    return (1.0 / r) * d - (r / lambda) * a;
}

FamilyMember::FamilyMember(const BubbleParams& params, ScalarField base)
    : params_(params), base_(std::move(base)), n_(params.dim()) {
    if (params_.lambda <= 0.0) throw std::invalid_argument("FamilyMember: lambda must be positive");
    if (params_.theta.theta.empty()) params_.theta = RotationChart::identity(n_);
    rot_ = rotation_matrix(n_, params_.theta);
    center_ = apply(rot_, params_.xi);
    a_ = params_.a_embedded();
}

FamilyMember::Frame FamilyMember::frame(const Vec& x) const {
    const double lam = params_.lambda;
    Vec w = (1.0 / lam) * (x - center_);
    const double w2 = norm2(w);
    const double dd = 1.0 - 2.0 * dot(a_, w) + norm2(a_) * w2;
    if (base_.kelvin_invariant && w2 > dd) {
        Vec y = (1.0 / w2) * w - a_;
        return {apply(rot_, y), 1.0 / (lam * w2)};
    }
    Vec y = (1.0 / dd) * (w - w2 * a_);
    return {apply(rot_, y), 1.0 / (lam * dd)};
}

double FamilyMember::value(const Vec& x) const {
    Frame f = frame(x);
    return std::pow(f.weight, 0.5 * (n_ - 2)) * base_(f.arg);
}

double FamilyMember::transported_source(const Vec& x, const ScalarField& base_source) const {
    Frame f = frame(x);
    return std::pow(f.weight, 0.5 * (n_ + 2)) * base_source(f.arg);
}

std::vector<FeatureHint> FamilyMember::features() const {
    std::vector<FeatureHint> out;
    const double lam = params_.lambda;
    for (const FeatureHint& h : base_.features) {
        Vec c = apply_transpose(rot_, h.center);
        Vec w(n_);
        double scale_w = h.scale;
        if (norm2(c) > 0.0) {
            Vec k1 = invert(c) + a_;
            w = norm2(k1) > 0.0 ? invert(k1) : Vec(n_);
            scale_w = h.scale * (1.0 - 2.0 * dot(a_, w) + norm2(a_) * norm2(w));
        }
        out.push_back({center_ + lam * w, lam * std::abs(scale_w), h.singular});
    }
    return out;
}

ScalarField FamilyMember::field() const {
    ScalarField f;
    f.dim = n_;
    auto self = std::make_shared<FamilyMember>(*this);
    f.value = [self](const Vec& x) { return self->value(x); };
    f.features = features();
    return f;
}

double q_family(const BubbleParams& params, const ScalarField& base, const Vec& x) {
    return FamilyMember(params, base).value(x);
}

BubbleSum transform(const BubbleSum& base, const BubbleParams& params) {
    const int n = base.dim();
    RotationChart chart = params.theta.theta.empty() ? RotationChart::identity(n) : params.theta;
    Eigen::MatrixXd rot = rotation_matrix(n, chart);
    Vec center = apply(rot, params.xi);
    Vec a = params.a_embedded();
    std::vector<Bubble> out;
    for (const Bubble& b : base.bubbles()) {
        // Kelvin, shift by a, Kelvin: centre c -> c/(s^2+|c|^2), scale s -> s/(s^2+|c|^2)
        Vec c = apply_transpose(rot, b.center);
        double s = b.scale;
        double m = s * s + norm2(c);
        c = (1.0 / m) * c;
        s = s / m;
        c += a;
        m = s * s + norm2(c);
        c = (1.0 / m) * c;
        s = s / m;
        out.push_back({b.sign, center + params.lambda * c, params.lambda * s});
    }
    return BubbleSum(n, std::move(out), false, 1);
}

}  // namespace tl
