#include "towerlab/greens.hpp"

#include <gsl/gsl_sf_gegenbauer.h>

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "towerlab/fields.hpp"

namespace tl {

DomainSpec DomainSpec::ball(int n) {
    DomainSpec d;
    d.kind = DomainKind::Ball;
    d.n = n;
    return d;
}

DomainSpec DomainSpec::annulus(int n, double delta) {
    DomainSpec d;
    d.kind = DomainKind::Annulus;
    d.n = n;
    d.delta = delta;
    return d;
}

DomainSpec DomainSpec::grid(LevelFunction level) {
    DomainSpec d;
    d.kind = DomainKind::Grid;
    d.n = 3;
    d.level = std::move(level);
    return d;
}

void DomainSpec::validate() const {
    if (n < 3 || n > 5) throw std::invalid_argument("DomainSpec: dimension must be 3, 4 or 5");
    if (kind == DomainKind::Annulus && !(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("DomainSpec: annulus requires 0 < delta < 1");
    if (kind == DomainKind::Grid && (n != 3 || !level))
        throw std::invalid_argument("DomainSpec: grid domains need n = 3 and a level function");
}

LevelFunction DomainSpec::level_function() const {
    switch (kind) {
    case DomainKind::Ball:
        return [](const Vec& x) { return norm(x) - 1.0; };
    case DomainKind::Annulus: {
        double d = delta;
        return [d](const Vec& x) {
            double r = norm(x);
            return std::max(r - 1.0, d - r);
        };
    }
    case DomainKind::Grid:
        return level;
    }
    return level;
}

bool DomainSpec::contains(const Vec& x) const { return level_function()(x) < 0.0; }

double DomainSpec::boundary_distance(const Vec& x) const {
    double r = norm(x);
    switch (kind) {
    case DomainKind::Ball:
        return 1.0 - r;
    case DomainKind::Annulus:
        return std::min(1.0 - r, r - delta);
    case DomainKind::Grid:
        return -level(x);
    }
    return 0.0;
}

std::string DomainSpec::describe() const {
    std::ostringstream s;
    switch (kind) {
    case DomainKind::Ball:
        s << "ball";
        break;
    case DomainKind::Annulus:
        s << "annulus(" << delta << ")";
        break;
    case DomainKind::Grid:
        s << "grid";
        break;
    }
    s << " n=" << n;
    return s.str();
}

double fundamental_solution(const Vec& x) {
    double r = norm(x);
    if (r == 0.0) throw std::domain_error("fundamental_solution: singular at 0");
    return newton_constant(x.n) * std::pow(r, 2.0 - x.n);
}

double ball_regular_part(const Vec& x, const Vec& y) {
    const int n = x.n;
    double q = norm2(x) * norm2(y) - 2.0 * dot(x, y) + 1.0;
    return newton_constant(n) * std::pow(q, 0.5 * (2 - n));
}

struct GreensProvider::GridState {
    std::shared_ptr<const GridDomain> grid;
    mutable std::mutex mtx;
    mutable std::map<std::array<long long, 3>, std::shared_ptr<const GridField>> cache;
};

namespace {

std::mutex g_grid_mtx;
std::map<std::string, std::weak_ptr<const GridDomain>> g_grids;

}  // namespace

std::shared_ptr<const GridDomain> shared_grid(const DomainSpec& domain, const GridSpec& spec) {
    domain.validate();
    if (domain.n != 3) throw std::invalid_argument("grid backends support n = 3 only");
    if (domain.kind == DomainKind::Grid) return std::make_shared<GridDomain>(domain.level_function(), spec);
    std::ostringstream key;
    key.precision(17);
    key << static_cast<int>(domain.kind) << ':' << domain.delta << ':' << spec.resolution << ':' << spec.half_width;
    std::lock_guard<std::mutex> lock(g_grid_mtx);
    auto& slot = g_grids[key.str()];
    if (auto p = slot.lock()) return p;
    auto p = std::make_shared<const GridDomain>(domain.level_function(), spec);
    slot = p;
    return p;
}

GreensProvider::GreensProvider(DomainSpec domain, GreensBackend backend, GreensOptions opt)
    : domain_(std::move(domain)), backend_(backend), opt_(opt) {
    domain_.validate();
    if (backend_ == GreensBackend::ClosedForm && domain_.kind != DomainKind::Ball)
        throw std::invalid_argument("GreensProvider: closed form is available for the ball only");
    if (backend_ == GreensBackend::Series && domain_.kind == DomainKind::Grid)
        throw std::invalid_argument("GreensProvider: series backend needs a ball or annulus");
    if (backend_ == GreensBackend::Grid) {
        grid_ = std::make_shared<GridState>();
        grid_->grid = shared_grid(domain_, opt_.grid);
    }
}

std::shared_ptr<const GridDomain> GreensProvider::grid_domain() const {
    if (!grid_) throw std::logic_error("GreensProvider: not a grid backend");
    return grid_->grid;
}

std::size_t GreensProvider::cached_solves() const {
    if (!grid_) return 0;
    std::lock_guard<std::mutex> lock(grid_->mtx);
    return grid_->cache.size();
}

std::shared_ptr<const GridField> GreensProvider::regular_field(const Vec& y) const {
    if (!grid_) throw std::logic_error("GreensProvider: not a grid backend");
    std::array<long long, 3> key;
    for (int d = 0; d < 3; ++d) key[d] = std::llround(y[d] * 1e9);
    {
        std::lock_guard<std::mutex> lock(grid_->mtx);
        auto it = grid_->cache.find(key);
        if (it != grid_->cache.end()) return it->second;
    }
    SolveReport rep;
    auto gam = [y](const Vec& x) { return fundamental_solution(x - y); };
    auto field = std::make_shared<const GridField>(grid_->grid->solve(gam, nullptr, &rep, opt_.cg_tol));
    if (!rep.converged)
        throw std::runtime_error("GreensProvider: grid solve did not converge (residual " +
                                 std::to_string(rep.residual) + ")");
    std::lock_guard<std::mutex> lock(grid_->mtx);
    grid_->cache.emplace(key, field);
    return field;
}

double GreensProvider::series_regular(const Vec& x, const Vec& y, GreensStatus* st) const {
    const int n = domain_.n;
    double h = ball_regular_part(x, y);
    GreensStatus s;
    if (domain_.kind == DomainKind::Ball) {
        if (st) *st = s;
        return h;
    }
    // inner-boundary correction in zonal harmonics about the source direction
    const double d = domain_.delta;
    const double r = norm(x), q = norm(y);
    const double t = std::clamp(dot(x, y) / (r * q), -1.0, 1.0);
    const double nu = 0.5 * (n - 2);
    const int cap = opt_.series_cap;
    std::vector<double> c(cap + 1);
    gsl_sf_gegenpoly_array(cap, nu, t, c.data());
    const double bn = newton_constant(n);
    const double ratio = d * d / (r * q);
    double sum = 0.0, term = 0.0;
    s.converged = false;
    for (int l = 0; l <= cap; ++l) {
        const int m = l + n - 2;
        const double dl = std::pow(d, 2 * l + n - 2);
        const double fr = std::pow(r, -m) - std::pow(r, l);
        const double fq = std::pow(q, -m) - std::pow(q, l);
        const double coef = dl * fr * fq / (1.0 - dl);
        const double g1 = n == 3 ? 1.0 : std::exp(std::lgamma(l + 2.0 * nu) - std::lgamma(l + 1.0) - std::lgamma(2.0 * nu));
        term = bn * coef * c[l];
        sum += term;
        s.terms = l + 1;
        // geometric tail bound using |C_l(t)| <= C_l(1)
        double bound = bn * std::abs(coef) * g1 * ratio / std::max(1e-300, 1.0 - ratio);
        s.tail = bound;
        if (l >= 2 && bound < opt_.series_tol * std::max(std::abs(h + sum), bn)) {
            s.converged = true;
            break;
        }
    }
    if (st) *st = s;
    return h + sum;
}

double GreensProvider::regular_part(const Vec& x, const Vec& y, GreensStatus* st) const {
    switch (backend_) {
    case GreensBackend::ClosedForm:
        if (st) *st = GreensStatus{};
        return ball_regular_part(x, y);
    case GreensBackend::Series:
        return series_regular(x, y, st);
    case GreensBackend::Grid: {
        if (st) *st = GreensStatus{};
        // symmetrized: average of the two source solves
        double a = regular_field(y)->interpolate(x);
        if (norm(x - y) == 0.0) return a;
        double b = regular_field(x)->interpolate(y);
        return 0.5 * (a + b);
    }
    }
    return 0.0;
}

double GreensProvider::green(const Vec& x, const Vec& y, GreensStatus* st) const {
    return fundamental_solution(x - y) - regular_part(x, y, st);
}

double GreensProvider::robin(const Vec& x, GreensStatus* st) const { return regular_part(x, x, st); }

double phi_pair(const GreensProvider& g, const Vec& xi1, const Vec& xi2) {
    if (norm(xi1 - xi2) == 0.0) throw std::invalid_argument("phi_pair: points must differ");
    double h1 = g.robin(xi1), h2 = g.robin(xi2);
    return std::sqrt(h1) * std::sqrt(h2) - g.green(xi1, xi2);
}

std::vector<std::pair<Vec, Vec>> sphere_pairs(int n, double sigma, int samples, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    auto direction = [&]() {
        Vec v(n);
        for (int i = 0; i < n; ++i) v[i] = gauss(rng);
        return (1.0 / norm(v)) * v;
    };
    std::vector<std::pair<Vec, Vec>> out;
    for (int s = 0; s < samples; ++s) {
        Vec a(n), b(n);
        if (s == 0) {
            a = unit(n, 0);
            b = -a;
        } else {
            do {
                a = direction();
                b = direction();
            } while (norm(a - b) < 1e-3);
        }
        out.emplace_back(sigma * a, sigma * b);
    }
    return out;
}

HoleReport check_hole_criterion(const GreensProvider& g, double sigma, int samples, unsigned seed) {
    const DomainSpec& d = g.domain();
    if (d.kind == DomainKind::Annulus && !(sigma > d.delta && sigma < 1.0))
        throw std::invalid_argument("check_hole_criterion: need delta < sigma < 1");
    HoleReport rep;
    rep.sigma = sigma;
    rep.samples = samples;
    rep.min_phi = INFINITY;
    rep.max_phi = -INFINITY;
    for (const auto& [a, b] : sphere_pairs(g.dim(), sigma, samples, seed)) {
        double v = phi_pair(g, a, b);
        if (rep.values.empty()) rep.antipodal_phi = v;
        rep.values.push_back(v);
        rep.min_phi = std::min(rep.min_phi, v);
        rep.max_phi = std::max(rep.max_phi, v);
    }
    rep.all_negative = rep.max_phi < 0.0;
    return rep;
}

}  // namespace tl
