#include "towerlab/checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include "towerlab/energy.hpp"
#include "towerlab/family.hpp"
#include "towerlab/fields.hpp"
#include "towerlab/greens.hpp"
#include "towerlab/kernel.hpp"
#include "towerlab/projection.hpp"
#include "towerlab/reduced.hpp"

namespace tl {

using nlohmann::json;

namespace {

std::string num(double v, const char* f = "%.4g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

json vec_json(const Vec& x) {
    json a = json::array();
    for (int i = 0; i < x.n; ++i) a.push_back(x[i]);
    return a;
}

Vec random_direction(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Vec d(n);
    double r = 0.0;
    while (r < 1e-8) {
        for (int i = 0; i < n; ++i) d[i] = g(rng);
        r = norm(d);
    }
    return (1.0 / r) * d;
}

// Series provider accurate enough for finite-difference gradients of Ψ.
GreensProvider search_provider(const DomainSpec& dom) {
    GreensOptions go;
    go.series_tol = 1e-15;
    go.series_cap = 200;
    return GreensProvider(dom, dom.kind == DomainKind::Ball ? GreensBackend::ClosedForm : GreensBackend::Series, go);
}

DomainSpec config_domain(const RunConfig& cfg, int n) {
    return cfg.domain_kind() == "ball" ? DomainSpec::ball(n) : DomainSpec::annulus(n, cfg.delta());
}

BubbleParams params_at(int n, double lambda, const Vec& xi, std::array<double, 2> a) {
    BubbleParams p = BubbleParams::identity(n);
    p.lambda = lambda;
    p.xi = xi;
    p.a = a;
    return p;
}

std::array<double, 2> plane_of(const RunConfig& cfg, const std::string& path) {
    std::vector<double> v = cfg.get_list(path);
    return {v.size() > 0 ? v[0] : 0.0, v.size() > 1 ? v[1] : 0.0};
}

json fit_json(const OrderFit& f) {
    return {{"lambdas", f.lambdas},
            {"residuals", f.residuals},
            {"coefficients", f.coefficients},
            {"slope", f.slope},
            {"predicted_coefficient", f.predicted_coefficient},
            {"coefficient_error", f.coefficient_error}};
}

Table fit_table(const std::string& name, const OrderFit& f) {
    Table t{name, {"lambda", "residual", "coefficient"}, {}};
    for (std::size_t i = 0; i < f.lambdas.size(); ++i) t.rows.push_back({f.lambdas[i], f.residuals[i], f.coefficients[i]});
    return t;
}

json saddle_json(const SaddleResult& s) {
    json j = {{"psi", s.psi},
              {"grad_norm", s.grad_norm},
              {"converged", s.converged},
              {"saddle", s.saddle},
              {"in_bracket", s.in_bracket},
              {"pinned", s.pinned},
              {"lambda", {s.critical.first.lambda, s.critical.second.lambda}},
              {"xi", {vec_json(s.critical.first.xi_hat()), vec_json(s.critical.second.xi_hat())}},
              {"a", {s.critical.first.a, s.critical.second.a}},
              {"hessian_eigenvalues", s.hessian_eigenvalues},
              {"lambda_curvature", s.lambda_curvature},
              {"trace", s.trace},
              {"seed_values", s.seed_values},
              {"seed_grads", s.seed_grads},
              {"seed_spread", s.seed_spread},
              {"stationary",
               {{"exists", s.stationary.exists},
                {"lambda", {s.stationary.big1, s.stationary.big2}},
                {"psi", s.stationary.psi},
                {"lambda_bare", {s.stationary.big1_bare, s.stationary.big2_bare}},
                {"psi_bare", s.stationary.psi_bare},
                {"psi_at_bare_lambda", s.stationary.psi_at_bare}}},
              {"failure", s.failure}};
    json conv = json::array();
    for (bool b : s.seed_converged) conv.push_back(b);
    j["seed_converged"] = conv;
    return j;
}

json bracket_json(const LevelBracket& b) {
    return {{"hole_ok", b.hole_ok},
            {"valid", b.valid},
            {"sigma", b.sigma},
            {"R", b.R},
            {"attempts", b.attempts},
            {"A", b.A},
            {"B", b.B},
            {"boundary_max", b.boundary_max},
            {"edge_max", b.edge_max},
            {"hyperbola_min", b.hyperbola_min},
            {"l", b.l},
            {"interior_pairs", b.interior_pairs},
            {"skipped", b.skipped},
            {"a_radius", b.a.radius},
            {"q_range", {b.a.min_q, b.a.max_q}},
            {"q_sign_change", b.a.sign_change},
            {"hole_min_phi", b.hole.min_phi},
            {"hole_max_phi", b.hole.max_phi},
            {"failure", b.failure}};
}

json assemble_json(const AssembleReport& r) {
    return {{"epsilon", r.epsilon},
            {"zeta", r.zeta},
            {"lambda", {r.lambda1, r.lambda2}},
            {"min", r.min_value},
            {"max", r.max_value},
            {"sign_changing", r.sign_changing},
            {"center_value", {r.center_value[0], r.center_value[1]}},
            {"center_profile", {r.center_profile[0], r.center_profile[1]}},
            {"residual_l2", r.residual.l2},
            {"residual_max", r.residual.max},
            {"energy", r.energy},
            {"energy_grid", r.energy_grid},
            {"energy_target", r.energy_target},
            {"energy_error", r.energy_error},
            {"ok", r.ok},
            {"failure", r.failure}};
}

}  // namespace

bool CheckResult::expect(bool ok, const std::string& what) {
    if (!ok) {
        pass = false;
        failures.push_back(name.empty() ? what : name + ": " + what);
    }
    return ok;
}

void CheckResult::merge(const std::string& key, CheckResult other) {
    pass = pass && other.pass;
    data[key] = std::move(other.data);
    for (auto& f : other.failures) failures.push_back(std::move(f));
    for (auto& t : other.tables) tables.push_back(std::move(t));
    for (auto& f : other.fields) fields.push_back(std::move(f));
    if (!other.detail.empty()) detail += (detail.empty() ? "" : "; ") + other.detail;
}

// ---------------------------------------------------------------- fields

CheckResult exact_identity_check(int n, int k, int points, unsigned seed) {
    CheckResult r;
    r.name = "identities n=" + std::to_string(n);
    TowerProfile t = build_tower({n, k});
    const ScalarField& u = t.field;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> logr(std::log(0.1), std::log(10.0));
    double kelvin = 0.0, rotation = 0.0, parity = 0.0, family = 0.0, ring = 0.0;
    FamilyMember id(BubbleParams::identity(n), u);
    for (int i = 0; i < points; ++i) {
        Vec x = std::exp(logr(rng)) * random_direction(n, rng);
        const double v = u(x);
        const double scale = std::max(1.0, std::abs(v));
        kelvin = std::max(kelvin, std::abs(std::pow(norm(x), 2.0 - n) * u(invert(x)) - v) / scale);
        rotation = std::max(rotation, std::abs(u(rotate_in_plane(x, 2.0 * M_PI / k)) - v) / scale);
        for (int j = 1; j < n; ++j) {
            Vec y = x;
            y[j] = -y[j];
            parity = std::max(parity, std::abs(u(y) - v) / scale);
        }
        family = std::max(family, std::abs(id.value(x) - v) / scale);
    }
    for (const Vec& s : t.spikes) ring = std::max(ring, std::abs(norm2(s) + t.mu * t.mu - 1.0));
    r.data = {{"n", n},         {"k", k},          {"points", points},      {"kelvin", kelvin},
              {"rotation", rotation}, {"parity", parity}, {"identity_member", family}, {"spike_ring", ring}};
    r.expect(kelvin <= 1e-12, "Kelvin invariance " + num(kelvin));
    r.expect(rotation <= 1e-12, "rotation invariance " + num(rotation));
    r.expect(parity <= 1e-12, "evenness " + num(parity));
    r.expect(family <= 1e-12, "identity parameters " + num(family));
    r.expect(ring <= 1e-14, "|xi_l|^2 + mu^2 = 1 " + num(ring));
    r.detail = "n=" + std::to_string(n) + " max dev " + num(std::max({kelvin, rotation, parity, family}));
    return r;
}

CheckResult build_tower_check(const RunConfig& cfg) {
    CheckResult r;
    r.name = "build-tower";
    const int n = cfg.dimension(), k = cfg.k();
    TowerProfile t = build_tower({n, k});
    ARange ar = a_range(t.shape);
    ScalarField e = tower_residual(t);
    NormOptions no;
    no.quadrature = cfg.quadrature();
    const double q = 0.75 * n;
    double sup = weighted_norm(e, NormFlavor::Sup, 0.0, no);
    double lq = weighted_norm(e, NormFlavor::Lq, q, no);
    double ring = 0.0;
    Table spikes{"spikes", {"index", "x1", "x2"}, {}};
    for (std::size_t i = 0; i < t.spikes.size(); ++i) {
        ring = std::max(ring, std::abs(norm2(t.spikes[i]) + t.mu * t.mu - 1.0));
        spikes.rows.push_back({double(i), t.spikes[i][0], t.spikes[i][1]});
    }
    r.tables.push_back(spikes);
    r.data = {{"n", n},
              {"k", k},
              {"mu", t.mu},
              {"mu_k2", t.mu * k * k},
              {"gamma", t.gamma},
              {"center_value", t.field(Vec(n))},
              {"residual_at_center", e(Vec(n))},
              {"residual_sup_norm", sup},
              {"residual_lq_norm", lq},
              {"lq_exponent", q},
              {"q_on_half_disk", {ar.min_q, ar.max_q}},
              {"q_sign_change", ar.sign_change},
              {"spike_ring", ring}};
    r.expect(t.mu > 0.0, "mu must be positive");
    r.expect(ring <= 1e-14, "spikes off the ring |xi|^2 + mu^2 = 1");
    r.expect(std::isfinite(sup) && std::isfinite(lq), "residual norms not finite");
    r.merge("identities", exact_identity_check(n, k, 100, cfg.rng_seed()));
    r.detail = "mu=" + num(t.mu, "%.6f") + " U*(0)=" + num(t.field(Vec(n)));
    return r;
}

CheckResult pohozaev_check(int n, const QuadratureOptions& q) {
    CheckResult r;
    r.name = "pohozaev n=" + std::to_string(n);
    WholeSpaceEnergy w = whole_space_energy(standard_bubble(n), q);
    const double rel = std::abs(w.gradient - w.potential) / w.potential;
    r.data = {{"n", n}, {"gradient", w.gradient}, {"potential", w.potential}, {"relative_gap", rel},
              {"energy", w.energy}, {"refinement_change", w.change}};
    r.expect(rel < 1e-4, "gradient/potential gap " + num(rel));
    r.detail = "n=" + std::to_string(n) + " gap " + num(rel, "%.2e");
    return r;
}

CheckResult spike_energy_check(int n, const std::vector<int>& ks, const QuadratureOptions& q) {
    CheckResult r;
    r.name = "energy per spike";
    Table t{"energy_per_spike", {"k", "energy", "per_spike", "refinement_change"}, {}};
    std::vector<double> per;
    json rows = json::array();
    for (int k : ks) {
        TowerProfile tw = build_tower({n, k});
        WholeSpaceEnergy w = whole_space_energy(tw.field, q, 1e-4);
        per.push_back(w.energy / (k + 1));
        t.rows.push_back({double(k), w.energy, per.back(), w.change});
        rows.push_back({{"k", k}, {"energy", w.energy}, {"per_spike", per.back()}, {"converged", w.converged},
                        {"change", w.change}});
        r.expect(w.converged, "quadrature not converged at k=" + std::to_string(k));
    }
    std::vector<double> ratios;
    for (std::size_t i = 1; i < per.size(); ++i) {
        ratios.push_back(per[i] / per[i - 1]);
        r.expect(std::abs(ratios.back() - 1.0) < 0.1, "per-spike energy ratio " + num(ratios.back()));
    }
    r.tables.push_back(t);
    r.data = {{"n", n}, {"rows", rows}, {"ratios", ratios}, {"single_bubble", whole_space_energy(standard_bubble(n), q).energy}};
    std::string s;
    for (double x : ratios) s += (s.empty() ? "" : ", ") + num(x, "%.3f");
    r.detail = "n=" + std::to_string(n) + " ratios " + s;
    return r;
}

CheckResult error_norm_check(int n, double q_exp, const std::vector<int>& ks, const QuadratureOptions& q) {
    CheckResult r;
    r.name = "error norm scaling";
    NormOptions no;
    no.quadrature = q;
    std::vector<double> norms, ratios;
    Table t{"error_norm", {"k", "norm"}, {}};
    for (int k : ks) {
        norms.push_back(weighted_norm(tower_residual(build_tower({n, k})), NormFlavor::Lq, q_exp, no));
        t.rows.push_back({double(k), norms.back()});
    }
    const double target = std::pow(2.0, 1.0 - n / q_exp);
    for (std::size_t i = 1; i < norms.size(); ++i) {
        ratios.push_back(norms[i] / norms[i - 1]);
        r.expect(std::abs(ratios.back() / target - 1.0) <= 0.3, "doubling ratio " + num(ratios.back()) +
                                                                     " vs " + num(target));
        r.expect(norms[i] < norms[i - 1], "norm does not decrease in k");
    }
    r.tables.push_back(t);
    r.data = {{"n", n}, {"q", q_exp}, {"ks", ks}, {"norms", norms}, {"ratios", ratios}, {"target_ratio", target}};
    std::string s;
    for (double x : ratios) s += (s.empty() ? "" : ", ") + num(x, "%.3f");
    r.detail = "ratios " + s + " (target " + num(target, "%.3f") + ")";
    return r;
}

// ---------------------------------------------------------------- kernel

CheckResult kernel_identity_check(int n, int k, int points, double step, unsigned seed) {
    CheckResult r;
    r.name = "kernel n=" + std::to_string(n);
    TowerProfile t = build_tower({n, k});
    KernelBasis basis(t.field);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double worst = 0.0, worst_flipped = 0.0;
    std::vector<double> ratios;
    Table tab{"kernel_identities_n" + std::to_string(n), {"alpha", "point", "radius", "z", "residual", "residual_half",
                                                          "residual_flipped_a_sign"}, {}};
    for (int i = 0; i < points; ++i) {
        Vec x = 1.5 * std::pow(uni(rng), 1.0 / n) * random_direction(n, rng);
        for (int a = 0; a < basis.size(); ++a) {
            const double z = basis.value(a, x);
            const double scale = 1.0 + std::abs(z);
            const double r1 = derivative_identity_residual(basis, a, x, step);
            const double r2 = derivative_identity_residual(basis, a, x, 0.5 * step);
            const double rp = derivative_identity_residual(basis, a, x, step, SignConvention::FlippedA);
            worst = std::max(worst, r1 / scale);
            worst_flipped = std::max(worst_flipped, rp / scale);
            if (r1 > 1e-9 * scale && r2 > 0.0) ratios.push_back(r1 / r2);
            tab.rows.push_back({double(a), double(i), norm(x), z, r1, r2, rp});
        }
    }
    double median = 0.0;
    if (!ratios.empty()) {
        std::vector<double> s = ratios;
        std::nth_element(s.begin(), s.begin() + s.size() / 2, s.end());
        median = s[s.size() / 2];
    }
    r.tables.push_back(tab);
    r.data = {{"n", n}, {"k", k}, {"points", points}, {"step", step}, {"max_scaled_residual", worst},
              {"max_scaled_residual_flipped_a_sign", worst_flipped}, {"richardson_median", median},
              {"richardson_samples", ratios.size()}};
    r.expect(worst < 1e-5, "identity residual " + num(worst));
    r.expect(!ratios.empty() && std::abs(median - 4.0) <= 0.8, "Richardson ratio " + num(median));
    r.detail = "n=" + std::to_string(n) + " max " + num(worst, "%.2e") + " Richardson " + num(median, "%.2f");
    return r;
}

CheckResult verify_kernel_check(const RunConfig& cfg) {
    CheckResult r;
    r.name = "verify-kernel";
    r.merge("identities", kernel_identity_check(cfg.dimension(), cfg.k(), static_cast<int>(cfg.get("kernel.points")),
                                                cfg.get("kernel.step"), cfg.rng_seed()));
    const int n = cfg.dimension();
    KernelBasis basis(build_tower({n, cfg.k()}).field);
    GramOptions go;
    go.check_convergence = false;
    GramReport g = gram_matrix(basis, go);
    json blocks = json::array();
    for (const auto& b : g.blocks)
        blocks.push_back({{"pair", {b.first, b.second}}, {"determinant", b.determinant}, {"condition", b.condition}});
    std::vector<double> sv(g.singular_values.data(), g.singular_values.data() + g.singular_values.size());
    r.data["gram"] = {{"rank", g.rank}, {"condition", g.condition}, {"asymmetry", g.asymmetry},
                      {"max_parity_entry", g.max_parity_entry}, {"singular_values", sv}, {"blocks", blocks}};
    Table tab{"gram_matrix", {}, {}};
    for (int j = 0; j < g.matrix.cols(); ++j) tab.header.push_back("z" + std::to_string(j));
    for (int i = 0; i < g.matrix.rows(); ++i) {
        std::vector<double> row(g.matrix.cols());
        for (int j = 0; j < g.matrix.cols(); ++j) row[j] = g.matrix(i, j);
        tab.rows.push_back(row);
    }
    r.tables.push_back(tab);
    r.expect(g.rank == 3 * n, "Gram rank " + std::to_string(g.rank));
    r.detail += "; Gram rank " + std::to_string(g.rank);
    return r;
}

// ---------------------------------------------------------------- greens

CheckResult greens_oracle_check(int resolution, int points, double cross_delta, const std::vector<double>& deltas,
                                unsigned seed) {
    CheckResult r;
    r.name = "greens";
    GreensOptions go;
    go.grid.resolution = resolution;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    auto sample = [&](double lo, double hi) {
        std::vector<Vec> p;
        for (int i = 0; i < points; ++i) p.push_back((lo + (hi - lo) * uni(rng)) * random_direction(3, rng));
        return p;
    };
    auto compare = [&](const GreensProvider& grid, const GreensProvider& ref, const std::vector<Vec>& p,
                       const std::string& tag) {
        double worst = 0.0, asym = 0.0;
        int pairs = 0;
        Table t{"greens_" + tag, {"pair", "distance", "reference", "grid", "relative_error"}, {}};
        for (std::size_t i = 0; i < p.size(); ++i)
            for (std::size_t j = i + 1; j < p.size(); ++j) {
                if (norm(p[i] - p[j]) <= 0.1) continue;
                const double g0 = ref.green(p[i], p[j]);
                const double g1 = grid.green(p[i], p[j]);
                asym = std::max(asym, std::abs(grid.green(p[j], p[i]) - g1));
                const double e = std::abs(g1 - g0) / std::abs(g0);
                worst = std::max(worst, e);
                t.rows.push_back({double(pairs++), norm(p[i] - p[j]), g0, g1, e});
            }
        r.tables.push_back(t);
        return json{{"pairs", pairs}, {"max_relative_error", worst}, {"grid_asymmetry", asym}};
    };

    GreensProvider ball_exact(DomainSpec::ball(3), GreensBackend::ClosedForm);
    GreensProvider ball_grid(DomainSpec::ball(3), GreensBackend::Grid, go);
    json jb = compare(ball_grid, ball_exact, sample(0.1, 0.7), "ball");
    GreensProvider ann_series(DomainSpec::annulus(3, cross_delta), GreensBackend::Series);
    GreensProvider ann_grid(DomainSpec::annulus(3, cross_delta), GreensBackend::Grid, go);
    json ja = compare(ann_grid, ann_series, sample(cross_delta + 0.15, 0.75), "annulus");
    r.expect(jb["max_relative_error"].get<double>() < 1e-2, "ball grid vs closed form " +
                                                              num(jb["max_relative_error"].get<double>()));
    r.expect(ja["max_relative_error"].get<double>() < 1e-2, "annulus grid vs series " +
                                                              num(ja["max_relative_error"].get<double>()));

    // annulus -> ball as the hole shrinks
    std::vector<Vec> p = sample(0.3, 0.8);
    std::vector<double> errs;
    Table t{"greens_hole_limit", {"delta", "max_relative_difference"}, {}};
    for (double d : deltas) {
        GreensProvider s(DomainSpec::annulus(3, d), GreensBackend::Series);
        double worst = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i)
            for (std::size_t j = i + 1; j < p.size(); ++j) {
                if (norm(p[i] - p[j]) <= 0.1) continue;
                const double g0 = ball_exact.green(p[i], p[j]);
                worst = std::max(worst, std::abs(s.green(p[i], p[j]) - g0) / g0);
            }
        errs.push_back(worst);
        t.rows.push_back({d, worst});
    }
    r.tables.push_back(t);
    bool monotone = true;
    for (std::size_t i = 1; i < errs.size(); ++i) monotone = monotone && errs[i] < errs[i - 1];
    r.expect(monotone, "annulus -> ball convergence not monotone");
    r.data = {{"resolution", resolution}, {"ball", jb}, {"annulus", ja}, {"cross_delta", cross_delta},
              {"hole_limit", {{"deltas", deltas}, {"max_relative_difference", errs}, {"monotone", monotone}}}};
    r.detail = "ball " + num(jb["max_relative_error"].get<double>(), "%.2e") + " annulus " +
               num(ja["max_relative_error"].get<double>(), "%.2e") + (monotone ? " monotone" : " not monotone");
    return r;
}

CheckResult greens_check(const RunConfig& cfg) {
    CheckResult r = greens_oracle_check(cfg.grid(), static_cast<int>(cfg.get("greens.points")),
                                        cfg.get("greens.cross_delta"), cfg.get_list("greens.deltas"), cfg.rng_seed());
    r.name = "greens-check";
    return r;
}

// ---------------------------------------------------------------- projection

CheckResult projection_order_check(const RunConfig& cfg, bool grid) {
    CheckResult r;
    r.name = grid ? "projection (grid)" : "projection (mesh-free)";
    const int n = grid ? 3 : cfg.dimension();
    DomainSpec dom = DomainSpec::annulus(n, cfg.get("projection.delta"));
    BubbleParams templ = params_at(n, 1.0, cfg.point("projection.center", n), plane_of(cfg, "projection.a"));
    std::vector<double> lambdas = cfg.lambdas();
    GridSpec spec{cfg.grid(), 1.0};
    auto fit = [&](const BubbleSum& base) {
        return grid ? expansion_order_fit(dom, templ, base, lambdas, spec)
                    : expansion_order_fit_exact(dom, templ, base, lambdas);
    };
    OrderFit tower = fit(build_tower({n, cfg.k()}).shape);
    OrderFit single = fit(single_bubble(n));
    r.tables.push_back(fit_table(std::string("order_fit_tower") + (grid ? "_grid" : ""), tower));
    r.tables.push_back(fit_table(std::string("order_fit_single") + (grid ? "_grid" : ""), single));
    r.data = {{"n", n}, {"grid", grid}, {"tower", fit_json(tower)}, {"single", fit_json(single)},
              {"theory_slope", 0.5 * n}};
    r.expect(tower.slope >= 1.2, "tower slope " + num(tower.slope));
    r.expect(single.slope >= 1.3, "single-bubble slope " + num(single.slope));
    r.expect(single.coefficient_error < 0.1, "single-bubble coefficient error " + num(single.coefficient_error));
    r.detail = "slope tower " + num(tower.slope, "%.3f") + " single " + num(single.slope, "%.3f") + " coeff err " +
               num(single.coefficient_error, "%.2e");
    return r;
}

CheckResult projection_check(const RunConfig& cfg) {
    CheckResult r;
    r.name = "projection-check";
    if (cfg.dimension() == 3) r.merge("grid", projection_order_check(cfg, true));
    r.merge("mesh_free", projection_order_check(cfg, false));
    return r;
}

// ---------------------------------------------------------------- energy

namespace {

PairConfig energy_pair(const RunConfig& cfg, int n, double lambda) {
    PairConfig p;
    p.first = params_at(n, lambda, cfg.point("energy.centers.0", n), plane_of(cfg, "energy.a.0"));
    p.second = params_at(n, lambda, cfg.point("energy.centers.1", n), plane_of(cfg, "energy.a.1"));
    return p;
}

json constants_json(const ConstantSet& c) {
    return {{"n", c.n},           {"b", c.b},         {"gradient", c.gradient}, {"potential", c.potential},
            {"log_moment", c.log_moment}, {"gamma", c.gamma}, {"alpha", c.alpha}, {"beta", c.beta},
            {"chi", c.chi},       {"eta", c.eta},     {"eta_bare", c.eta_bare}, {"w", c.w},
            {"s_estimate", c.s_estimate}, {"s_bubble", c.s_bubble}, {"bubbles", c.bubbles},
            {"log_flagged", c.log_flagged}};
}

}  // namespace

CheckResult pair_energy_check(const RunConfig& cfg, int n) {
    CheckResult r;
    r.name = "pair energy expansion n=" + std::to_string(n);
    DomainSpec dom = DomainSpec::annulus(n, cfg.get("energy.delta"));
    QuadratureOptions q = cfg.quadrature();
    BubbleSum base = single_bubble(n);
    ConstantSet c = constant_set(base, q);
    std::vector<double> lambdas;
    for (int i = 0; i <= static_cast<int>(cfg.get("energy.halvings")); ++i)
        lambdas.push_back(cfg.get("energy.lambda_start") * std::pow(0.5, i));
    PairConfig pair = energy_pair(cfg, n, lambdas.front());
    std::string bad = pair.violation(dom);
    if (!r.expect(bad.empty(), "pair violates constraints: " + bad)) return r;
    auto reps = expansion_check_j0(dom, base, c, pair, lambdas, q);
    Table t{"pair_energy_n" + std::to_string(n), {"lambda", "direct", "expansion", "residual", "scaled_residual",
                                          "interaction_direct", "interaction_expansion"}, {}};
    std::vector<double> scaled, ratios, a2err;
    for (const auto& e : reps) {
        scaled.push_back(std::abs(e.residual) / std::pow(e.lambda1, n - 2));
        a2err.push_back(std::abs(e.interaction.direct - e.interaction.expansion) / std::abs(e.interaction.expansion));
        t.rows.push_back({e.lambda1, e.direct, e.expansion, e.residual, scaled.back(), e.interaction.direct,
                          e.interaction.expansion});
    }
    for (std::size_t i = 1; i < scaled.size(); ++i) ratios.push_back(scaled[i - 1] / scaled[i]);
    auto swapped = expansion_check_j0(dom, base, c, pair.swapped(), {lambdas.front()}, q);
    const double swap_gap = std::abs(swapped.front().direct - reps.front().direct) / std::abs(reps.front().direct);
    r.tables.push_back(t);
    r.data = {{"n", n}, {"lambdas", lambdas}, {"scaled_residuals", scaled}, {"halving_ratios", ratios},
              {"interaction_errors", a2err}, {"swap_gap", swap_gap}, {"constants", constants_json(c)}};
    for (double x : ratios) r.expect(x >= 2.0, "residual/lambda^(n-2) drop per halving " + num(x, "%.3f"));
    const double a2 = *std::max_element(a2err.begin(), a2err.end());
    r.expect(a2 < 0.15, "interaction term error " + num(a2));
    r.expect(swap_gap < 1e-6, "swap asymmetry " + num(swap_gap));
    std::string s;
    for (double x : ratios) s += (s.empty() ? "" : ", ") + num(x, "%.2f");
    r.detail = "n=" + std::to_string(n) + " drops " + s + " a2 err " + num(a2, "%.3f");
    return r;
}

CheckResult coupled_energy_check(const RunConfig& cfg, int n) {
    CheckResult r;
    r.name = "epsilon energy expansion n=" + std::to_string(n);
    DomainSpec dom = DomainSpec::ball(n);
    QuadratureOptions q = cfg.quadrature();
    BubbleSum base = single_bubble(n);
    ConstantSet c = constant_set(base, q);
    PairConfig pair = energy_pair(cfg, n, cfg.get("energy.big_lambda"));
    JepsReport rep = expansion_check_jeps(dom, base, c, pair, cfg.epsilons(), q);
    Table t{"eps_energy_n" + std::to_string(n), {"epsilon", "lambda1", "lambda2", "direct", "expansion", "expansion_reduced",
                                            "residual", "scaled_residual"}, {}};
    json rows = json::array();
    for (const auto& e : rep.entries) {
        t.rows.push_back({e.epsilon, e.lambda1, e.lambda2, e.direct, e.expansion, e.expansion_reduced, e.residual,
                          e.scaled_residual});
        rows.push_back({{"epsilon", e.epsilon}, {"direct", e.direct}, {"expansion", e.expansion},
                        {"expansion_reduced", e.expansion_reduced}, {"scaled_residual", e.scaled_residual}});
    }
    r.tables.push_back(t);
    r.data = {{"n", n},
              {"entries", rows},
              {"monotone", rep.monotone},
              {"fitted_chi", rep.fitted_chi},
              {"fitted_eta", rep.fitted_eta},
              {"chi", c.chi},
              {"chi_error", rep.chi_error},
              {"shift",
               {{"factor", rep.shift_factor},
                {"epsilon", rep.shift_epsilon},
                {"direct", rep.shift_direct},
                {"predicted", rep.shift_predicted},
                {"bare", rep.shift_bare},
                {"error", rep.shift_error}}},
              {"constants", constants_json(c)}};
    r.expect(rep.monotone, "residual/eps not monotone");
    r.expect(rep.chi_error < 0.2, "eps log eps coefficient error " + num(rep.chi_error));
    r.expect(rep.shift_error < 0.2, "log-shift error " + num(rep.shift_error));
    r.detail = "n=" + std::to_string(n) + (rep.monotone ? " monotone" : " not monotone") + " chi err " +
               num(rep.chi_error, "%.3f") + " shift err " + num(rep.shift_error, "%.3f");
    return r;
}

CheckResult energy_check(const RunConfig& cfg) {
    CheckResult r;
    r.name = "energy-check";
    const int n = cfg.dimension();
    QuadratureOptions q = cfg.quadrature();
    r.merge("pohozaev", pohozaev_check(n, q));
    TowerProfile t = build_tower({n, cfg.k()});
    r.data["tower_constants"] = constants_json(constant_set(t.shape, q));
    Vec center(n);
    center[0] = 0.3;
    AlphaFit af = fit_alpha(n, {0.1, 0.05}, center, q);
    r.data["alpha_fit"] = {{"lambdas", af.lambdas}, {"values", af.values}, {"target", af.target},
                           {"max_error", af.max_error}};
    r.expect(af.max_error < 0.1, "alpha fit error " + num(af.max_error));
    r.merge("pair_energy", pair_energy_check(cfg, n));
    r.merge("eps_energy", coupled_energy_check(cfg, n));
    return r;
}

// ---------------------------------------------------------------- reduced

CheckResult hole_check(int n, double delta, double sigma, int samples, unsigned seed) {
    CheckResult r;
    r.name = "hole criterion";
    GreensProvider ann = search_provider(DomainSpec::annulus(n, delta));
    HoleReport h = check_hole_criterion(ann, sigma, samples, seed);
    GreensProvider ball(DomainSpec::ball(n), GreensBackend::ClosedForm);
    HoleReport hb = check_hole_criterion(ball, 0.5, samples, seed);
    Table t{"hole_phi", {"sample", "phi"}, {}};
    for (std::size_t i = 0; i < h.values.size(); ++i) t.rows.push_back({double(i), h.values[i]});
    r.tables.push_back(t);
    Table scan{"hole_delta_scan", {"delta", "antipodal_phi", "max_phi"}, {}};
    for (double d : {0.05, 0.04, 0.03, 0.02, 0.015, 0.01, 0.005}) {
        if (d >= sigma) continue;
        HoleReport s = check_hole_criterion(search_provider(DomainSpec::annulus(n, d)), sigma, 32, seed);
        scan.rows.push_back({d, s.antipodal_phi, s.max_phi});
    }
    r.tables.push_back(scan);
    r.data = {{"n", n},
              {"delta", delta},
              {"sigma", sigma},
              {"samples", samples},
              {"all_negative", h.all_negative},
              {"min_phi", h.min_phi},
              {"max_phi", h.max_phi},
              {"antipodal_phi", h.antipodal_phi},
              {"ball_control", {{"sigma", 0.5}, {"max_phi", hb.max_phi}, {"antipodal_phi", hb.antipodal_phi},
                                {"some_positive", hb.max_phi > 0.0}}}};
    r.expect(h.all_negative, "phi > 0 on S, max " + num(h.max_phi));
    r.expect(hb.max_phi > 0.0, "ball control has no positive phi");
    if (n == 3) r.expect(std::abs(hb.antipodal_phi - 0.090187) < 1e-5, "ball antipodal phi " + num(hb.antipodal_phi));
    r.detail = "annulus max phi " + num(h.max_phi) + ", ball antipodal " + num(hb.antipodal_phi, "%.6f");
    return r;
}

CheckResult hole_criterion_check(const RunConfig& cfg) {
    CheckResult r = hole_check(cfg.dimension(), cfg.delta(), cfg.sigma(), cfg.samples(), cfg.rng_seed());
    r.name = "hole-criterion";
    return r;
}

CheckResult landscape_check(const RunConfig& cfg) {
    CheckResult r;
    r.name = "landscape";
    const int n = cfg.dimension();
    GreensProvider g = search_provider(config_domain(cfg, n));
    TowerProfile t = build_tower({n, cfg.k()});
    auto rows = landscape(g, t.shape, static_cast<int>(cfg.get("landscape.radii")),
                          static_cast<int>(cfg.get("landscape.lambdas")), cfg.get("landscape.log_lambda_min"),
                          cfg.get("landscape.log_lambda_max"));
    Table tab{"landscape", {"radius", "Lambda", "psi", "phi"}, {}};
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& row : rows) {
        tab.rows.push_back({row.radius, row.big, row.psi, row.phi});
        lo = std::min(lo, row.psi);
        hi = std::max(hi, row.psi);
    }
    r.tables.push_back(tab);
    r.data = {{"n", n}, {"points", rows.size()}, {"psi_min", lo}, {"psi_max", hi}};
    r.expect(std::isfinite(lo) && std::isfinite(hi), "non-finite landscape values");
    r.detail = "psi in [" + num(lo) + ", " + num(hi) + "]";
    return r;
}

CheckResult minmax_check(int n, int k, double delta, double sigma, double R, int seeds, unsigned seed) {
    CheckResult r;
    r.name = "min-max delta=" + num(delta);
    GreensProvider g = search_provider(DomainSpec::annulus(n, delta));
    TowerProfile t = build_tower({n, k});
    BracketOptions bo;
    bo.seed = seed;
    LevelBracket b = level_bracket(g, t.shape, sigma, R, bo);
    r.data = {{"n", n}, {"k", k}, {"delta", delta}, {"bracket", bracket_json(b)}};
    if (b.hole_ok) {
        LevelBracket b2 = level_bracket(g, t.shape, sigma, R, bo.doubled());
        r.data["bracket_doubled"] = {{"A", b2.A}, {"B", b2.B}};
    }
    r.expect(b.valid, "bracket: " + b.failure);
    if (!b.hole_ok) {
        r.detail = "delta=" + num(delta) + ": " + b.failure;
        return r;
    }
    SaddleOptions so;
    so.seeds = seeds;
    so.seed = seed;
    SaddleResult s = saddle_search(g, t.shape, b, so);
    r.data["saddle"] = saddle_json(s);
    bool seeds_ok = s.seed_spread <= 1e-4 &&
                    std::all_of(s.seed_converged.begin(), s.seed_converged.end(), [](bool c) { return c; });
    r.expect(s.converged && s.grad_norm < 1e-6, "gradient norm " + num(s.grad_norm));
    r.expect(s.saddle, "saddle signature missing");
    r.expect(s.in_bracket, "critical value " + num(s.psi) + " outside [A, B]");
    r.expect(seeds_ok, "perturbed seeds spread " + num(s.seed_spread));
    Table tr{"saddle_trace_delta" + num(delta), {"iteration", "grad_norm"}, {}};
    for (std::size_t i = 0; i < s.trace.size(); ++i) tr.rows.push_back({double(i), s.trace[i]});
    r.tables.push_back(tr);
    r.detail = "delta=" + num(delta) + " k=" + std::to_string(k) + ": psi " + num(s.psi, "%.6f") + " grad " +
               num(s.grad_norm, "%.1e") + " spread " + num(s.seed_spread, "%.1e") +
               (b.valid ? "" : " bracket invalid");
    return r;
}

CheckResult find_critical_check(const RunConfig& cfg) {
    CheckResult r = minmax_check(cfg.dimension(), cfg.k(), cfg.delta(), cfg.sigma(), cfg.big_r(), cfg.seeds(),
                                 cfg.rng_seed());
    r.name = "find-critical";
    return r;
}

CheckResult end_to_end_check(const RunConfig& cfg, int k, double delta) {
    CheckResult r;
    r.name = "end-to-end";
    const int n = 3;
    const double eps = cfg.get("assemble.epsilon");
    DomainSpec dom = DomainSpec::annulus(n, delta);
    GreensProvider g = search_provider(dom);
    TowerProfile t = build_tower({n, k});
    QuadratureOptions q = cfg.quadrature();
    ConstantSet c = constant_set(t.shape, q);
    GridSpec spec{cfg.grid(), 1.0};
    r.data = {{"n", n}, {"k", k}, {"delta", delta}, {"epsilon", eps}, {"constants", constants_json(c)}};

    BracketOptions bo;
    bo.seed = cfg.rng_seed();
    LevelBracket b = level_bracket(g, t.shape, cfg.sigma(), cfg.big_r(), bo);
    if (!b.hole_ok) {
        r.expect(false, "no critical configuration: " + b.failure);
        r.detail = "delta=" + num(delta) + ": no critical configuration";
        return r;
    }
    SaddleOptions so;
    so.seeds = 0;
    SaddleResult s = saddle_search(g, t.shape, b, so);
    r.data["critical"] = saddle_json(s);
    if (!r.expect(s.converged, "saddle search did not converge")) return r;

    std::vector<double> residuals;
    for (double e : {eps, 0.5 * eps, 0.25 * eps}) {
        AssembleReport a = assemble_ansatz(dom, t.shape, c, s.critical, e, spec, q);
        r.data["assembled"].push_back(assemble_json(a));
        if (!a.failure.empty() && a.u.size() == 0) {
            r.expect(false, "eps=" + num(e) + ": " + a.failure);
            continue;
        }
        if (e == eps) {
            r.expect(a.sign_changing, "assembled u does not change sign");
            r.expect(a.energy_error < 0.25, "energy error " + num(a.energy_error));
            r.fields.push_back({"ansatz", a.u});
        }
        residuals.push_back(a.residual.l2);
    }
    for (std::size_t i = 1; i < residuals.size(); ++i)
        r.expect(residuals[i] < residuals[i - 1], "residual does not decrease as eps halves");
    r.detail = "delta=" + num(delta) + " k=" + std::to_string(k) + ": Lambda " + num(s.critical.first.lambda) +
               " -> lambda(eps) " + num(coupled_lambda(c, s.critical.first.lambda, eps));
    return r;
}

namespace {

// Assembly, residual trend and Newton at a fixed resolvable pair (not a critical point).
json assembly_diagnostic(const RunConfig& cfg, int k, std::vector<std::pair<std::string, GridField>>& fields) {
    const int n = 3;
    DomainSpec dom = DomainSpec::annulus(n, 0.1);
    TowerProfile t = build_tower({n, k});
    QuadratureOptions q = cfg.quadrature();
    ConstantSet c = constant_set(t.shape, q);
    const double eps = cfg.get("assemble.epsilon");
    const double big = std::sqrt(0.3 / (c.beta * eps));  // lambda = 0.3 at the base epsilon
    ConfigPair pair;
    pair.first = params_at(n, big, Vec(n, {0.5, 0.0, 0.0}), {0.0, 0.0});
    pair.second = params_at(n, big, Vec(n, {-0.5, 0.0, 0.0}), {0.0, 0.0});
    const double h = 2.0 / cfg.grid();
    json j = {{"domain_delta", 0.1}, {"xi", 0.5}, {"Lambda", big}, {"grid_spacing", h},
              {"finest_scale", t.mu * coupled_lambda(c, big, eps)}};
    j["spikes_resolved"] = j["finest_scale"].get<double>() >= h;
    std::vector<double> residuals;
    for (double e : {eps, 0.5 * eps, 0.25 * eps}) {
        AssembleReport a = assemble_ansatz(dom, t.shape, c, pair, e, GridSpec{cfg.grid(), 1.0}, q);
        j["assembled"].push_back(assemble_json(a));
        if (a.u.size() > 0) residuals.push_back(a.residual.l2);
        if (e == eps && a.u.size() > 0) fields.push_back({"ansatz_diagnostic", a.u});
    }
    bool trend = residuals.size() == 3 && residuals[1] < residuals[0] && residuals[2] < residuals[1];
    j["residual_trend"] = residuals;
    j["residual_decreasing"] = trend;

    const double ne = cfg.get("assemble.newton_epsilon");
    GridSpec ns{static_cast<int>(cfg.get("assemble.newton_grid")), 1.0};
    const double big_newton = std::sqrt(0.25 / (c.beta * ne));  // lambda = 0.25 at the Newton epsilon
    pair.first.lambda = pair.second.lambda = big_newton;
    AssembleReport a = assemble_ansatz(dom, t.shape, c, pair, ne, ns, q);
    j["newton_start"] = assemble_json(a);
    j["newton_Lambda"] = big_newton;
    j["newton_finest_scale"] = t.mu * 0.25;
    j["newton_grid_spacing"] = 2.0 / ns.resolution;
    if (a.u.size() > 0) {
        NewtonOptions no;
        no.max_iters = static_cast<int>(cfg.get("assemble.newton_iters"));
        NewtonResult nr = newton_refine(*shared_grid(dom, ns), a.u, ne, no);
        const double drop = nr.residuals.front() / nr.residuals.back();
        j["newton"] = {{"residuals", nr.residuals}, {"steps", nr.steps}, {"converged", nr.converged},
                       {"diverged", nr.diverged}, {"trivial", nr.trivial}, {"reduction", drop},
                       {"tenfold", drop >= 10.0 && !nr.trivial}};
    }
    return j;
}

}  // namespace

// ---------------------------------------------------------------- assemble

CheckResult assemble_check(const RunConfig& cfg) {
    CheckResult r = end_to_end_check(cfg, cfg.k(), cfg.delta());
    r.name = "assemble";
    json d = assembly_diagnostic(cfg, cfg.k(), r.fields);
    r.data["diagnostic"] = d;
    return r;
}

// ---------------------------------------------------------------- suite

std::vector<Criterion> acceptance_criteria() {
    std::vector<Criterion> c;
    c.push_back({1, "exact identities", [](const RunConfig& cfg) {
                     CheckResult r;
                     r.name = "exact identities";
                     for (int n : {3, 4, 5}) r.merge("n" + std::to_string(n), exact_identity_check(n, cfg.k(), 100, cfg.rng_seed()));
                     return r;
                 }});
    c.push_back({2, "kernel derivative identities", [](const RunConfig& cfg) {
                     CheckResult r;
                     r.name = "kernel identities";
                     for (int n : {3, 4})
                         r.merge("n" + std::to_string(n),
                                 kernel_identity_check(n, cfg.k(), static_cast<int>(cfg.get("kernel.points")),
                                                       cfg.get("kernel.step"), cfg.rng_seed()));
                     return r;
                 }});
    c.push_back({3, "quadrature calibration", [](const RunConfig& cfg) {
                     CheckResult r;
                     r.name = "quadrature calibration";
                     for (int n : {3, 4, 5}) r.merge("n" + std::to_string(n), pohozaev_check(n, cfg.quadrature()));
                     return r;
                 }});
    c.push_back({4, "energy per spike", [](const RunConfig& cfg) {
                     std::vector<double> ks = cfg.get_list("energy.spike_counts");
                     return spike_energy_check(4, std::vector<int>(ks.begin(), ks.end()), cfg.quadrature());
                 }});
    c.push_back({5, "error-norm scaling", [](const RunConfig& cfg) {
                     std::vector<double> ks = cfg.get_list("energy.spike_counts");
                     return error_norm_check(4, 3.0, std::vector<int>(ks.begin(), ks.end()), cfg.quadrature());
                 }});
    c.push_back({6, "Green's function oracles", [](const RunConfig& cfg) {
                     return greens_oracle_check(cfg.grid(), static_cast<int>(cfg.get("greens.points")),
                                                cfg.get("greens.cross_delta"), cfg.get_list("greens.deltas"),
                                                cfg.rng_seed());
                 }});
    c.push_back({7, "projection expansion order", [](const RunConfig& cfg) {
                     CheckResult g = projection_order_check(cfg, true);
                     CheckResult r;
                     r.name = "projection order";
                     const json& d = g.data;
                     r.data = d;
                     r.expect(d["tower"]["slope"].get<double>() >= 1.2,
                              "tower slope " + num(d["tower"]["slope"].get<double>()));
                     r.expect(d["single"]["coefficient_error"].get<double>() < 0.1,
                              "single-bubble coefficient error " + num(d["single"]["coefficient_error"].get<double>()));
                     r.tables = std::move(g.tables);
                     r.detail = g.detail;
                     return r;
                 }});
    c.push_back({8, "pair energy expansion order", [](const RunConfig& cfg) {
                     CheckResult r = pair_energy_check(cfg, 3);
                     CheckResult sup = pair_energy_check(cfg, 4);
                     r.data["supplementary_n4"] = sup.data;
                     r.detail += " (" + sup.detail + ")";
                     return r;
                 }});
    c.push_back({9, "epsilon energy expansion", [](const RunConfig& cfg) { return coupled_energy_check(cfg, 3); }});
    c.push_back({10, "hole criterion", [](const RunConfig& cfg) {
                     return hole_check(3, 0.05, 0.1, 200, cfg.rng_seed());
                 }});
    c.push_back({11, "min-max saddle", [](const RunConfig& cfg) {
                     CheckResult r = minmax_check(3, 8, 0.05, 0.1, cfg.big_r(), 10, cfg.rng_seed());
                     json sup = json::object();
                     std::string extra;
                     for (int k : {8, 16}) {
                         CheckResult s = minmax_check(3, k, 0.01, 0.1, cfg.big_r(), 10, cfg.rng_seed());
                         sup["k" + std::to_string(k)] = s.data;
                         sup["k" + std::to_string(k)]["pass"] = s.pass;
                         sup["k" + std::to_string(k)]["failures"] = s.failures;
                         extra += "; " + s.detail;
                         for (auto& t : s.tables) {
                             t.name += "_k" + std::to_string(k);
                             r.tables.push_back(std::move(t));
                         }
                     }
                     r.data["supplementary_delta_0.01"] = sup;
                     r.detail += extra;
                     return r;
                 }});
    c.push_back({12, "end-to-end ansatz", [](const RunConfig& cfg) {
                     CheckResult r = end_to_end_check(cfg, 8, 0.05);
                     CheckResult sup = end_to_end_check(cfg, 8, 0.01);
                     r.data["supplementary_delta_0.01"] = sup.data;
                     r.data["supplementary_delta_0.01"]["failures"] = sup.failures;
                     json d = assembly_diagnostic(cfg, 8, r.fields);
                     r.data["diagnostic"] = d;
                     bool newton_ok = d.contains("newton") && d["newton"]["tenfold"].get<bool>();
                     r.expect(newton_ok, "Newton refinement did not reduce the residual tenfold");
                     r.detail += "; " + sup.detail + "; diagnostic pair: residual " +
                                 (d["residual_decreasing"].get<bool>() ? "decreasing" : "not decreasing") +
                                 ", Newton drop " +
                                 (d.contains("newton") ? num(d["newton"]["reduction"].get<double>()) : "n/a");
                     return r;
                 }});
    return c;
}

RunConfig quick_config() {
    json q = {{"domain", {{"grid", 32}}},
              {"kernel", {{"points", 5}}},
              {"greens", {{"points", 3}}},
              {"lambda_sequence", {0.4, 0.3, 0.2, 0.15}},
              {"energy", {{"halvings", 2}, {"spike_counts", {8, 16}}}},
              {"assemble", {{"newton_grid", 24}, {"newton_iters", 2}}}};
    return RunConfig(q);
}

json run_command(const std::string& command, const RunConfig& cfg, std::vector<CheckResult>* results,
                 const std::function<void(int, const CheckResult&)>& progress) {
    std::vector<CheckResult> out;
    json summary = {{"command", command}};
    auto one = [&](CheckResult r, int id) {
        if (progress) progress(id, r);
        out.push_back(std::move(r));
    };
    if (command == "all") {
        json crit = json::array();
        for (const Criterion& c : acceptance_criteria()) {
            CheckResult r = c.run(cfg);
            crit.push_back({{"id", c.id}, {"title", c.title}, {"pass", r.pass}, {"detail", r.detail},
                            {"failures", r.failures}, {"data", r.data}});
            one(std::move(r), c.id);
        }
        summary["criteria"] = crit;
    } else {
        CheckResult r;
        if (command == "build-tower") r = build_tower_check(cfg);
        else if (command == "verify-kernel") r = verify_kernel_check(cfg);
        else if (command == "greens-check") r = greens_check(cfg);
        else if (command == "projection-check") r = projection_check(cfg);
        else if (command == "energy-check") r = energy_check(cfg);
        else if (command == "hole-criterion") r = hole_criterion_check(cfg);
        else if (command == "landscape") r = landscape_check(cfg);
        else if (command == "find-critical") r = find_critical_check(cfg);
        else if (command == "assemble") r = assemble_check(cfg);
        else throw std::invalid_argument("unknown command " + command);
        summary["result"] = r.data;
        summary["detail"] = r.detail;
        one(std::move(r), 0);
    }
    bool pass = true;
    json failures = json::array();
    for (const auto& r : out) {
        pass = pass && r.pass;
        for (const auto& f : r.failures) failures.push_back(f);
    }
    summary["pass"] = pass;
    summary["failures"] = failures;
    if (results) *results = std::move(out);
    return summary;
}

std::string dump_summary(const json& summary) { return summary.dump(2) + "\n"; }

void write_outputs(const std::string& dir, const RunConfig& cfg, const json& summary,
                   const std::vector<CheckResult>& results) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(dir) / "data");
    {
        std::ofstream f(fs::path(dir) / "summary.json");
        f << dump_summary(summary);
    }
    {
        std::ofstream f(fs::path(dir) / "effective-config.json");
        f << cfg.doc().dump(2) << "\n";
    }
    for (const auto& r : results) {
        for (const auto& t : r.tables) {
            std::ofstream f(fs::path(dir) / "data" / (t.name + ".csv"));
            for (std::size_t i = 0; i < t.header.size(); ++i) f << (i ? "," : "") << t.header[i];
            f << "\n";
            char buf[32];
            for (const auto& row : t.rows) {
                for (std::size_t i = 0; i < row.size(); ++i) {
                    std::snprintf(buf, sizeof buf, "%.17g", row[i]);
                    f << (i ? "," : "") << buf;
                }
                f << "\n";
            }
        }
        if (!r.fields.empty()) fs::create_directories(fs::path(dir) / "fields");
        for (const auto& [name, field] : r.fields)
            write_with_sidecar(field, (fs::path(dir) / "fields" / (name + ".bin")).string(),
                               json{{"name", name}}.dump());
    }
}

}  // namespace tl
