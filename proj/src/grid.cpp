#include "towerlab/grid.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <boost/math/tools/roots.hpp>

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <queue>
#include <stdexcept>

#include "json.hpp"

namespace tl {

static_assert(std::endian::native == std::endian::little, "binary grid layout assumes little-endian");

Vec GridField::position(int64_t i, int64_t j, int64_t k) const {
    return Vec(3, {origin[0] + spacing * i, origin[1] + spacing * j, origin[2] + spacing * k});
}

Vec GridField::position(std::size_t idx) const {
    int64_t k = idx % dims[2];
    int64_t j = (idx / dims[2]) % dims[1];
    int64_t i = idx / (dims[1] * dims[2]);
    return position(i, j, k);
}

bool GridField::inside_box(const Vec& x) const {
    for (int d = 0; d < 3; ++d) {
        double t = (x[d] - origin[d]) / spacing;
        if (t < 0.0 || t > dims[d] - 1) return false;
    }
    return true;
}

double GridField::interpolate(const Vec& x) const {
    if (!inside_box(x)) throw std::out_of_range("GridField::interpolate: point outside the grid box");
    int64_t i0[3];
    double f[3];
    for (int d = 0; d < 3; ++d) {
        double t = (x[d] - origin[d]) / spacing;
        i0[d] = std::min<int64_t>(static_cast<int64_t>(std::floor(t)), dims[d] - 2);
        f[d] = t - i0[d];
    }
    double s = 0.0;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c) {
                double w = (a ? f[0] : 1.0 - f[0]) * (b ? f[1] : 1.0 - f[1]) * (c ? f[2] : 1.0 - f[2]);
                s += w * values[index(i0[0] + a, i0[1] + b, i0[2] + c)];
            }
    return s;
}

double GridField::max_abs_interior() const {
    double m = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i)
        if (mask.empty() || mask[i]) m = std::max(m, std::abs(values[i]));
    return m;
}

void GridField::write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("GridField::write: cannot open " + path);
    const int64_t n = 3;
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    out.write(reinterpret_cast<const char*>(dims.data()), sizeof(int64_t) * 3);
    out.write(reinterpret_cast<const char*>(&spacing), sizeof spacing);
    out.write(reinterpret_cast<const char*>(origin.data()), sizeof(double) * 3);
    out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(sizeof(double) * values.size()));
}

GridField GridField::read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("GridField::read: cannot open " + path);
    GridField f;
    int64_t n = 0;
    in.read(reinterpret_cast<char*>(&n), sizeof n);
    if (n != 3) throw std::runtime_error("GridField::read: unsupported dimension");
    in.read(reinterpret_cast<char*>(f.dims.data()), sizeof(int64_t) * 3);
    in.read(reinterpret_cast<char*>(&f.spacing), sizeof f.spacing);
    in.read(reinterpret_cast<char*>(f.origin.data()), sizeof(double) * 3);
    f.values.resize(static_cast<std::size_t>(f.dims[0] * f.dims[1] * f.dims[2]));
    in.read(reinterpret_cast<char*>(f.values.data()), static_cast<std::streamsize>(sizeof(double) * f.values.size()));
    if (!in) throw std::runtime_error("GridField::read: truncated file " + path);
    return f;
}

void write_with_sidecar(const GridField& f, const std::string& path, const std::string& extra_json) {
    f.write(path);
    nlohmann::ordered_json j;
    j["n"] = 3;
    j["dims"] = f.dims;
    j["spacing"] = f.spacing;
    j["origin"] = f.origin;
    j["layout"] = "int64 n, int64 dims[3], float64 spacing, float64 origin[3], float64 values (row-major)";
    j["extra"] = nlohmann::ordered_json::parse(extra_json);
    std::ofstream(path + ".json") << j.dump(2) << "\n";
}

GridDomain::GridDomain(LevelFunction level, GridSpec spec) : level_(std::move(level)), spec_(spec) {
    if (spec_.resolution < 4) throw std::invalid_argument("GridDomain: resolution too small");
    np_ = spec_.resolution + 1;
    h_ = 2.0 * spec_.half_width / spec_.resolution;
    const std::size_t total = node_count();
    unknown_.assign(total, -1);
    for (std::size_t idx = 0; idx < total; ++idx) {
        if (level_(node(idx)) < 0.0) {
            unknown_[idx] = static_cast<int>(nodes_.size());
            nodes_.push_back(idx);
        }
    }
    if (nodes_.empty()) throw std::invalid_argument("GridDomain: no interior nodes");

    // connectivity of the interior mask
    {
        std::vector<bool> seen(nodes_.size(), false);
        std::queue<std::size_t> q;
        q.push(nodes_[0]);
        seen[0] = true;
        std::size_t count = 1;
        const long s[3] = {static_cast<long>(np_) * np_, np_, 1};
        while (!q.empty()) {
            std::size_t idx = q.front();
            q.pop();
            long c[3] = {static_cast<long>(idx / s[0]), static_cast<long>((idx / s[1]) % np_), static_cast<long>(idx % np_)};
            for (int d = 0; d < 3; ++d)
                for (int sg : {-1, 1}) {
                    long nc = c[d] + sg;
                    if (nc < 0 || nc >= np_) continue;
                    std::size_t nb = idx + sg * s[d];
                    int u = unknown_[nb];
                    if (u >= 0 && !seen[u]) {
                        seen[u] = true;
                        ++count;
                        q.push(nb);
                    }
                }
        }
        if (count != nodes_.size()) throw std::invalid_argument("GridDomain: interior mask is not connected");
    }

    std::vector<Eigen::Triplet<double>> trip;
    const double ih2 = 1.0 / (h_ * h_);
    const long s[3] = {static_cast<long>(np_) * np_, np_, 1};
    for (std::size_t u = 0; u < nodes_.size(); ++u) {
        std::size_t idx = nodes_[u];
        Vec x = node(idx);
        long c[3] = {static_cast<long>(idx / s[0]), static_cast<long>((idx / s[1]) % np_), static_cast<long>(idx % np_)};
        double diag = 0.0;
        for (int d = 0; d < 3; ++d)
            for (int sg : {-1, 1}) {
                long nc = c[d] + sg;
                int v = (nc >= 0 && nc < np_) ? unknown_[idx + sg * s[d]] : -1;
                if (v >= 0) {
                    diag += ih2;
                    trip.emplace_back(static_cast<int>(u), v, -ih2);
                    continue;
                }
                // boundary crossing on the link
                Vec e = unit(3, d);
                auto along = [&](double t) { return level_(x + (sg * t * h_) * e); };
                double theta = 1.0;
                if (along(1.0) >= 0.0) {
                    boost::uintmax_t it = 100;
                    auto tol = [](double a, double b) { return std::abs(b - a) < 1e-13; };
                    auto r = boost::math::tools::toms748_solve(along, 0.0, 1.0, tol, it);
                    theta = 0.5 * (r.first + r.second);
                }
                theta = std::max(theta, 1e-3);
                diag += ih2 / theta;
                links_.push_back({static_cast<int>(u), theta, x + (sg * theta * h_) * e});
            }
        trip.emplace_back(static_cast<int>(u), static_cast<int>(u), diag);
    }
    a_.resize(unknowns(), unknowns());
    a_.setFromTriplets(trip.begin(), trip.end());
}

Vec GridDomain::node(std::size_t idx) const {
    long k = idx % np_;
    long j = (idx / np_) % np_;
    long i = idx / (static_cast<long>(np_) * np_);
    const double L = spec_.half_width;
    return Vec(3, {-L + h_ * i, -L + h_ * j, -L + h_ * k});
}

GridField GridDomain::blank() const {
    GridField f;
    f.dims = {np_, np_, np_};
    f.spacing = h_;
    f.origin = {-spec_.half_width, -spec_.half_width, -spec_.half_width};
    f.values.assign(node_count(), 0.0);
    f.mask.assign(node_count(), 0);
    for (std::size_t idx : nodes_) f.mask[idx] = 1;
    return f;
}

Eigen::VectorXd GridDomain::boundary_rhs(const std::function<double(const Vec&)>& g) const {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(unknowns());
    const double ih2 = 1.0 / (h_ * h_);
    for (const Link& l : links_) b(l.unknown) += g(l.point) * ih2 / l.theta;
    return b;
}

Eigen::VectorXd GridDomain::gather(const GridField& f) const {
    Eigen::VectorXd v(unknowns());
    for (std::size_t u = 0; u < nodes_.size(); ++u) v(static_cast<long>(u)) = f.values[nodes_[u]];
    return v;
}

void GridDomain::scatter(const Eigen::VectorXd& v, GridField& f) const {
    for (std::size_t u = 0; u < nodes_.size(); ++u) f.values[nodes_[u]] = v(static_cast<long>(u));
}

Eigen::VectorXd GridDomain::cg(const Eigen::VectorXd& b, SolveReport* report, double tol, int max_iter) const {
    using Precond = Eigen::IncompleteCholesky<double, Eigen::Lower, Eigen::AMDOrdering<int>>;
    std::shared_ptr<Precond> pc;
    {
        std::lock_guard<std::mutex> lock(pre_mtx_);
        if (!pre_) {
            auto p = std::make_shared<Precond>();
            p->compute(a_);
            if (p->info() != Eigen::Success) throw std::runtime_error("GridDomain: incomplete Cholesky failed");
            pre_ = p;
        }
        pc = std::static_pointer_cast<Precond>(pre_);
    }
    SolveReport rep;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
    const double bn = b.norm();
    if (bn == 0.0) {
        rep.converged = true;
        if (report) *report = rep;
        return x;
    }
    Eigen::VectorXd r = b;
    Eigen::VectorXd z = pc->solve(r);
    Eigen::VectorXd p = z;
    double rz = r.dot(z);
    for (int it = 0; it < max_iter; ++it) {
        Eigen::VectorXd ap = a_ * p;
        double alpha = rz / p.dot(ap);
        x += alpha * p;
        r -= alpha * ap;
        double rel = r.norm() / bn;
        rep.history.push_back(rel);
        rep.iterations = it + 1;
        rep.residual = rel;
        if (rel < tol) {
            rep.converged = true;
            break;
        }
        z = pc->solve(r);
        double rz_new = r.dot(z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
    }
    if (report) *report = rep;
    return x;
}

GridField GridDomain::solve(const std::function<double(const Vec&)>& g, const std::function<double(const Vec&)>& f,
                            SolveReport* report, double tol, int max_iter,
                            const std::function<double(const Vec&)>& exterior) const {
    Eigen::VectorXd b = boundary_rhs(g);
    if (f)
        for (std::size_t u = 0; u < nodes_.size(); ++u) b(static_cast<long>(u)) += f(node(nodes_[u]));
    SolveReport rep;
    Eigen::VectorXd x = cg(b, &rep, tol, max_iter);
    if (report) *report = rep;
    GridField out = blank();
    const auto& ext = exterior ? exterior : g;
    for (std::size_t idx = 0; idx < node_count(); ++idx)
        if (unknown_[idx] < 0) out.values[idx] = ext(node(idx));
    scatter(x, out);
    return out;
}

}  // namespace tl
