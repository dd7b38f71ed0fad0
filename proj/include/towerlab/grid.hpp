#pragma once

#include <Eigen/Sparse>

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "towerlab/vec.hpp"

namespace tl {

// Node values on a uniform Cartesian grid in R^3.
struct GridField {
    std::array<int64_t, 3> dims{0, 0, 0};
    double spacing = 0.0;
    std::array<double, 3> origin{0.0, 0.0, 0.0};
    std::vector<double> values;
    std::vector<uint8_t> mask;  // 1 at interior nodes; empty after read()

    std::size_t size() const { return values.size(); }
    std::size_t index(int64_t i, int64_t j, int64_t k) const {
        return static_cast<std::size_t>((i * dims[1] + j) * dims[2] + k);
    }
    Vec position(int64_t i, int64_t j, int64_t k) const;
    Vec position(std::size_t idx) const;
    bool inside_box(const Vec& x) const;
    // Trilinear interpolation; throws outside the box.
    double interpolate(const Vec& x) const;

    double max_abs_interior() const;

    // Binary layout: int64 n, int64 dims[3], double spacing, double origin[3]
    // (little-endian), then the values in row-major order (last index fastest).
    void write(const std::string& path) const;
    static GridField read(const std::string& path);
};

// Writes `<path>` and `<path>.json` (shape, spacing, origin, `extra`).
void write_with_sidecar(const GridField& f, const std::string& path, const std::string& extra_json = "{}");

struct GridSpec {
    int resolution = 96;      // cells per axis
    double half_width = 1.0;  // box [-L, L]^3
};

using LevelFunction = std::function<double(const Vec&)>;  // negative inside the domain

struct SolveReport {
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;             // final relative residual
    std::vector<double> history;       // relative residual per iteration
};

// Masked 7-point Laplacian with Dirichlet data imposed at the exact edge
// crossings of the boundary (symmetric ghost-fluid treatment: a cut link of
// length theta*h adds 1/(theta h^2) to the diagonal and g/(theta h^2) to the
// right-hand side). The operator is -Δ_h, symmetric positive definite.
class GridDomain {
public:
    GridDomain(LevelFunction level, GridSpec spec);

    int nodes_per_axis() const { return np_; }
    double spacing() const { return h_; }
    const GridSpec& spec() const { return spec_; }
    int unknowns() const { return static_cast<int>(nodes_.size()); }
    std::size_t node_count() const { return static_cast<std::size_t>(np_) * np_ * np_; }
    Vec node(std::size_t idx) const;
    const std::vector<std::size_t>& interior_nodes() const { return nodes_; }
    int unknown_of(std::size_t idx) const { return unknown_[idx]; }
    double level(const Vec& x) const { return level_(x); }

    const Eigen::SparseMatrix<double>& matrix() const { return a_; }

    // Zero field with the interior mask set.
    GridField blank() const;

    // Right-hand side contribution of Dirichlet data g.
    Eigen::VectorXd boundary_rhs(const std::function<double(const Vec&)>& g) const;

    // Solves -Δu = f in the domain, u = g on the boundary. Exterior nodes take
    // exterior(x) when given, else g(x).
    GridField solve(const std::function<double(const Vec&)>& g, const std::function<double(const Vec&)>& f,
                    SolveReport* report = nullptr, double tol = 1e-8, int max_iter = 5000,
                    const std::function<double(const Vec&)>& exterior = nullptr) const;

    // Preconditioned CG on the interior system.
    Eigen::VectorXd cg(const Eigen::VectorXd& b, SolveReport* report, double tol, int max_iter) const;

    // Interior vector <-> grid field.
    Eigen::VectorXd gather(const GridField& f) const;
    void scatter(const Eigen::VectorXd& v, GridField& f) const;

private:
    struct Link {
        int unknown;
        double theta;
        Vec point;
    };

    LevelFunction level_;
    GridSpec spec_;
    int np_;
    double h_;
    std::vector<std::size_t> nodes_;
    std::vector<int> unknown_;
    std::vector<Link> links_;
    Eigen::SparseMatrix<double> a_;
    mutable std::mutex pre_mtx_;
    mutable std::shared_ptr<void> pre_;
};

}  // namespace tl
