#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "towerlab/checks.hpp"
#include "towerlab/greens.hpp"
#include "towerlab/reduced.hpp"

namespace py = pybind11;

namespace {

tl::Vec to_vec(const std::vector<double>& v) {
    tl::Vec x(static_cast<int>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) x[static_cast<int>(i)] = v[i];
    return x;
}

std::vector<double> from_vec(const tl::Vec& x) { return std::vector<double>(x.c.begin(), x.c.begin() + x.n); }

tl::DomainSpec domain_of(const std::string& kind, int n, double delta) {
    if (kind == "ball") return tl::DomainSpec::ball(n);
    if (kind == "annulus") return tl::DomainSpec::annulus(n, delta);
    throw std::invalid_argument("domain kind must be ball or annulus");
}

}  // namespace

PYBIND11_MODULE(_towerlab, m) {
    m.doc() = "Bubble towers, Green's functions and the reduced energy";

    m.def("solve_mu", [](int n, int k) { return tl::solve_mu({n, k}); }, py::arg("n"), py::arg("k"));

    py::class_<tl::TowerProfile>(m, "Tower")
        .def_property_readonly("n", [](const tl::TowerProfile& t) { return t.config.n; })
        .def_property_readonly("k", [](const tl::TowerProfile& t) { return t.config.k; })
        .def_readonly("mu", &tl::TowerProfile::mu)
        .def_property_readonly("spikes",
                               [](const tl::TowerProfile& t) {
                                   std::vector<std::vector<double>> out;
                                   for (const auto& s : t.spikes) out.push_back(from_vec(s));
                                   return out;
                               })
        .def("__call__", [](const tl::TowerProfile& t, const std::vector<double>& x) { return t.field(to_vec(x)); });
    m.def("build_tower", [](int n, int k) { return tl::build_tower({n, k}); }, py::arg("n"), py::arg("k"));

    m.def(
        "green",
        [](const std::vector<double>& x, const std::vector<double>& y, const std::string& kind, double delta) {
            const int n = static_cast<int>(x.size());
            tl::GreensOptions opt;
            opt.series_tol = 1e-15;
            opt.series_cap = 200;
            tl::GreensProvider g(domain_of(kind, n, delta),
                                 kind == "ball" ? tl::GreensBackend::ClosedForm : tl::GreensBackend::Series, opt);
            return g.green(to_vec(x), to_vec(y));
        },
        py::arg("x"), py::arg("y"), py::arg("kind") = "ball", py::arg("delta") = 0.0);

    m.def(
        "hole_criterion",
        [](int n, const std::string& kind, double delta, double sigma, int samples, unsigned seed) {
            tl::GreensProvider g(domain_of(kind, n, delta),
                                 kind == "ball" ? tl::GreensBackend::ClosedForm : tl::GreensBackend::Series);
            tl::HoleReport r = tl::check_hole_criterion(g, sigma, samples, seed);
            py::dict d;
            d["all_negative"] = r.all_negative;
            d["min_phi"] = r.min_phi;
            d["max_phi"] = r.max_phi;
            d["antipodal_phi"] = r.antipodal_phi;
            d["values"] = r.values;
            return d;
        },
        py::arg("n") = 3, py::arg("kind") = "annulus", py::arg("delta") = 0.05, py::arg("sigma") = 0.1,
        py::arg("samples") = 200, py::arg("seed") = 1);

    m.def(
        "psi_value",
        [](double h1, double h2, double g12, double q1, double q2, double big1, double big2) {
            return tl::psi_value(tl::PsiTerms{h1, h2, g12, q1, q2}, big1, big2);
        },
        py::arg("h1"), py::arg("h2"), py::arg("g12"), py::arg("q1"), py::arg("q2"), py::arg("big1"), py::arg("big2"));

    m.def(
        "run",
        [](const std::string& command, const std::string& config_json) {
            tl::RunConfig cfg(nlohmann::json::parse(config_json.empty() ? "{}" : config_json));
            py::gil_scoped_release release;
            return tl::dump_summary(tl::run_command(command, cfg, nullptr));
        },
        py::arg("command"), py::arg("config_json") = "",
        "Runs a subcommand and returns the JSON summary as a string.");
}
