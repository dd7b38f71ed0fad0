#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "towerlab/quadrature.hpp"
#include "towerlab/vec.hpp"

namespace tl {

// JSON run configuration. Every field has a default; user documents are
// merged over the defaults and validated, and the merged document is what
// gets written as the effective configuration.
class RunConfig {
public:
    RunConfig();  // defaults only
    explicit RunConfig(const nlohmann::json& user);

    static nlohmann::json defaults();
    static RunConfig from_file(const std::string& path);

    // `path` is dotted (e.g. "domain.delta"); `raw` is parsed as JSON when
    // possible, else taken as a string. Revalidates.
    void set(const std::string& path, const std::string& raw);
    // Flag aliases: n, k, delta, sigma, output-dir.
    static std::string expand_alias(const std::string& name);

    const nlohmann::json& doc() const { return doc_; }

    int dimension() const;
    int k() const;
    std::string domain_kind() const;
    double delta() const;
    int grid() const;
    QuadratureOptions quadrature() const;
    std::vector<double> epsilons() const;
    std::vector<double> lambdas() const;
    double sigma() const;
    double big_r() const;
    bool symmetric() const;
    int seeds() const;
    int samples() const;
    unsigned rng_seed() const;
    std::string output_dir() const;

    double get(const std::string& path) const;
    std::vector<double> get_list(const std::string& path) const;
    // Point of the configured dimension from a list (missing entries are zero).
    Vec point(const std::string& path, int n) const;

private:
    void validate() const;
    nlohmann::json doc_;
};

}  // namespace tl
