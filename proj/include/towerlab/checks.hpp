#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "towerlab/config.hpp"
#include "towerlab/grid.hpp"

namespace tl {

struct Table {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

// Outcome of one verification group. `data` is deterministic (no timings).
struct CheckResult {
    std::string name;
    bool pass = true;
    std::string detail;                 // one line for the console
    nlohmann::json data = nlohmann::json::object();
    std::vector<std::string> failures;  // assertion messages
    std::vector<Table> tables;
    std::vector<std::pair<std::string, GridField>> fields;

    // Records an assertion; returns `ok`.
    bool expect(bool ok, const std::string& what);
    // Folds another result in under `key`.
    void merge(const std::string& key, CheckResult other);
};

// Subcommand groups, driven by the configuration.
CheckResult build_tower_check(const RunConfig& cfg);
CheckResult verify_kernel_check(const RunConfig& cfg);
CheckResult greens_check(const RunConfig& cfg);
CheckResult projection_check(const RunConfig& cfg);
CheckResult energy_check(const RunConfig& cfg);
CheckResult hole_criterion_check(const RunConfig& cfg);
CheckResult landscape_check(const RunConfig& cfg);
CheckResult find_critical_check(const RunConfig& cfg);
CheckResult assemble_check(const RunConfig& cfg);

// Building blocks with explicit parameters.
CheckResult exact_identity_check(int n, int k, int points, unsigned seed);
CheckResult kernel_identity_check(int n, int k, int points, double step, unsigned seed);
CheckResult pohozaev_check(int n, const QuadratureOptions& q);
CheckResult spike_energy_check(int n, const std::vector<int>& ks, const QuadratureOptions& q);
CheckResult error_norm_check(int n, double q_exp, const std::vector<int>& ks, const QuadratureOptions& q);
CheckResult greens_oracle_check(int resolution, int points, double cross_delta, const std::vector<double>& deltas,
                                unsigned seed);
CheckResult projection_order_check(const RunConfig& cfg, bool grid);
CheckResult pair_energy_check(const RunConfig& cfg, int n);
CheckResult coupled_energy_check(const RunConfig& cfg, int n);
CheckResult hole_check(int n, double delta, double sigma, int samples, unsigned seed);
CheckResult minmax_check(int n, int k, double delta, double sigma, double R, int seeds, unsigned seed);
CheckResult end_to_end_check(const RunConfig& cfg, int k, double delta);

// The acceptance suite: criteria 1-12 in order.
struct Criterion {
    int id = 0;
    std::string title;
    std::function<CheckResult(const RunConfig&)> run;
};
std::vector<Criterion> acceptance_criteria();

// Config used for the determinism criterion (reduced resolution).
RunConfig quick_config();

// Runs a subcommand ("all" runs the acceptance criteria) and returns the
// summary document; `results` receives the individual groups.
nlohmann::json run_command(const std::string& command, const RunConfig& cfg, std::vector<CheckResult>* results,
                           const std::function<void(int, const CheckResult&)>& progress = nullptr);

// Writes summary.json, effective-config.json, data/*.csv and fields/*.bin.
void write_outputs(const std::string& dir, const RunConfig& cfg, const nlohmann::json& summary,
                   const std::vector<CheckResult>& results);

std::string dump_summary(const nlohmann::json& summary);

}  // namespace tl
