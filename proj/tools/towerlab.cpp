// Batch driver: one subcommand per verification group, plus `all`.
#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "towerlab/checks.hpp"

namespace {

// `--a.b value` and `--a.b=value` pairs left over by the parser.
void apply_overrides(tl::RunConfig& cfg, const std::vector<std::string>& rest) {
    for (std::size_t i = 0; i < rest.size(); ++i) {
        const std::string& arg = rest[i];
        if (arg.rfind("--", 0) != 0) throw std::invalid_argument("unexpected argument " + arg);
        std::string key = arg.substr(2), value;
        auto eq = key.find('=');
        if (eq != std::string::npos) {
            value = key.substr(eq + 1);
            key = key.substr(0, eq);
        } else {
            if (i + 1 >= rest.size()) throw std::invalid_argument("missing value for --" + key);
            value = rest[++i];
        }
        cfg.set(key, value);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"towerlab: numerical verification of a two-tower sign-changing construction"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"build-tower", "solve for the ring scale and check the tower profile"},
        {"verify-kernel", "kernel derivative identities and Gram matrix"},
        {"greens-check", "Green's function backends against each other"},
        {"projection-check", "expansion order of the projection correction"},
        {"energy-check", "energy constants and two-bubble expansions"},
        {"hole-criterion", "sign of the pair interaction on the small sphere"},
        {"landscape", "reduced energy over radius and scale"},
        {"find-critical", "level bracket and saddle search"},
        {"assemble", "assemble the ansatz at the critical configuration"},
        {"all", "run the acceptance suite"}};
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->allow_extras();
        sub->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    }
    CLI11_PARSE(app, argc, argv);

    CLI::App* sub = app.get_subcommands().front();
    const std::string command = sub->get_name();
    tl::RunConfig cfg;
    try {
        if (!config_path.empty()) cfg = tl::RunConfig::from_file(config_path);
        apply_overrides(cfg, sub->remaining());
        if (const char* env = std::getenv("TOWERLAB_OUTPUT_DIR")) cfg.set("output_dir", nlohmann::json(env).dump());
    } catch (const std::exception& e) {
        nlohmann::json err = {{"command", command}, {"pass", false}, {"failures", {e.what()}}};
        std::cerr << err.dump(2) << "\n";
        return 2;
    }

    std::vector<tl::CheckResult> results;
    nlohmann::json summary;
    try {
        summary = tl::run_command(command, cfg, &results, [](int id, const tl::CheckResult& r) {
            if (id > 0) std::fprintf(stderr, "[%2d] %s  %s: %s\n", id, r.pass ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
        });
    } catch (const std::exception& e) {
        summary = {{"command", command}, {"pass", false}, {"failures", {std::string("error: ") + e.what()}}};
    }
    tl::write_outputs(cfg.output_dir(), cfg, summary, results);
    std::cout << tl::dump_summary(summary);
    return summary["pass"].get<bool>() ? 0 : 1;
}
