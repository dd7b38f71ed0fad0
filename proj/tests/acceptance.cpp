// Acceptance suite: one PASS/FAIL line per criterion. Optional arguments pick
// criteria by number. The exit code is 0 when the suite ran to completion;
// individual failures are reported, not turned into a crash.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "towerlab/checks.hpp"

int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
    auto wanted = [&](int id) { return only.empty() || only.count(id); };

    const char* env = std::getenv("TOWERLAB_OUTPUT_DIR");
    const std::string out = env ? env : "acceptance-out";
    tl::RunConfig cfg;
    cfg.set("output_dir", nlohmann::json(out).dump());

    nlohmann::json crit = nlohmann::json::array();
    std::vector<tl::CheckResult> results;
    int passed = 0, run = 0;
    for (const tl::Criterion& c : tl::acceptance_criteria()) {
        if (!wanted(c.id)) continue;
        auto t0 = std::chrono::steady_clock::now();
        tl::CheckResult r;
        try {
            r = c.run(cfg);
        } catch (const std::exception& e) {
            r.name = c.title;
            r.expect(false, std::string("error: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%2d] %s  %-30s %7.1fs  %s\n", c.id, r.pass ? "PASS" : "FAIL", c.title.c_str(), secs,
                    r.detail.c_str());
        for (const auto& f : r.failures) std::printf("       - %s\n", f.c_str());
        std::fflush(stdout);
        crit.push_back({{"id", c.id}, {"title", c.title}, {"pass", r.pass}, {"detail", r.detail},
                        {"failures", r.failures}, {"seconds", secs}, {"data", r.data}});
        passed += r.pass;
        ++run;
        results.push_back(std::move(r));
    }

    if (wanted(13)) {
        auto t0 = std::chrono::steady_clock::now();
        tl::RunConfig quick = tl::quick_config();
        const std::string a = tl::dump_summary(tl::run_command("all", quick, nullptr));
        const std::string b = tl::dump_summary(tl::run_command("all", quick, nullptr));
        const bool same = a == b;
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[13] %s  %-30s %7.1fs  %zu-byte summaries %s\n", same ? "PASS" : "FAIL", "determinism", secs,
                    a.size(), same ? "identical" : "differ");
        crit.push_back({{"id", 13}, {"title", "determinism"}, {"pass", same}, {"bytes", a.size()}, {"seconds", secs}});
        passed += same;
        ++run;
    }

    nlohmann::json summary = {{"command", "acceptance"}, {"criteria", crit}, {"passed", passed}, {"run", run}};
    summary["pass"] = passed == run;
    tl::write_outputs(out, cfg, summary, results);
    std::printf("%d/%d criteria passed\n", passed, run);
    return 0;
}
