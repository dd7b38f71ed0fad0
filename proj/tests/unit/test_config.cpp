#include <doctest.h>

#include "towerlab/checks.hpp"

using namespace tl;

TEST_CASE("defaults are valid and complete") {
    RunConfig c;
    CHECK(c.dimension() == 3);
    CHECK(c.k() == 8);
    CHECK(c.delta() == doctest::Approx(0.05));
    CHECK(c.epsilons().size() == 3);
}

TEST_CASE("unknown fields and bad types are rejected") {
    CHECK_THROWS(RunConfig(nlohmann::json{{"dimensions", 3}}));
    CHECK_THROWS(RunConfig(nlohmann::json{{"tower", {{"k", "eight"}}}}));
    CHECK_THROWS(RunConfig(nlohmann::json{{"dimension", 7}}));
    CHECK_THROWS(RunConfig(nlohmann::json{{"domain", {{"delta", 0.3}}}}));
}

TEST_CASE("dotted overrides and aliases") {
    RunConfig c;
    c.set("k", "16");
    c.set("domain.grid", "64");
    c.set("n", "4");
    c.set("output-dir", "out");
    CHECK(c.k() == 16);
    CHECK(c.grid() == 64);
    CHECK(c.dimension() == 4);
    CHECK(c.output_dir() == "out");
    CHECK_THROWS(c.set("k", "4"));
    CHECK(c.k() == 16);
    CHECK_THROWS(c.set("no.such.field", "1"));
}

TEST_CASE("build-tower summary is deterministic") {
    RunConfig c;
    c.set("n", "4");
    nlohmann::json a = run_command("build-tower", c, nullptr);
    nlohmann::json b = run_command("build-tower", c, nullptr);
    CHECK(dump_summary(a) == dump_summary(b));
    CHECK(a["result"]["mu"].get<double>() == doctest::Approx(0.095238).epsilon(1e-6));
    CHECK(a["pass"].get<bool>());
}
