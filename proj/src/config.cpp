#include "towerlab/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tl {

using nlohmann::json;

namespace {

json::json_pointer pointer_of(const std::string& dotted) {
    std::string p = "/";
    for (char c : dotted) p += c == '.' ? '/' : c;
    return json::json_pointer(p);
}

// User keys must exist in the defaults with a compatible type.
void check_shape(const json& user, const json& ref, const std::string& where) {
    if (ref.is_object()) {
        if (!user.is_object()) throw std::invalid_argument("config: " + where + " must be an object");
        for (auto it = user.begin(); it != user.end(); ++it) {
            std::string key = where.empty() ? it.key() : where + "." + it.key();
            if (!ref.contains(it.key())) throw std::invalid_argument("config: unknown field " + key);
            check_shape(it.value(), ref.at(it.key()), key);
        }
        return;
    }
    if (ref.is_array()) {
        if (!user.is_array()) throw std::invalid_argument("config: " + where + " must be an array");
        for (const auto& v : user)
            if (!v.is_number() && !v.is_array()) throw std::invalid_argument("config: " + where + " holds non-numbers");
        return;
    }
    if (ref.is_number() && !user.is_number()) throw std::invalid_argument("config: " + where + " must be a number");
    if (ref.is_number_integer() && user.is_number_float())
        throw std::invalid_argument("config: " + where + " must be an integer");
    if (ref.is_boolean() && !user.is_boolean()) throw std::invalid_argument("config: " + where + " must be a boolean");
    if (ref.is_string() && !user.is_string()) throw std::invalid_argument("config: " + where + " must be a string");
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument("config: " + msg);
}

}  // namespace

json RunConfig::defaults() {
    QuadratureOptions q;
    return json{
        {"dimension", 3},
        {"tower", {{"k", 8}}},
        {"domain", {{"kind", "annulus"}, {"delta", 0.05}, {"grid", 96}}},
        {"quadrature",
         {{"radial_order", q.radial_order},
          {"inner_radius", q.inner_radius},
          {"panel_ratio", q.panel_ratio},
          {"outer_radius", q.outer_radius},
          {"tail_order", q.tail_order},
          {"polar_order", q.polar_order},
          {"azimuth", q.azimuth},
          {"fiber", q.fiber},
          {"partition_exponent", q.partition_exponent}}},
        {"epsilon_sequence", {0.02, 0.01, 0.005}},
        {"lambda_sequence", {0.2, 0.1, 0.05, 0.025}},
        {"kernel", {{"points", 50}, {"step", 1e-4}}},
        {"greens", {{"points", 10}, {"deltas", {0.1, 0.05, 0.025}}, {"cross_delta", 0.2}}},
        {"projection", {{"delta", 0.1}, {"center", {0.4, 0.0, 0.0}}, {"a", {0.2, 0.0}}}},
        {"energy",
         {{"delta", 0.1},
          {"centers", {{0.45, 0.0, 0.0}, {-0.3, 0.25, 0.0}}},
          {"a", {{0.1, 0.0}, {0.0, 0.0}}},
          {"lambda_start", 0.1},
          {"halvings", 5},
          {"big_lambda", 1.0},
          {"spike_counts", {8, 16, 32}}}},
        {"search", {{"sigma", 0.1}, {"R", 10.0}, {"symmetry", true}, {"seeds", 10}, {"samples", 200}}},
        {"landscape", {{"radii", 24}, {"lambdas", 24}, {"log_lambda_min", -2.0}, {"log_lambda_max", 6.0}}},
        {"assemble", {{"epsilon", 0.02}, {"newton_grid", 64}, {"newton_epsilon", 0.05}, {"newton_iters", 10}}},
        {"output_dir", "towerlab-out"},
        {"rng_seed", 1},
        {"workers", 0},
    };
}

RunConfig::RunConfig() : doc_(defaults()) {}

RunConfig::RunConfig(const json& user) : doc_(defaults()) {
    check_shape(user, doc_, "");
    doc_.merge_patch(user);
    validate();
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    json user;
    try {
        in >> user;
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("config: " + path + ": " + e.what());
    }
    return RunConfig(user);
}

std::string RunConfig::expand_alias(const std::string& name) {
    if (name == "n") return "dimension";
    if (name == "k") return "tower.k";
    if (name == "delta") return "domain.delta";
    if (name == "sigma") return "search.sigma";
    if (name == "output-dir") return "output_dir";
    return name;
}

void RunConfig::set(const std::string& path, const std::string& raw) {
    auto ptr = pointer_of(expand_alias(path));
    json ref = defaults();
    if (!ref.contains(ptr)) throw std::invalid_argument("config: unknown field " + path);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error&) {
        value = raw;
    }
    check_shape(value, ref.at(ptr), expand_alias(path));
    json saved = doc_;
    doc_[ptr] = value;
    try {
        validate();
    } catch (...) {
        doc_ = saved;
        throw;
    }
}

void RunConfig::validate() const {
    int n = dimension();
    require(n >= 3 && n <= 5, "dimension must be 3, 4 or 5");
    require(k() >= 8, "tower.k must be >= 8");
    std::string kind = domain_kind();
    require(kind == "ball" || kind == "annulus", "domain.kind must be ball or annulus");
    require(delta() > 0.0 && delta() < 1.0, "domain.delta must lie in (0, 1)");
    require(grid() >= 16 && grid() <= 256, "domain.grid must lie in [16, 256]");
    for (double e : epsilons()) require(e > 0.0 && e < 1.0, "epsilon_sequence entries must lie in (0, 1)");
    for (double l : lambdas()) require(l > 0.0 && l < 1.0, "lambda_sequence entries must lie in (0, 1)");
    require(sigma() > 0.0 && sigma() < 1.0, "search.sigma must lie in (0, 1)");
    require(kind == "ball" || sigma() > delta(), "search.sigma must exceed domain.delta");
    require(big_r() > 1.0, "search.R must exceed 1");
    require(seeds() >= 0, "search.seeds must be >= 0");
    require(samples() >= 1, "search.samples must be >= 1");
    require(get("kernel.points") >= 1 && get("kernel.step") > 0.0, "kernel settings out of range");
    require(get("greens.points") >= 2, "greens.points must be >= 2");
    require(get("energy.halvings") >= 2, "energy.halvings must be >= 2");
    require(get("energy.lambda_start") > 0.0 && get("energy.lambda_start") < 1.0, "energy.lambda_start out of range");
    require(get("assemble.epsilon") > 0.0 && get("assemble.newton_epsilon") > 0.0, "assemble epsilons must be positive");
    require(get("assemble.newton_grid") >= 16 && get("assemble.newton_iters") >= 1, "assemble newton settings out of range");
    require(get("workers") >= 0, "workers must be >= 0");
    require(doc_.at("energy").at("centers").size() == 2 && doc_.at("energy").at("a").size() == 2,
            "energy.centers and energy.a need two entries");
}

int RunConfig::dimension() const { return doc_.at("dimension").get<int>(); }
int RunConfig::k() const { return doc_.at("tower").at("k").get<int>(); }
std::string RunConfig::domain_kind() const { return doc_.at("domain").at("kind").get<std::string>(); }
double RunConfig::delta() const { return doc_.at("domain").at("delta").get<double>(); }
int RunConfig::grid() const { return doc_.at("domain").at("grid").get<int>(); }

QuadratureOptions RunConfig::quadrature() const {
    const json& q = doc_.at("quadrature");
    QuadratureOptions o;
    o.radial_order = q.at("radial_order").get<int>();
    o.inner_radius = q.at("inner_radius").get<double>();
    o.panel_ratio = q.at("panel_ratio").get<double>();
    o.outer_radius = q.at("outer_radius").get<double>();
    o.tail_order = q.at("tail_order").get<int>();
    o.polar_order = q.at("polar_order").get<int>();
    o.azimuth = q.at("azimuth").get<int>();
    o.fiber = q.at("fiber").get<int>();
    o.partition_exponent = q.at("partition_exponent").get<double>();
    return o;
}

std::vector<double> RunConfig::epsilons() const { return get_list("epsilon_sequence"); }
std::vector<double> RunConfig::lambdas() const { return get_list("lambda_sequence"); }
double RunConfig::sigma() const { return get("search.sigma"); }
double RunConfig::big_r() const { return get("search.R"); }
bool RunConfig::symmetric() const { return doc_.at("search").at("symmetry").get<bool>(); }
int RunConfig::seeds() const { return static_cast<int>(get("search.seeds")); }
int RunConfig::samples() const { return static_cast<int>(get("search.samples")); }
unsigned RunConfig::rng_seed() const { return static_cast<unsigned>(get("rng_seed")); }
std::string RunConfig::output_dir() const { return doc_.at("output_dir").get<std::string>(); }

double RunConfig::get(const std::string& path) const { return doc_.at(pointer_of(path)).get<double>(); }

std::vector<double> RunConfig::get_list(const std::string& path) const {
    return doc_.at(pointer_of(path)).get<std::vector<double>>();
}

Vec RunConfig::point(const std::string& path, int n) const {
    std::vector<double> v = get_list(path);
    Vec x(n);
    for (int i = 0; i < n && i < static_cast<int>(v.size()); ++i) x[i] = v[i];
    return x;
}

}  // namespace tl
