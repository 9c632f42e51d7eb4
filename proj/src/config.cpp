#include "fowlerkit/config.hpp"

#include "fowlerkit/errors.hpp"

#include <fstream>
#include <functional>
#include <map>

namespace fowlerkit {

namespace {

using json = nlohmann::json;

double as_double(const json& v, const std::string& key) {
    if (!v.is_number()) throw DomainError("config key '" + key + "' must be a number");
    return v.get<double>();
}

std::int64_t as_int(const json& v, const std::string& key) {
    if (!v.is_number_integer()) throw DomainError("config key '" + key + "' must be an integer");
    return v.get<std::int64_t>();
}

}  // namespace

RunConfig parse_config(const json& j) {
    if (!j.is_object()) throw DomainError("config must be a flat JSON object");
    RunConfig c;
    using Setter = std::function<void(const json&, const std::string&)>;
    auto real = [](double& dst) -> Setter { return [&dst](const json& v, const std::string& k) { dst = as_double(v, k); }; };
    auto integer = [](auto& dst) -> Setter {
        return [&dst](const json& v, const std::string& k) {
            dst = static_cast<std::remove_reference_t<decltype(dst)>>(as_int(v, k));
        };
    };
    const std::map<std::string, Setter> keys = {
        {"n", integer(c.problem.n)},
        {"eta", real(c.problem.eta)},
        {"K1", real(c.problem.K1)},
        {"K2", real(c.problem.K2)},
        {"q1", real(c.problem.q1)},
        {"q2", real(c.problem.q2)},
        {"delta1", real(c.problem.delta1)},
        {"delta2", real(c.problem.delta2)},
        {"rho", real(c.problem.rho)},
        {"family",
         [&c](const json& v, const std::string& k) {
             if (!v.is_string()) throw DomainError("config key '" + k + "' must be \"D\" or \"L\"");
             const std::string s = v.get<std::string>();
             if (s == "D")
                 c.family = Family::D;
             else if (s == "L")
                 c.family = Family::L;
             else
                 throw DomainError("config key 'family' must be \"D\" or \"L\", got \"" + s + "\"");
         }},
        {"k_max", integer(c.k_max)},
        {"horizon", real(c.horizon)},
        {"budget", real(c.budget)},
        {"rtol", real(c.rtol)},
        {"atol", real(c.atol)},
        {"blowup_threshold", real(c.blowup_threshold)},
        {"converge_radius", real(c.converge_radius)},
        {"converge_dwell", real(c.converge_dwell)},
        {"capture_radius", real(c.capture_radius)},
        {"zero_floor", real(c.zero_floor)},
        {"event_tol", real(c.event_tol)},
        {"scan_points", integer(c.scan_points)},
        {"bisect_rtol", real(c.bisect_rtol)},
        {"seed_epsilon",
         [&c](const json& v, const std::string& k) {
             if (v.is_null())
                 c.seed_epsilon.reset();
             else
                 c.seed_epsilon = as_double(v, k);
         }},
        {"max_polyline_points", integer(c.max_polyline_points)},
        {"threads", integer(c.threads)},
        {"kbar", real(c.kbar)},
        {"rhobar", real(c.rhobar)},
        {"seed",
         [&c](const json& v, const std::string& k) {
             if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
                 throw DomainError("config key '" + k + "' must be a non-negative integer");
             c.seed = v.get<std::uint64_t>();
         }},
    };
    for (const auto& [k, v] : j.items()) {
        auto it = keys.find(k);
        if (it == keys.end()) throw DomainError("unknown config key '" + k + "'");
        it->second(v, k);
    }

    validate(c.problem);
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0)) throw DomainError(std::string("config key '") + name + "' must be positive");
    };
    positive(c.horizon, "horizon");
    positive(c.budget, "budget");
    positive(c.rtol, "rtol");
    positive(c.atol, "atol");
    positive(c.blowup_threshold, "blowup_threshold");
    positive(c.converge_radius, "converge_radius");
    positive(c.converge_dwell, "converge_dwell");
    positive(c.capture_radius, "capture_radius");
    positive(c.zero_floor, "zero_floor");
    positive(c.event_tol, "event_tol");
    positive(c.bisect_rtol, "bisect_rtol");
    positive(c.kbar, "kbar");
    positive(c.rhobar, "rhobar");
    if (c.seed_epsilon) positive(*c.seed_epsilon, "seed_epsilon");
    if (c.k_max < 0) throw DomainError("config key 'k_max' must be >= 0");
    if (c.scan_points < 2) throw DomainError("config key 'scan_points' must be >= 2");
    if (c.max_polyline_points < 2) throw DomainError("config key 'max_polyline_points' must be >= 2");
    if (c.threads < 0) throw DomainError("config key 'threads' must be >= 0");
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open config file " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw DomainError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

json to_json(const RunConfig& c) {
    json j;
    j["n"] = c.problem.n;
    j["eta"] = c.problem.eta;
    j["K1"] = c.problem.K1;
    j["K2"] = c.problem.K2;
    j["q1"] = c.problem.q1;
    j["q2"] = c.problem.q2;
    j["delta1"] = c.problem.delta1;
    j["delta2"] = c.problem.delta2;
    j["rho"] = c.problem.rho;
    j["family"] = std::string(to_string(c.family));
    j["k_max"] = c.k_max;
    j["horizon"] = c.horizon;
    j["budget"] = c.budget;
    j["rtol"] = c.rtol;
    j["atol"] = c.atol;
    j["blowup_threshold"] = c.blowup_threshold;
    j["converge_radius"] = c.converge_radius;
    j["converge_dwell"] = c.converge_dwell;
    j["capture_radius"] = c.capture_radius;
    j["zero_floor"] = c.zero_floor;
    j["event_tol"] = c.event_tol;
    j["scan_points"] = c.scan_points;
    j["bisect_rtol"] = c.bisect_rtol;
    j["seed_epsilon"] = c.seed_epsilon ? json(*c.seed_epsilon) : json(nullptr);
    j["max_polyline_points"] = c.max_polyline_points;
    j["threads"] = c.threads;
    j["kbar"] = c.kbar;
    j["rhobar"] = c.rhobar;
    j["seed"] = c.seed;
    return j;
}

SolveOptions solve_options(const RunConfig& c) {
    SolveOptions o;
    o.horizon = c.horizon;
    o.rtol = c.rtol;
    o.atol = c.atol;
    o.blowup_threshold = c.blowup_threshold;
    o.converge_radius = c.converge_radius;
    o.converge_dwell = c.converge_dwell;
    o.zero_floor = c.zero_floor;
    o.event_tol = c.event_tol;
    o.seed_epsilon = c.seed_epsilon;
    return o;
}

TraceOptions trace_options(const RunConfig& c) {
    TraceOptions o;
    o.arclength_budget = c.budget;
    o.horizon = c.horizon;
    o.epsilon = c.seed_epsilon;
    o.max_polyline_points = static_cast<std::size_t>(c.max_polyline_points);
    o.blowup_threshold = c.blowup_threshold;
    o.converge_radius = c.converge_radius;
    o.converge_dwell = c.converge_dwell;
    o.zero_floor = c.zero_floor;
    o.event_tol = c.event_tol;
    o.rtol = c.rtol;
    o.atol = c.atol;
    return o;
}

StructureOptions structure_options(const RunConfig& c) {
    StructureOptions o;
    o.solve = solve_options(c);
    o.trace = trace_options(c);
    o.k_max = c.k_max;
    o.scan_points = c.scan_points;
    o.bisect_rtol = c.bisect_rtol;
    o.capture_radius = c.capture_radius;
    o.threads = c.threads;
    return o;
}

}  // namespace fowlerkit
