#pragma once

#include "fowlerkit/shooting.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace fowlerkit {

/// Flat run configuration: the problem parameters plus every numerical knob.
/// Omitted keys take the defaults below; unknown keys are rejected.
struct RunConfig {
    ProblemConfig problem;
    Family family = Family::D;
    int k_max = 2;
    double horizon = 400.0;
    double budget = 1000.0;  // arclength budget of traced branches
    double rtol = 1e-12;
    double atol = 1e-12;
    double blowup_threshold = 1e8;
    double converge_radius = 1e-9;
    double converge_dwell = 1.0;
    double capture_radius = 1e-5;
    double zero_floor = 1e-8;
    double event_tol = 1e-10;
    int scan_points = 256;
    double bisect_rtol = 1e-10;
    std::optional<double> seed_epsilon;
    std::int64_t max_polyline_points = 100000;
    int threads = 0;
    double kbar = 1.0;
    double rhobar = 1.0;
    /// Jitter seed for the portrait's generic starting points; 0 keeps the grid exact.
    std::uint64_t seed = 0;
};

/// Throws DomainError on unknown keys, wrong types or invalid values.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);
/// Every key, including defaulted ones, in a fixed order.
nlohmann::json to_json(const RunConfig& c);

SolveOptions solve_options(const RunConfig& c);
TraceOptions trace_options(const RunConfig& c);
StructureOptions structure_options(const RunConfig& c);

}  // namespace fowlerkit
