#pragma once

#include "fowlerkit/config.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace fowlerkit {

/// Phase-portrait panel of one side: regime, sign of K and, for K > 0, the
/// position of l against 2^*. E.g. "saddle, K>0 panel, l>2^*".
std::string portrait_panel(const Side& side);

nlohmann::json to_json(const ExponentSet& e);
/// Exponents of one side with K, panel and equilibria.
nlohmann::json side_json(const Side& side);
nlohmann::json to_json(const EndClass& c);
nlohmann::json to_json(const SolutionClass& c);
nlohmann::json to_json(const IntersectionPoint& p);
/// Summary without the polyline.
nlohmann::json to_json(const ManifoldBranch& b);
nlohmann::json to_json(const StructureReport& r);
nlohmann::json to_json(const ScalingCheck& s);

/// Report envelope: {"config": ..., "<key>": body}.
nlohmann::json with_config(const RunConfig& cfg, const std::string& key, nlohmann::json body);

/// Stable serialization: sorted keys, two-space indent, trailing newline.
void write_json(std::ostream& os, const nlohmann::json& j);

void write_structure_csv(std::ostream& points, std::ostream& intervals, std::ostream& intersections,
                         const StructureReport& r);

/// printf("%.17g").
std::string csv_real(double v);

}  // namespace fowlerkit
