#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "macroplace/design.hpp"
#include "macroplace/proxy.hpp"

namespace macroplace {

// placement.json: grid description, per macro anchor cell, orientation and
// micron origin, per cluster center.
nlohmann::ordered_json placement_to_json(const Design& design, const Placement& placement);
// Throws InconsistentPlacement when names or counts disagree with the design.
Placement placement_from_json(const Design& design, const nlohmann::json& doc);

nlohmann::ordered_json costs_to_json(const ProxyCosts& costs, const RewardWeights& weights);

// Canvas outline, one rect per decomposed macro rectangle colored by group,
// pin ticks on their sides, and cluster dots. Throws InconsistentPlacement.
std::string render_svg(const Design& design, const Placement& placement);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& doc);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace macroplace
