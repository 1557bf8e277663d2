#pragma once

#include <filesystem>

#include <json.hpp>

#include "noisylab/trainers.hpp"

namespace noisylab {

/// RunReport <-> JSON (schema: config, epochs[], final{}).
nlohmann::json report_to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::json& j);

void write_report(const RunReport& report, const std::filesystem::path& path);
RunReport read_report(const std::filesystem::path& path);

}  // namespace noisylab
