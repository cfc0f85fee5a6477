#pragma once

#include <filesystem>
#include <string>

#include "fdi/grid/network.hpp"

namespace fdi::grid {

enum class CaseFormat { Json, Csv };

// JSON: a single file {"name", "base_mva", "buses": [...], "branches": [...]}.
// CSV: a directory holding buses.csv and branches.csv (fixed column order,
// see README); base MVA is 100.
NetworkModel load_network(const std::filesystem::path& path, CaseFormat format);
void save_network(const NetworkModel& network, const std::filesystem::path& path, CaseFormat format);

/// Resolves a CLI case argument: "wscc9" selects the bundled case, a
/// directory is read as CSV, anything else as JSON.
NetworkModel load_case(const std::string& spec);

}  // namespace fdi::grid
