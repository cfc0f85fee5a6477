#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "fdi/grid/network.hpp"

namespace fdi::dataset {

struct DemandPoint {
  std::int64_t time = 0;  // seconds since the Unix epoch, UTC
  double demand_mw = 0.0;
};

struct DemandProfile {
  std::vector<DemandPoint> points;
  std::string source;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
};

/// Reads `timestamp,demand_mw` rows. Timestamps are `YYYY-MM-DD HH:MM[:SS]`
/// (a `T` separator is also accepted) and must strictly increase; demand
/// must be positive. Violations raise IngestionError naming the data row
/// (1-based, header excluded).
DemandProfile ingest_demand_csv(const std::filesystem::path& path);
DemandProfile ingest_demand_csv(std::istream& in, const std::string& source = "demand");

void write_demand_csv(const DemandProfile& profile, std::ostream& out);

/// ISO-8601 form, `2018-01-01T00:30:00`.
std::string format_timestamp(std::int64_t time);
std::int64_t parse_timestamp(const std::string& text);

/// Deterministic synthetic profile with a daily double peak, used for desk
/// runs and the long-run mode. Values span roughly [low_mw, high_mw].
DemandProfile synthetic_profile(std::size_t points, int cadence_minutes, std::int64_t start, double low_mw,
                                double high_mw, std::uint64_t seed);

double total_load_mw(const grid::NetworkModel& network);

/// Scales every load so the total active load equals `demand_mw`, keeping
/// the base-case proportions between buses and each load's power factor.
/// Throws InvalidArgument for non-positive demand or a network without load.
grid::NetworkModel scale_loads(const grid::NetworkModel& network, double demand_mw);

}  // namespace fdi::dataset
