#include "fdi/dataset/demand.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "fdi/csv.hpp"
#include "fdi/error.hpp"

namespace fdi::dataset {

std::int64_t parse_timestamp(const std::string& text) {
  std::string normalized = text;
  if (normalized.size() > 10 && normalized[10] == 'T') normalized[10] = ' ';
  for (const char* format : {"%Y-%m-%d %H:%M:%S", "%Y-%m-%d %H:%M"}) {
    std::tm tm{};
    std::istringstream in(normalized);
    in >> std::get_time(&tm, format);
    if (!in.fail() && (in >> std::ws).eof()) return static_cast<std::int64_t>(timegm(&tm));
  }
  throw InvalidArgument(fmt::format("'{}' is not a timestamp", text));
}

std::string format_timestamp(std::int64_t time) {
  const auto t = static_cast<std::time_t>(time);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%S", &tm);
  return buffer;
}

DemandProfile ingest_demand_csv(std::istream& in, const std::string& source) {
  csv::Reader reader(in, source);
  reader.expect_header({"timestamp", "demand_mw"});
  DemandProfile profile;
  profile.source = source;
  std::vector<std::string> fields;
  int row = 0;
  while (reader.next(fields)) {
    ++row;
    if (fields.size() != 2) throw IngestionError(fmt::format("expected 2 fields, got {}", fields.size()), row);
    DemandPoint point;
    try {
      point.time = parse_timestamp(fields[0]);
      point.demand_mw = reader.to_double(fields[1], "demand_mw");
    } catch (const Error& e) {
      throw IngestionError(e.what(), row);
    }
    if (!(point.demand_mw > 0.0)) throw IngestionError(fmt::format("demand {} MW is not positive", fields[1]), row);
    if (!profile.points.empty() && point.time <= profile.points.back().time) {
      throw IngestionError(fmt::format("timestamp {} does not follow {}", fields[0],
                                       format_timestamp(profile.points.back().time)),
                           row);
    }
    profile.points.push_back(point);
  }
  return profile;
}

DemandProfile ingest_demand_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open demand file", path.string(), 0);
  return ingest_demand_csv(in, path.string());
}

void write_demand_csv(const DemandProfile& profile, std::ostream& out) {
  out << "timestamp,demand_mw\n";
  for (const auto& p : profile.points) out << fmt::format("{},{:.3f}\n", format_timestamp(p.time), p.demand_mw);
}

DemandProfile synthetic_profile(std::size_t points, int cadence_minutes, std::int64_t start, double low_mw,
                                double high_mw, std::uint64_t seed) {
  if (cadence_minutes <= 0) throw InvalidArgument("cadence must be positive");
  if (!(low_mw > 0.0) || !(high_mw > low_mw)) throw InvalidArgument("need 0 < low_mw < high_mw");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> jitter(0.0, 0.01);
  DemandProfile profile;
  profile.source = fmt::format("synthetic:{}x{}min", points, cadence_minutes);
  profile.points.reserve(points);
  const double mid = 0.5 * (low_mw + high_mw);
  const double half = 0.5 * (high_mw - low_mw);
  for (std::size_t k = 0; k < points; ++k) {
    const std::int64_t t = start + static_cast<std::int64_t>(k) * cadence_minutes * 60;
    const double hour = static_cast<double>(t % 86400) / 3600.0;
    // Morning and evening peaks over a night trough.
    const double shape = 0.55 * std::sin(2 * std::numbers::pi * (hour - 9.0) / 24.0) +
                         0.45 * std::sin(4 * std::numbers::pi * (hour - 4.5) / 24.0);
    double value = mid + half * (shape + jitter(rng));
    value = std::clamp(value, low_mw, high_mw);
    profile.points.push_back({t, value});
  }
  return profile;
}

double total_load_mw(const grid::NetworkModel& network) {
  double total = 0.0;
  for (const auto& b : network.buses()) total += b.load_p;
  return total;
}

grid::NetworkModel scale_loads(const grid::NetworkModel& network, double demand_mw) {
  if (!(demand_mw > 0.0)) throw InvalidArgument(fmt::format("demand {} MW is not positive", demand_mw));
  const double base = total_load_mw(network);
  if (!(base > 0.0)) throw InvalidArgument("network has no active load to scale");
  const double factor = demand_mw / base;
  std::vector<double> p;
  std::vector<double> q;
  for (const auto& b : network.buses()) {
    p.push_back(b.load_p * factor);
    q.push_back(b.load_q * factor);
  }
  return network.with_loads(p, q).with_dispatch_scaled(factor);
}

}  // namespace fdi::dataset
