#include "fdi/grid/case_io.hpp"

#include <fstream>

#include <fmt/format.h>
#include <fmt/os.h>
#include <json.hpp>

#include "fdi/csv.hpp"
#include "fdi/error.hpp"

namespace fdi::grid {
namespace {

using nlohmann::json;

const std::vector<std::string> kBusColumns = {"id",        "kind",       "v_setpoint", "load_p_mw",
                                              "load_q_mvar", "gen_p_mw", "gen_q_mvar"};
const std::vector<std::string> kBranchColumns = {"from", "to", "r", "x", "b", "tap", "kind"};

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file", path.string(), 0);
  return in;
}

template <typename T>
T field(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ParseError(fmt::format("{}: missing field '{}'", where, key), "case", 0);
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("{}: field '{}': {}", where, key, e.what()), "case", 0);
  }
}

template <typename T>
T field_or(const json& obj, const char* key, T fallback, const std::string& where) {
  return obj.contains(key) ? field<T>(obj, key, where) : fallback;
}

NetworkModel load_json(const std::filesystem::path& path) {
  auto in = open(path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), path.string(), 0);
  }
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  try {
    for (std::size_t i = 0; i < doc.at("buses").size(); ++i) {
      const auto& b = doc["buses"][i];
      const auto where = fmt::format("buses[{}]", i);
      Bus bus;
      bus.id = field<int>(b, "id", where);
      bus.kind = parse_bus_kind(field<std::string>(b, "kind", where));
      bus.voltage_setpoint = field_or<double>(b, "v_setpoint", 1.0, where);
      bus.load_p = field_or<double>(b, "load_p_mw", 0.0, where);
      bus.load_q = field_or<double>(b, "load_q_mvar", 0.0, where);
      bus.gen_p = field_or<double>(b, "gen_p_mw", 0.0, where);
      bus.gen_q = field_or<double>(b, "gen_q_mvar", 0.0, where);
      buses.push_back(bus);
    }
    for (std::size_t i = 0; i < doc.at("branches").size(); ++i) {
      const auto& b = doc["branches"][i];
      const auto where = fmt::format("branches[{}]", i);
      Branch br;
      br.from_bus = field<int>(b, "from", where);
      br.to_bus = field<int>(b, "to", where);
      br.r = field_or<double>(b, "r", 0.0, where);
      br.x = field<double>(b, "x", where);
      br.b_shunt = field_or<double>(b, "b", 0.0, where);
      br.tap = field_or<double>(b, "tap", 1.0, where);
      br.kind = parse_branch_kind(field_or<std::string>(b, "kind", "line", where));
      branches.push_back(br);
    }
  } catch (const json::exception& e) {
    throw ParseError(e.what(), path.string(), 0);
  }
  return NetworkModel::create(std::move(buses), std::move(branches), doc.value("base_mva", 100.0),
                              doc.value("name", std::string{}));
}

NetworkModel load_csv(const std::filesystem::path& dir) {
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<std::string> f;
  {
    auto in = open(dir / "buses.csv");
    csv::Reader reader(in, (dir / "buses.csv").string());
    reader.expect_header(kBusColumns);
    while (reader.next(f)) {
      if (f.size() != kBusColumns.size()) {
        throw ParseError(fmt::format("expected {} fields, got {}", kBusColumns.size(), f.size()),
                         reader.source(), reader.line());
      }
      Bus bus;
      bus.id = reader.to_int(f[0], "id");
      try {
        bus.kind = parse_bus_kind(f[1]);
      } catch (const InvariantError& e) {
        throw ParseError(e.what(), reader.source(), reader.line());
      }
      bus.voltage_setpoint = reader.to_double(f[2], "v_setpoint");
      bus.load_p = reader.to_double(f[3], "load_p_mw");
      bus.load_q = reader.to_double(f[4], "load_q_mvar");
      bus.gen_p = reader.to_double(f[5], "gen_p_mw");
      bus.gen_q = reader.to_double(f[6], "gen_q_mvar");
      buses.push_back(bus);
    }
  }
  {
    auto in = open(dir / "branches.csv");
    csv::Reader reader(in, (dir / "branches.csv").string());
    reader.expect_header(kBranchColumns);
    while (reader.next(f)) {
      if (f.size() != kBranchColumns.size()) {
        throw ParseError(fmt::format("expected {} fields, got {}", kBranchColumns.size(), f.size()),
                         reader.source(), reader.line());
      }
      Branch br;
      br.from_bus = reader.to_int(f[0], "from");
      br.to_bus = reader.to_int(f[1], "to");
      br.r = reader.to_double(f[2], "r");
      br.x = reader.to_double(f[3], "x");
      br.b_shunt = reader.to_double(f[4], "b");
      br.tap = reader.to_double(f[5], "tap");
      try {
        br.kind = parse_branch_kind(f[6]);
      } catch (const InvariantError& e) {
        throw ParseError(e.what(), reader.source(), reader.line());
      }
      branches.push_back(br);
    }
  }
  return NetworkModel::create(std::move(buses), std::move(branches), 100.0, dir.filename().string());
}

}  // namespace

NetworkModel load_network(const std::filesystem::path& path, CaseFormat format) {
  return format == CaseFormat::Json ? load_json(path) : load_csv(path);
}

void save_network(const NetworkModel& network, const std::filesystem::path& path, CaseFormat format) {
  if (format == CaseFormat::Json) {
    json doc;
    doc["name"] = network.name();
    doc["base_mva"] = network.base_mva();
    doc["buses"] = json::array();
    for (const auto& b : network.buses()) {
      doc["buses"].push_back({{"id", b.id},
                              {"kind", to_string(b.kind)},
                              {"v_setpoint", b.voltage_setpoint},
                              {"load_p_mw", b.load_p},
                              {"load_q_mvar", b.load_q},
                              {"gen_p_mw", b.gen_p},
                              {"gen_q_mvar", b.gen_q}});
    }
    doc["branches"] = json::array();
    for (const auto& br : network.branches()) {
      doc["branches"].push_back({{"from", br.from_bus},
                                 {"to", br.to_bus},
                                 {"r", br.r},
                                 {"x", br.x},
                                 {"b", br.b_shunt},
                                 {"tap", br.tap},
                                 {"kind", to_string(br.kind)}});
    }
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << doc.dump(2) << '\n';
    return;
  }

  std::filesystem::create_directories(path);
  auto buses = fmt::output_file((path / "buses.csv").string());
  buses.print("{}\n", fmt::join(kBusColumns, ","));
  for (const auto& b : network.buses()) {
    buses.print("{},{},{},{},{},{},{}\n", b.id, to_string(b.kind), b.voltage_setpoint, b.load_p, b.load_q,
                b.gen_p, b.gen_q);
  }
  auto branches = fmt::output_file((path / "branches.csv").string());
  branches.print("{}\n", fmt::join(kBranchColumns, ","));
  for (const auto& br : network.branches()) {
    branches.print("{},{},{},{},{},{},{}\n", br.from_bus, br.to_bus, br.r, br.x, br.b_shunt, br.tap,
                   to_string(br.kind));
  }
}

NetworkModel load_case(const std::string& spec) {
  if (spec == "wscc9") return wscc9();
  const std::filesystem::path path(spec);
  if (std::filesystem::is_directory(path)) return load_network(path, CaseFormat::Csv);
  return load_network(path, CaseFormat::Json);
}

}  // namespace fdi::grid
