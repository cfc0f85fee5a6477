#include "fdi/grid/network.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "fdi/error.hpp"

namespace fdi::grid {

InjectionClass Bus::injection_class() const {
  const double net_p = load_p - gen_p;
  const double net_q = load_q - gen_q;
  if (kind == BusKind::Slack) return InjectionClass::Generation;
  if (kind == BusKind::PV) return net_p > 0.0 ? InjectionClass::Load : InjectionClass::Generation;
  if (net_p > 0.0) return InjectionClass::Load;
  if (net_p < 0.0) return InjectionClass::Generation;
  if (load_p != 0.0 || load_q != 0.0 || gen_p != 0.0 || gen_q != 0.0) {
    return net_q >= 0.0 ? InjectionClass::Load : InjectionClass::Generation;
  }
  return InjectionClass::None;
}

NetworkModel NetworkModel::create(std::vector<Bus> buses, std::vector<Branch> branches,
                                  double base_mva, std::string name) {
  if (!(base_mva > 0.0)) throw InvariantError("base_mva must be positive");
  if (buses.empty()) throw InvariantError("network has no buses");

  std::sort(buses.begin(), buses.end(), [](const Bus& a, const Bus& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < buses.size(); ++i) {
    if (buses[i].id == buses[i - 1].id) {
      throw InvariantError(fmt::format("duplicate bus id {}", buses[i].id));
    }
  }
  const auto slack_count = std::count_if(buses.begin(), buses.end(),
                                         [](const Bus& b) { return b.kind == BusKind::Slack; });
  if (slack_count != 1) {
    throw InvariantError(fmt::format("expected exactly one slack bus, found {}", slack_count));
  }
  for (const auto& b : buses) {
    if (b.kind != BusKind::PQ && !(b.voltage_setpoint > 0.0)) {
      throw InvariantError(fmt::format("bus {}: voltage setpoint must be positive", b.id));
    }
  }

  NetworkModel net;
  net.buses_ = std::move(buses);
  net.base_mva_ = base_mva;
  net.name_ = std::move(name);

  std::set<std::pair<int, int>> seen;
  for (const auto& br : branches) {
    if (br.from_bus == br.to_bus) {
      throw InvariantError(fmt::format("branch {}-{} is a self loop", br.from_bus, br.to_bus));
    }
    if (br.x == 0.0) {
      throw InvariantError(fmt::format("branch {}-{} has zero reactance", br.from_bus, br.to_bus));
    }
    if (!(br.tap > 0.0)) {
      throw InvariantError(fmt::format("branch {}-{} has non-positive tap", br.from_bus, br.to_bus));
    }
    if (!net.find_index(br.from_bus) || !net.find_index(br.to_bus)) {
      throw InvariantError(
          fmt::format("branch {}-{} references a missing bus", br.from_bus, br.to_bus));
    }
    auto key = std::minmax(br.from_bus, br.to_bus);
    if (!seen.insert({key.first, key.second}).second) {
      throw InvariantError(
          fmt::format("parallel branches between {} and {} are not supported", key.first, key.second));
    }
  }
  net.branches_ = std::move(branches);
  net.index();

  // Connectivity from the slack bus.
  std::vector<bool> reached(net.bus_count(), false);
  std::vector<std::size_t> stack{net.slack_index_};
  reached[net.slack_index_] = true;
  while (!stack.empty()) {
    const auto i = stack.back();
    stack.pop_back();
    for (auto k : net.incident_[i]) {
      const auto& br = net.branches_[k];
      const auto j = net.index_of(br.from_bus) == i ? net.index_of(br.to_bus) : net.index_of(br.from_bus);
      if (!reached[j]) {
        reached[j] = true;
        stack.push_back(j);
      }
    }
  }
  for (std::size_t i = 0; i < reached.size(); ++i) {
    if (!reached[i]) {
      throw TopologyError(fmt::format("bus {} is not connected to the slack bus", net.buses_[i].id));
    }
  }
  return net;
}

void NetworkModel::index() {
  incident_.assign(buses_.size(), {});
  for (std::size_t k = 0; k < branches_.size(); ++k) {
    incident_[index_of(branches_[k].from_bus)].push_back(k);
    incident_[index_of(branches_[k].to_bus)].push_back(k);
  }
  for (std::size_t i = 0; i < buses_.size(); ++i) {
    if (buses_[i].kind == BusKind::Slack) slack_index_ = i;
  }
}

std::optional<std::size_t> NetworkModel::find_index(int bus_id) const {
  auto it = std::lower_bound(buses_.begin(), buses_.end(), bus_id,
                             [](const Bus& b, int id) { return b.id < id; });
  if (it == buses_.end() || it->id != bus_id) return std::nullopt;
  return static_cast<std::size_t>(it - buses_.begin());
}

std::size_t NetworkModel::index_of(int bus_id) const {
  if (auto i = find_index(bus_id)) return *i;
  throw InvariantError(fmt::format("unknown bus id {}", bus_id));
}

std::optional<std::size_t> NetworkModel::branch_between(int a, int b) const {
  const auto ia = find_index(a);
  if (!ia) return std::nullopt;
  for (auto k : incident_[*ia]) {
    const auto& br = branches_[k];
    if ((br.from_bus == a && br.to_bus == b) || (br.from_bus == b && br.to_bus == a)) return k;
  }
  return std::nullopt;
}

NetworkModel NetworkModel::with_loads(const std::vector<double>& load_p,
                                      const std::vector<double>& load_q) const {
  if (load_p.size() != buses_.size() || load_q.size() != buses_.size()) {
    throw DimensionError("load vectors must have one entry per bus");
  }
  NetworkModel copy = *this;
  for (std::size_t i = 0; i < buses_.size(); ++i) {
    copy.buses_[i].load_p = load_p[i];
    copy.buses_[i].load_q = load_q[i];
  }
  return copy;
}

NetworkModel NetworkModel::with_dispatch_scaled(double factor) const {
  NetworkModel copy = *this;
  for (auto& b : copy.buses_) {
    if (b.kind == BusKind::PV) b.gen_p *= factor;
  }
  return copy;
}

bool NetworkModel::operator==(const NetworkModel& other) const {
  auto same_bus = [](const Bus& a, const Bus& b) {
    return a.id == b.id && a.kind == b.kind && a.voltage_setpoint == b.voltage_setpoint &&
           a.load_p == b.load_p && a.load_q == b.load_q && a.gen_p == b.gen_p && a.gen_q == b.gen_q;
  };
  auto same_branch = [](const Branch& a, const Branch& b) {
    return a.from_bus == b.from_bus && a.to_bus == b.to_bus && a.r == b.r && a.x == b.x &&
           a.b_shunt == b.b_shunt && a.tap == b.tap && a.kind == b.kind;
  };
  return base_mva_ == other.base_mva_ && name_ == other.name_ &&
         std::equal(buses_.begin(), buses_.end(), other.buses_.begin(), other.buses_.end(), same_bus) &&
         std::equal(branches_.begin(), branches_.end(), other.branches_.begin(), other.branches_.end(),
                    same_branch);
}

std::string to_string(BusKind kind) {
  switch (kind) {
    case BusKind::Slack: return "slack";
    case BusKind::PV: return "pv";
    case BusKind::PQ: return "pq";
  }
  return "pq";
}

std::string to_string(BranchKind kind) {
  return kind == BranchKind::Transformer ? "transformer" : "line";
}

BusKind parse_bus_kind(const std::string& text) {
  std::string t = text;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "slack" || t == "ref") return BusKind::Slack;
  if (t == "pv") return BusKind::PV;
  if (t == "pq") return BusKind::PQ;
  throw InvariantError("unknown bus kind '" + text + "'");
}

BranchKind parse_branch_kind(const std::string& text) {
  std::string t = text;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "line") return BranchKind::Line;
  if (t == "transformer" || t == "trafo") return BranchKind::Transformer;
  throw InvariantError("unknown branch kind '" + text + "'");
}

NetworkModel wscc9() {
  std::vector<Bus> buses = {
      {1, BusKind::Slack, 1.040, 0.0, 0.0, 0.0, 0.0},
      {2, BusKind::PV, 1.025, 0.0, 0.0, 163.0, 0.0},
      {3, BusKind::PV, 1.025, 0.0, 0.0, 85.0, 0.0},
      {4, BusKind::PQ, 1.0, 0.0, 0.0, 0.0, 0.0},
      {5, BusKind::PQ, 1.0, 125.0, 50.0, 0.0, 0.0},
      {6, BusKind::PQ, 1.0, 90.0, 30.0, 0.0, 0.0},
      {7, BusKind::PQ, 1.0, 0.0, 0.0, 0.0, 0.0},
      {8, BusKind::PQ, 1.0, 100.0, 35.0, 0.0, 0.0},
      {9, BusKind::PQ, 1.0, 0.0, 0.0, 0.0, 0.0},
  };
  std::vector<Branch> branches = {
      {1, 4, 0.0, 0.0576, 0.0, 1.0, BranchKind::Transformer},
      {2, 7, 0.0, 0.0625, 0.0, 1.0, BranchKind::Transformer},
      {3, 9, 0.0, 0.0586, 0.0, 1.0, BranchKind::Transformer},
      {4, 5, 0.0100, 0.0850, 0.176, 1.0, BranchKind::Line},
      {4, 6, 0.0170, 0.0920, 0.158, 1.0, BranchKind::Line},
      {5, 7, 0.0320, 0.1610, 0.306, 1.0, BranchKind::Line},
      {6, 9, 0.0390, 0.1700, 0.358, 1.0, BranchKind::Line},
      {7, 8, 0.0085, 0.0720, 0.149, 1.0, BranchKind::Line},
      {8, 9, 0.0119, 0.1008, 0.209, 1.0, BranchKind::Line},
  };
  return NetworkModel::create(std::move(buses), std::move(branches), 100.0, "wscc9");
}

}  // namespace fdi::grid
