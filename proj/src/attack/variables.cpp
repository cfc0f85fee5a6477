#include "fdi/attack/variables.hpp"

#include <algorithm>
#include <deque>

#include <fmt/format.h>

#include "fdi/error.hpp"

namespace fdi::attack {

using grid::BusKind;
using powerflow::StateVariable;
using powerflow::VarKind;

std::size_t constraint_count(const AttackArea& area) { return 2 * area.interior_no_injection.size() + 2; }

std::vector<StateVariable> changeable_state_variables(const grid::NetworkModel& network, const AttackArea& area) {
  std::vector<StateVariable> angles;
  std::vector<StateVariable> magnitudes;
  for (const int id : area.buses) {
    const auto i = network.index_of(id);
    const auto kind = network.buses()[i].kind;
    if (kind == BusKind::Slack) continue;
    if (std::binary_search(area.boundary.begin(), area.boundary.end(), id)) continue;
    angles.push_back({i, VarKind::Angle});
    if (kind != BusKind::PV) magnitudes.push_back({i, VarKind::Magnitude});
  }
  angles.insert(angles.end(), magnitudes.begin(), magnitudes.end());

  const auto needed = constraint_count(area) + 1;
  if (angles.size() < needed) {
    throw InfeasibleDesignError(fmt::format(
        "area around bus {} offers {} changeable state variables but {} constraints need {}", area.center_bus,
        angles.size(), constraint_count(area), needed));
  }
  return angles;
}

std::vector<StateVariable> select_unknowns(const grid::NetworkModel& network, const AttackArea& area,
                                           const std::vector<StateVariable>& candidates, const StateVariable& seed,
                                           std::size_t equation_count) {
  if (std::find(candidates.begin(), candidates.end(), seed) == candidates.end()) {
    throw InvalidArgument(fmt::format("seed variable {} is not changeable in this area", label(network, seed)));
  }
  std::vector<StateVariable> unknowns;
  for (const auto& v : candidates) {
    if (!(v == seed)) unknowns.push_back(v);
  }
  if (unknowns.size() <= equation_count) return unknowns;

  // Hop distance from the center inside the area.
  std::vector<int> hops(network.bus_count(), -1);
  std::deque<std::size_t> queue{network.index_of(area.center_bus)};
  hops[queue.front()] = 0;
  while (!queue.empty()) {
    const auto i = queue.front();
    queue.pop_front();
    for (const auto k : network.incident_branches(i)) {
      const auto& br = network.branches()[k];
      const int other = network.buses()[i].id == br.from_bus ? br.to_bus : br.from_bus;
      const auto j = network.index_of(other);
      if (hops[j] < 0 && area.contains(other)) {
        hops[j] = hops[i] + 1;
        queue.push_back(j);
      }
    }
  }

  auto tier = [&](const StateVariable& v) {
    if (v.kind == VarKind::Angle) return 2;
    return network.buses()[v.bus].injection_class() == grid::InjectionClass::Load ? 0 : 1;
  };
  std::vector<StateVariable> order = unknowns;
  std::stable_sort(order.begin(), order.end(), [&](const StateVariable& a, const StateVariable& b) {
    if (tier(a) != tier(b)) return tier(a) < tier(b);
    if (hops[a.bus] != hops[b.bus]) return hops[a.bus] > hops[b.bus];
    return a.bus > b.bus;
  });
  const auto surplus = unknowns.size() - equation_count;
  std::vector<StateVariable> fixed(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(surplus));
  std::vector<StateVariable> kept;
  for (const auto& v : unknowns) {
    if (std::find(fixed.begin(), fixed.end(), v) == fixed.end()) kept.push_back(v);
  }
  return kept;
}

std::string label(const grid::NetworkModel& network, const StateVariable& v) {
  return fmt::format("{}{}", v.kind == VarKind::Angle ? "theta" : "V", network.buses()[v.bus].id);
}

}  // namespace fdi::attack
