#include "fdi/attack/area.hpp"

#include <algorithm>
#include <deque>

namespace fdi::attack {

bool AttackArea::contains(int bus_id) const { return std::binary_search(buses.begin(), buses.end(), bus_id); }

AttackArea identify_attack_area(const grid::ExtendedAdmittanceMatrix& ext, int center_bus,
                                const grid::NetworkModel& network) {
  const auto n = ext.rows();
  const auto injection_col = n;
  const auto center = static_cast<Eigen::Index>(ext.index_of(center_bus));

  std::vector<bool> in_area(static_cast<std::size_t>(n), false);
  std::vector<bool> expanded(static_cast<std::size_t>(n), false);
  std::deque<Eigen::Index> pending{center};
  while (!pending.empty()) {
    const auto i = pending.front();
    pending.pop_front();
    if (expanded[static_cast<std::size_t>(i)]) continue;
    expanded[static_cast<std::size_t>(i)] = true;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (ext.at(j, i) == grid::Complex{}) continue;
      in_area[static_cast<std::size_t>(j)] = true;
      if (ext.at(j, injection_col) == grid::Complex{} && !expanded[static_cast<std::size_t>(j)]) pending.push_back(j);
    }
  }

  AttackArea area;
  area.center_bus = center_bus;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (in_area[static_cast<std::size_t>(i)]) area.buses.push_back(ext.bus_ids()[static_cast<std::size_t>(i)]);
  }
  area.whole_network = static_cast<Eigen::Index>(area.buses.size()) == n;

  for (Eigen::Index i = 0; i < n; ++i) {
    if (!in_area[static_cast<std::size_t>(i)]) continue;
    const int id = ext.bus_ids()[static_cast<std::size_t>(i)];
    if (ext.injection_column()[static_cast<std::size_t>(i)] == 0) {
      area.interior_no_injection.push_back(id);
      continue;
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i && !in_area[static_cast<std::size_t>(j)] && ext.at(j, i) != grid::Complex{}) {
        area.boundary.push_back(id);
        break;
      }
    }
  }

  for (std::size_t k = 0; k < network.branch_count(); ++k) {
    const auto& br = network.branches()[k];
    if (area.contains(br.from_bus) && area.contains(br.to_bus)) area.branches.push_back(k);
  }
  return area;
}

}  // namespace fdi::attack
