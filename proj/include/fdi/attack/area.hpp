#pragma once

#include <vector>

#include "fdi/grid/admittance.hpp"

namespace fdi::attack {

/// Buses whose measurements an attack may alter. Every bus on the boundary
/// carries an injection, so altered flows never reach a pure junction.
struct AttackArea {
  int center_bus = 0;
  std::vector<int> buses;                  // ascending id
  std::vector<int> boundary;               // injection buses with a neighbour outside
  std::vector<int> interior_no_injection;  // injection class 0
  std::vector<std::size_t> branches;       // both ends inside, network order
  /// Set when the expansion swallowed every bus: there is no boundary.
  bool whole_network = false;

  bool contains(int bus_id) const;
};

/// Grows the area from the center's admittance column; every no-injection
/// bus reached is expanded through its own column. Columns are scanned in
/// ascending bus order.
AttackArea identify_attack_area(const grid::ExtendedAdmittanceMatrix& ext, int center_bus,
                                const grid::NetworkModel& network);

}  // namespace fdi::attack
