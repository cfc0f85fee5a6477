#pragma once

#include <string>
#include <vector>

#include "fdi/attack/area.hpp"
#include "fdi/grid/network.hpp"
#include "fdi/powerflow/flows.hpp"

namespace fdi::attack {

/// Number of constraint equations form_constraints produces for an area.
std::size_t constraint_count(const AttackArea& area);

/// Voltage angles and magnitudes of the area minus: both at the slack bus,
/// the magnitude at PV buses, both at boundary buses (which stay fixed so
/// the attack cannot leak past them). Angles first, then magnitudes, each in
/// ascending bus id. Throws InfeasibleDesignError when fewer than
/// constraint_count(area) + 1 variables remain.
std::vector<powerflow::StateVariable> changeable_state_variables(const grid::NetworkModel& network,
                                                                 const AttackArea& area);

/// Removes the seed variable and, when more candidates than equations
/// remain, holds the surplus at baseline: magnitudes at load buses farthest
/// from the center go first, then other magnitudes, then angles (farthest
/// first, higher id breaking ties).
std::vector<powerflow::StateVariable> select_unknowns(const grid::NetworkModel& network, const AttackArea& area,
                                                      const std::vector<powerflow::StateVariable>& candidates,
                                                      const powerflow::StateVariable& seed,
                                                      std::size_t equation_count);

/// "theta5", "V4" style label with the bus id.
std::string label(const grid::NetworkModel& network, const powerflow::StateVariable& v);

}  // namespace fdi::attack
