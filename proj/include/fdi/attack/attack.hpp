#pragma once

#include <vector>

#include "fdi/attack/area.hpp"
#include "fdi/attack/constraints.hpp"
#include "fdi/attack/variables.hpp"
#include "fdi/powerflow/measurements.hpp"

namespace fdi::attack {

/// Single-variable seed perturbation. `delta` is in degrees for an angle
/// seed and p.u. for a magnitude seed.
struct AttackSpec {
  int center_bus = 5;
  int seed_bus = 5;
  powerflow::VarKind seed_kind = powerflow::VarKind::Angle;
  double delta = 0.5;

  static AttackSpec angle(int bus, double delta_deg) { return {bus, bus, powerflow::VarKind::Angle, delta_deg}; }
};

/// What the attacker collected about the genuine operating point.
struct AttackBaseline {
  powerflow::OperatingState state;
  powerflow::MeasurementSet genuine;
};

struct SolverTrace {
  int iterations = 0;
  std::vector<double> residual_norms;  // max |residual| before each step, p.u.
  double final_residual = 0.0;
  int jacobian_rank = 0;
};

struct AttackOptions {
  double tol = 1e-10;  // max |constraint residual|, p.u.
  int max_iter = 50;
};

struct AttackResult {
  AttackArea area;
  std::vector<Constraint> constraints;
  std::vector<powerflow::StateVariable> changeable;
  std::vector<powerflow::StateVariable> unknowns;
  powerflow::StateVariable seed;
  powerflow::OperatingState manipulated_state;
  powerflow::MeasurementSet corrupted;
  std::vector<int> manipulated_ids;
  SolverTrace trace;
};

/// Newton iteration on the constraint residuals from the genuine state with
/// the seed moved by delta. Each step is the minimum-norm solution of the
/// linearised system, so redundant constraint rows are tolerated. Corrupted
/// values are genuine + (h(x_attack) - h(x_genuine)) on in-area meters;
/// every other meter is copied bit for bit.
///
/// Throws InfeasibleDesignError (too few variables), AttackInfeasibleError
/// (no convergence, with trace) or DegenerateAreaError (zero Jacobian).
AttackResult solve_attack(const grid::NetworkModel& network, const AttackBaseline& baseline, const AttackSpec& spec,
                          const AttackOptions& options = {});

/// Meters that an attack on `area` may legitimately rewrite: flows on
/// in-area branches and injections at in-area buses.
bool in_area(const grid::NetworkModel& network, const AttackArea& area, const powerflow::Measurement& m);

}  // namespace fdi::attack
