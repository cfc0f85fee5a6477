#include "fdi/attack/attack.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "fdi/error.hpp"
#include "fdi/grid/admittance.hpp"

namespace fdi::attack {

using powerflow::StateVariable;
using powerflow::VarKind;

bool in_area(const grid::NetworkModel& network, const AttackArea& area, const powerflow::Measurement& m) {
  if (powerflow::is_flow(m.kind)) {
    const auto k = network.branch_between(m.from_bus, m.to_bus);
    return k && std::find(area.branches.begin(), area.branches.end(), *k) != area.branches.end();
  }
  return area.contains(m.from_bus);
}

namespace {

double& slot(powerflow::OperatingState& s, const StateVariable& v) {
  return v.kind == VarKind::Angle ? s.v_ang[v.bus] : s.v_mag[v.bus];
}

}  // namespace

AttackResult solve_attack(const grid::NetworkModel& network, const AttackBaseline& baseline, const AttackSpec& spec,
                          const AttackOptions& options) {
  if (baseline.state.size() != network.bus_count()) throw DimensionError("baseline state does not match the network");

  AttackResult result;
  const auto ext = grid::build_extended_ybus(network);
  result.area = identify_attack_area(ext, spec.center_bus, network);
  if (result.area.whole_network) {
    throw InfeasibleDesignError(
        fmt::format("attack area around bus {} covers the whole network; no injection boundary", spec.center_bus));
  }
  const auto system = form_constraints(network, result.area, baseline.state);
  result.constraints = system.constraints();
  result.changeable = changeable_state_variables(network, result.area);
  result.seed = {network.index_of(spec.seed_bus), spec.seed_kind};
  result.unknowns = select_unknowns(network, result.area, result.changeable, result.seed, system.size());

  auto x = baseline.state;
  slot(x, result.seed) += spec.seed_kind == VarKind::Angle ? spec.delta * std::numbers::pi / 180.0 : spec.delta;

  auto& trace = result.trace;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
  cod.setThreshold(1e-10);
  bool converged = false;
  for (int iter = 0; iter <= options.max_iter; ++iter) {
    const Eigen::VectorXd f = system.residuals(x);
    const double worst = f.size() ? f.cwiseAbs().maxCoeff() : 0.0;
    trace.residual_norms.push_back(worst);
    trace.final_residual = worst;
    trace.iterations = iter;
    if (!std::isfinite(worst)) break;
    if (worst < options.tol) {
      converged = true;
      break;
    }
    if (iter == options.max_iter) break;
    cod.compute(system.jacobian(x, result.unknowns));
    trace.jacobian_rank = static_cast<int>(cod.rank());
    if (cod.rank() == 0) {
      throw DegenerateAreaError(
          fmt::format("constraint Jacobian around bus {} is identically zero", spec.center_bus));
    }
    const Eigen::VectorXd step = cod.solve(f);
    for (std::size_t k = 0; k < result.unknowns.size(); ++k) slot(x, result.unknowns[k]) -= step(static_cast<Eigen::Index>(k));
    if (std::any_of(x.v_mag.begin(), x.v_mag.end(), [](double v) { return !(v > 0.0); })) break;
  }
  if (!converged) {
    throw AttackInfeasibleError(
        fmt::format("attack solve around bus {} did not converge after {} iterations (residual {:.3e} p.u.)",
                    spec.center_bus, trace.iterations, trace.final_residual),
        trace.iterations, trace.final_residual);
  }
  result.manipulated_state = x;

  const auto plan = powerflow::plan_of(baseline.genuine);
  const powerflow::MeasurementModel model(network, plan);
  result.corrupted = baseline.genuine;
  for (std::size_t i = 0; i < baseline.genuine.size(); ++i) {
    auto& m = result.corrupted.entries[i];
    if (!in_area(network, result.area, m)) continue;
    const double shift = model.evaluate(x, i) - model.evaluate(baseline.state, i);
    const double value = m.value + shift;
    if (value != m.value) {
      m.value = value;
      m.provenance = powerflow::Provenance::Manipulated;
      result.manipulated_ids.push_back(m.id);
    }
  }
  return result;
}

}  // namespace fdi::attack
