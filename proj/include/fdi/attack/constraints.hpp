#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fdi/attack/area.hpp"
#include "fdi/grid/network.hpp"
#include "fdi/powerflow/flows.hpp"

namespace fdi::attack {

enum class ConstraintKind {
  ZeroInjection,  // sum of flows leaving a no-injection bus stays zero
  GlobalBalance,  // sum dInj (consumption sign) + sum dLoss = 0 over the area
};

/// One symbolic term of a constraint, kept for reporting.
struct ConstraintTerm {
  enum class Kind { BranchFlow, InjectionChange, LossChange };
  Kind kind = Kind::BranchFlow;
  int bus = 0;         // metering bus for flows, the bus for injections
  int other_bus = 0;   // far end for flows and losses
};

struct Constraint {
  ConstraintKind kind = ConstraintKind::ZeroInjection;
  powerflow::Quantity quantity = powerflow::Quantity::P;
  int bus = 0;  // the no-injection bus; 0 for global constraints
  std::vector<ConstraintTerm> terms;
  /// residual(x) = functional(x) - offset, p.u.; the offset is the value of
  /// the functional at the genuine state.
  powerflow::FlowFunctional functional;
  double offset = 0.0;

  std::string describe() const;
};

class ConstraintSystem {
 public:
  ConstraintSystem(const grid::NetworkModel& network, std::vector<Constraint> constraints,
                   powerflow::OperatingState baseline);

  const std::vector<Constraint>& constraints() const noexcept { return constraints_; }
  std::size_t size() const noexcept { return constraints_.size(); }
  const powerflow::OperatingState& baseline_state() const noexcept { return baseline_; }

  Eigen::VectorXd residuals(const powerflow::OperatingState& state) const;
  Eigen::MatrixXd jacobian(const powerflow::OperatingState& state,
                           const std::vector<powerflow::StateVariable>& unknowns) const;

 private:
  powerflow::FlowEvaluator eval_;
  std::vector<Constraint> constraints_;
  powerflow::OperatingState baseline_;
};

/// Zero-injection P and Q balance for each no-injection bus in the area (in
/// ascending id order), then the global P and Q balance over the area's
/// injection buses and branches.
ConstraintSystem form_constraints(const grid::NetworkModel& network, const AttackArea& area,
                                  const powerflow::OperatingState& baseline);

}  // namespace fdi::attack
