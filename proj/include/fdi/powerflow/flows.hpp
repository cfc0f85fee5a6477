#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "fdi/grid/admittance.hpp"
#include "fdi/grid/network.hpp"
#include "fdi/powerflow/powerflow.hpp"

namespace fdi::powerflow {

enum class Side { From, To };

struct BranchEnd {
  std::size_t branch = 0;
  Side side = Side::From;
};

struct BranchFlow {
  double p_from = 0.0;  // MW, into the branch at the from end
  double q_from = 0.0;  // Mvar
  double p_to = 0.0;
  double q_to = 0.0;
  double p_loss = 0.0;  // p_from + p_to
  double q_loss = 0.0;
};

struct BranchFlowSet {
  std::vector<BranchFlow> branches;  // same order as NetworkModel::branches()
};

BranchFlowSet compute_branch_flows(const grid::NetworkModel& network, const OperatingState& state);

/// Net injection per bus (generation positive), MW/Mvar, as the sum of the
/// flows leaving the bus.
struct BusInjections {
  std::vector<double> p;
  std::vector<double> q;
};
BusInjections compute_injections(const grid::NetworkModel& network, const OperatingState& state);

enum class VarKind { Angle, Magnitude };

struct StateVariable {
  std::size_t bus = 0;  // index into NetworkModel::buses()
  VarKind kind = VarKind::Angle;
  bool operator==(const StateVariable&) const = default;
};

/// Column lookup for a variable list: -1 where a bus variable is held fixed.
struct VariableIndex {
  std::vector<int> angle;
  std::vector<int> magnitude;

  VariableIndex(const std::vector<StateVariable>& vars, std::size_t bus_count);
};

enum class Quantity { P, Q };

/// Weighted sum of branch-end powers. Every measurement and every attack
/// constraint in this project is one of these.
struct FlowFunctional {
  Quantity quantity = Quantity::P;
  std::vector<std::pair<BranchEnd, double>> terms;
};

/// Branch-end power and its analytic partial derivatives, p.u.
class FlowEvaluator {
 public:
  explicit FlowEvaluator(const grid::NetworkModel& network);

  std::size_t near_bus(const BranchEnd& end) const;
  std::size_t far_bus(const BranchEnd& end) const;

  grid::Complex end_power(const OperatingState& state, const BranchEnd& end) const;

  /// d(P,Q)/d(theta_near, V_near, theta_far, V_far).
  struct Partials {
    std::array<double, 4> dp;
    std::array<double, 4> dq;
  };
  Partials end_partials(const OperatingState& state, const BranchEnd& end) const;

  double evaluate(const OperatingState& state, const FlowFunctional& f) const;

  /// Accumulates d f / d vars into `row` (which must start zeroed).
  void gradient(const OperatingState& state, const FlowFunctional& f, const VariableIndex& index,
                Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row) const;

  /// Incident ends of a bus, i.e. the terms of its injection functional.
  FlowFunctional injection(std::size_t bus, Quantity q) const;

  std::size_t bus_count() const noexcept { return incident_.size(); }

 private:
  std::vector<std::vector<BranchEnd>> incident_;
  std::vector<grid::BranchAdmittance> admittance_;
  std::vector<std::size_t> from_;
  std::vector<std::size_t> to_;
};

}  // namespace fdi::powerflow
