#include "fdi/attack/constraints.hpp"

#include <fmt/format.h>

#include "fdi/error.hpp"

namespace fdi::attack {

using powerflow::BranchEnd;
using powerflow::Quantity;
using powerflow::Side;

std::string Constraint::describe() const {
  const char q = quantity == Quantity::P ? 'P' : 'Q';
  std::vector<std::string> parts;
  for (const auto& t : terms) {
    switch (t.kind) {
      case ConstraintTerm::Kind::BranchFlow: parts.push_back(fmt::format("{}{}-{}", q, t.bus, t.other_bus)); break;
      case ConstraintTerm::Kind::InjectionChange: parts.push_back(fmt::format("d{}inj{}", q, t.bus)); break;
      case ConstraintTerm::Kind::LossChange:
        parts.push_back(fmt::format("d{}loss{}-{}", q, t.bus, t.other_bus));
        break;
    }
  }
  return fmt::format("{} = 0", fmt::join(parts, " + "));
}

ConstraintSystem::ConstraintSystem(const grid::NetworkModel& network, std::vector<Constraint> constraints,
                                   powerflow::OperatingState baseline)
    : eval_(network), constraints_(std::move(constraints)), baseline_(std::move(baseline)) {
  if (baseline_.size() != network.bus_count()) throw DimensionError("baseline state does not match the network");
}

Eigen::VectorXd ConstraintSystem::residuals(const powerflow::OperatingState& state) const {
  Eigen::VectorXd f(static_cast<Eigen::Index>(constraints_.size()));
  for (std::size_t i = 0; i < constraints_.size(); ++i) {
    f(static_cast<Eigen::Index>(i)) = eval_.evaluate(state, constraints_[i].functional) - constraints_[i].offset;
  }
  return f;
}

Eigen::MatrixXd ConstraintSystem::jacobian(const powerflow::OperatingState& state,
                                           const std::vector<powerflow::StateVariable>& unknowns) const {
  const powerflow::VariableIndex index(unknowns, eval_.bus_count());
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(constraints_.size()),
                                            static_cast<Eigen::Index>(unknowns.size()));
  for (std::size_t i = 0; i < constraints_.size(); ++i) {
    eval_.gradient(state, constraints_[i].functional, index, j.row(static_cast<Eigen::Index>(i)));
  }
  return j;
}

ConstraintSystem form_constraints(const grid::NetworkModel& network, const AttackArea& area,
                                  const powerflow::OperatingState& baseline) {
  const powerflow::FlowEvaluator eval(network);
  std::vector<Constraint> out;

  for (const int bus_id : area.interior_no_injection) {
    const auto bus = network.index_of(bus_id);
    for (const auto q : {Quantity::P, Quantity::Q}) {
      Constraint c;
      c.kind = ConstraintKind::ZeroInjection;
      c.quantity = q;
      c.bus = bus_id;
      c.functional = eval.injection(bus, q);
      for (const auto& [end, coeff] : c.functional.terms) {
        c.terms.push_back({ConstraintTerm::Kind::BranchFlow, bus_id,
                           network.buses()[eval.far_bus(end)].id});
      }
      out.push_back(std::move(c));
    }
  }

  for (const auto q : {Quantity::P, Quantity::Q}) {
    Constraint c;
    c.kind = ConstraintKind::GlobalBalance;
    c.quantity = q;
    c.functional.quantity = q;
    for (const int bus_id : area.buses) {
      const auto bus = network.index_of(bus_id);
      if (network.buses()[bus].injection_class() == grid::InjectionClass::None) continue;
      // Consumption sign: the injection change counts what the bus draws.
      for (const auto& [end, coeff] : eval.injection(bus, q).terms) c.functional.terms.emplace_back(end, -coeff);
      c.terms.push_back({ConstraintTerm::Kind::InjectionChange, bus_id, bus_id});
    }
    for (const auto k : area.branches) {
      c.functional.terms.emplace_back(BranchEnd{k, Side::From}, 1.0);
      c.functional.terms.emplace_back(BranchEnd{k, Side::To}, 1.0);
      const auto& br = network.branches()[k];
      c.terms.push_back({ConstraintTerm::Kind::LossChange, br.from_bus, br.to_bus});
    }
    out.push_back(std::move(c));
  }

  for (auto& c : out) c.offset = eval.evaluate(baseline, c.functional);
  return ConstraintSystem(network, std::move(out), baseline);
}

}  // namespace fdi::attack
