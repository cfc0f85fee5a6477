#include "fdi/estimation/plausibility.hpp"

#include <cmath>
#include <set>

#include "fdi/powerflow/flows.hpp"

namespace fdi::estimation {

using grid::InjectionClass;
using powerflow::MeasurementKind;

PlausibilityLimits plausibility_limits(const grid::NetworkModel& network, const powerflow::OperatingState& base) {
  const auto flows = powerflow::compute_branch_flows(network, base);
  const auto inj = powerflow::compute_injections(network, base);
  PlausibilityLimits limits;
  for (const auto& f : flows.branches) {
    const double s = std::max(std::hypot(f.p_from, f.q_from), std::hypot(f.p_to, f.q_to));
    limits.branch_mva.push_back(2.0 * std::max(2.5 * s, 50.0));
  }
  for (std::size_t i = 0; i < network.bus_count(); ++i) {
    limits.injection_mva.push_back(1.5 * std::max(std::hypot(inj.p[i], inj.q[i]), 10.0));
  }
  return limits;
}

PlausibilityReport plausibility_check(const grid::NetworkModel& network, const powerflow::MeasurementSet& measurements,
                                      const PlausibilityLimits& limits) {
  PlausibilityReport report;
  std::set<int> seen;
  for (const auto& m : measurements.entries) {
    if (!seen.insert(m.id).second) report.violations.push_back({m.id, "duplicate_id"});
    if (powerflow::is_flow(m.kind)) {
      if (auto k = network.branch_between(m.from_bus, m.to_bus); k && std::abs(m.value) > limits.branch_mva[*k]) {
        report.violations.push_back({m.id, "flow_limit"});
      }
      continue;
    }
    const auto bus = network.find_index(m.from_bus);
    if (!bus) continue;
    if (std::abs(m.value) > limits.injection_mva[*bus]) report.violations.push_back({m.id, "injection_limit"});
    if (m.kind == MeasurementKind::PInj) {
      const double slack = 3.0 * m.sigma;
      const auto cls = network.buses()[*bus].injection_class();
      const bool ok = (cls == InjectionClass::Load && m.value <= slack) ||
                      (cls == InjectionClass::Generation && m.value >= -slack) ||
                      (cls == InjectionClass::None && std::abs(m.value) <= slack);
      if (!ok) report.violations.push_back({m.id, "injection_sign"});
    }
  }
  report.passed = report.violations.empty();
  return report;
}

PlausibilityReport plausibility_check(const grid::NetworkModel& network, const powerflow::MeasurementSet& measurements) {
  const auto base = powerflow::solve_ac_powerflow(network).state;
  return plausibility_check(network, measurements, plausibility_limits(network, base));
}

}  // namespace fdi::estimation
