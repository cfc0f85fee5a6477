#pragma once

#include <string>
#include <vector>

#include "fdi/grid/network.hpp"
#include "fdi/powerflow/measurements.hpp"
#include "fdi/powerflow/powerflow.hpp"

namespace fdi::estimation {

struct PlausibilityViolation {
  int measurement_id = 0;
  std::string rule;  // flow_limit | injection_limit | injection_sign | duplicate_id
};

struct PlausibilityReport {
  std::vector<PlausibilityViolation> violations;
  bool passed = true;
};

/// Screening limits derived from a base-case operating point. The fixture
/// carries no ratings, so branch limits are 2 x the thermal proxy
/// max(2.5 |S_base|, 50 MVA) and injection limits 1.5 x max(|S_base|, 10 MVA).
struct PlausibilityLimits {
  std::vector<double> branch_mva;     // per branch
  std::vector<double> injection_mva;  // per bus
};

PlausibilityLimits plausibility_limits(const grid::NetworkModel& network, const powerflow::OperatingState& base);

/// Rules: (a) |flow| within its branch limit, (b) |injection| within its bus
/// limit, (c) P-injection sign agrees with the bus injection class (3 sigma
/// slack), (d) unique measurement ids.
PlausibilityReport plausibility_check(const grid::NetworkModel& network, const powerflow::MeasurementSet& measurements,
                                      const PlausibilityLimits& limits);

/// Convenience overload that solves the base-case power flow for the limits.
PlausibilityReport plausibility_check(const grid::NetworkModel& network, const powerflow::MeasurementSet& measurements);

}  // namespace fdi::estimation
