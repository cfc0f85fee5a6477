#include "fdi/estimation/bad_data.hpp"

#include <cmath>

#include "fdi/estimation/chi_square.hpp"

namespace fdi::estimation {

BddReport detect_bad_data(const grid::NetworkModel& network, const powerflow::MeasurementSet& measurements,
                          double significance, const EstimationOptions& options) {
  // Validate the significance up front, independent of set size.
  (void)chi_square_threshold(1, significance);

  BddReport report;
  powerflow::MeasurementSet current = measurements;
  while (true) {
    report.estimate = estimate_wls(network, current, options);
    const int ns = report.estimate.n_states;
    report.k_dof = static_cast<int>(current.size()) - ns;
    report.j_trace.push_back(report.estimate.residual_j);
    if (report.k_dof < 1) {
      // No redundancy left: J is identically zero and nothing is testable.
      report.threshold = 0.0;
      report.passed = false;
      report.resolvable = false;
      break;
    }
    report.threshold = chi_square_threshold(report.k_dof, significance);
    if (report.estimate.residual_j <= report.threshold) {
      report.passed = true;
      break;
    }

    std::size_t worst = current.size();
    double worst_value = -1.0;
    for (std::size_t i = 0; i < current.size(); ++i) {
      const double rn = report.estimate.normalized_residuals[i];
      if (!std::isnan(rn) && rn > worst_value) {
        worst_value = rn;
        worst = i;
      }
    }
    if (worst == current.size()) {
      report.resolvable = false;
      break;
    }
    const int id = current.entries[worst].id;
    auto candidate = current.without({id});
    if (!observability_check(network, powerflow::plan_of(candidate)).observable) {
      report.resolvable = false;
      break;
    }
    report.flagged.push_back(id);
    current = std::move(candidate);
  }

  const powerflow::MeasurementModel all(network, powerflow::plan_of(measurements));
  const Eigen::VectorXd h = all.evaluate(report.estimate.estimated_state);
  report.calculated_all.assign(h.data(), h.data() + h.size());
  return report;
}

}  // namespace fdi::estimation
