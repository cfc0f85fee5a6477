#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "fdi/grid/network.hpp"
#include "fdi/powerflow/measurements.hpp"

namespace fdi::attack {

/// Linear attack a = H c applied on top of a genuine set. Entries with a
/// nonzero shift are marked manipulated. Throws DimensionError.
powerflow::MeasurementSet dc_baseline_attack(const Eigen::MatrixXd& h, const Eigen::VectorXd& c,
                                             const powerflow::MeasurementSet& genuine);

/// DC measurement model H (MW per rad) over the non-slack angles: P-flow
/// rows carry +-1/x, P-injection rows the B' row, reactive rows are zero.
Eigen::MatrixXd dc_measurement_matrix(const grid::NetworkModel& network, const powerflow::MeasurementPlan& plan);

enum class TrialOutcome { Diverged, Flagged, Bypassed };

struct DcBaselineReport {
  int trials = 0;
  int diverged = 0;
  int flagged = 0;
  int bypassed = 0;
  std::vector<TrialOutcome> outcomes;
  std::vector<double> first_pass_j;  // NaN for diverged trials
};

struct DcBaselineOptions {
  int trials = 100;
  std::uint64_t seed = 7;
  double magnitude = 0.05;  // c_i ~ U(-magnitude, magnitude), rad
  double significance = 0.005;
};

/// Random-c experiment against the AC estimator with H from the DC model. A
/// trial bypasses only when the estimator converges and the first
/// chi-square test passes.
DcBaselineReport dc_baseline_experiment(const grid::NetworkModel& network, const DcBaselineOptions& options = {});

}  // namespace fdi::attack
