#pragma once

#include <vector>

#include "fdi/estimation/estimator.hpp"

namespace fdi::estimation {

inline constexpr double kDefaultSignificance = 0.005;

struct BddReport {
  int k_dof = 0;           // N_m - N_s of the final pass
  double threshold = 0.0;  // chi-square threshold of the final pass
  std::vector<int> flagged;
  bool passed = false;
  /// False when the loop stopped because no further removal was possible
  /// without losing observability (or no identifiable candidate remained).
  bool resolvable = true;
  std::vector<double> j_trace;
  EstimationResult estimate;  // final pass, over the surviving measurements
  /// h(x_hat) of the final pass for every input measurement, flagged ones
  /// included, in input order.
  std::vector<double> calculated_all;
};

/// Chi-square test on J(x) with largest-normalized-residual removal: while
/// J exceeds the threshold for K = N_m - N_s, drop the measurement with the
/// largest normalized residual, recompute K and re-estimate.
BddReport detect_bad_data(const grid::NetworkModel& network, const powerflow::MeasurementSet& measurements,
                          double significance = kDefaultSignificance, const EstimationOptions& options = {});

}  // namespace fdi::estimation
