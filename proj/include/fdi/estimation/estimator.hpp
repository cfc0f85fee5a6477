#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fdi/grid/network.hpp"
#include "fdi/powerflow/measurements.hpp"
#include "fdi/powerflow/powerflow.hpp"

namespace fdi::estimation {

struct EstimationOptions {
  double tol = 1e-8;  // max |state update|
  int max_iter = 50;
};

struct EstimationResult {
  powerflow::OperatingState estimated_state;
  std::vector<double> calculated;  // Z_calc, same order as the input set
  /// |r_i| / sqrt(Omega_ii); NaN for critical measurements (Omega_ii ~ 0).
  std::vector<double> normalized_residuals;
  double residual_j = 0.0;
  int iterations = 0;
  bool converged = false;
  int n_states = 0;
};

/// Weighted sum of squared residuals, weights 1/sigma^2.
double residual_j(std::span<const double> measured, std::span<const double> calculated,
                  std::span<const double> sigmas);

/// Gauss-Newton WLS from a flat start. Throws UnobservableError when the
/// measurement Jacobian loses rank, DivergenceError when max_iter runs out.
EstimationResult estimate_wls(const grid::NetworkModel& network, const powerflow::MeasurementSet& measurements,
                              const EstimationOptions& options = {});

struct ObservabilityReport {
  bool observable = false;
  int rank = 0;
  int n_states = 0;
};

/// Numerical rank of the measurement Jacobian at a flat start (V = 1,
/// theta = 0) against the 2n - 1 estimated states.
ObservabilityReport observability_check(const grid::NetworkModel& network, const powerflow::MeasurementPlan& plan);

}  // namespace fdi::estimation
