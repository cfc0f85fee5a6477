#include "fdi/estimation/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "fdi/error.hpp"

namespace fdi::estimation {

using powerflow::MeasurementModel;
using powerflow::OperatingState;
using powerflow::VarKind;

namespace {

// Relative pivot threshold for the rank decision.
constexpr double kRankThreshold = 1e-10;

OperatingState se_flat_start(const grid::NetworkModel& network) {
  OperatingState s;
  s.v_mag.assign(network.bus_count(), 1.0);
  s.v_ang.assign(network.bus_count(), 0.0);
  return s;
}

}  // namespace

double residual_j(std::span<const double> measured, std::span<const double> calculated,
                  std::span<const double> sigmas) {
  if (measured.size() != calculated.size() || measured.size() != sigmas.size()) {
    throw DimensionError("residual_j: measured, calculated and sigma lengths differ");
  }
  double j = 0.0;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    const double r = (measured[i] - calculated[i]) / sigmas[i];
    j += r * r;
  }
  return j;
}

ObservabilityReport observability_check(const grid::NetworkModel& network, const powerflow::MeasurementPlan& plan) {
  const auto vars = powerflow::estimation_variables(network);
  ObservabilityReport report;
  report.n_states = static_cast<int>(vars.size());
  if (plan.entries.empty()) return report;
  const MeasurementModel model(network, plan);
  const Eigen::MatrixXd h = model.jacobian(se_flat_start(network), vars);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(h);
  qr.setThreshold(kRankThreshold);
  report.rank = static_cast<int>(qr.rank());
  report.observable = report.rank == report.n_states;
  return report;
}

EstimationResult estimate_wls(const grid::NetworkModel& network, const powerflow::MeasurementSet& measurements,
                              const EstimationOptions& options) {
  const auto plan = powerflow::plan_of(measurements);
  const auto vars = powerflow::estimation_variables(network);
  const auto ns = static_cast<Eigen::Index>(vars.size());
  const auto nm = static_cast<Eigen::Index>(measurements.size());
  if (nm < ns) {
    throw UnobservableError(fmt::format("{} measurements cannot determine {} states", nm, ns));
  }
  const MeasurementModel model(network, plan);

  Eigen::VectorXd z(nm);
  Eigen::VectorXd inv_sigma(nm);
  for (Eigen::Index i = 0; i < nm; ++i) {
    z(i) = measurements.entries[static_cast<std::size_t>(i)].value;
    inv_sigma(i) = 1.0 / measurements.entries[static_cast<std::size_t>(i)].sigma;
  }

  EstimationResult result;
  result.n_states = static_cast<int>(ns);
  OperatingState x = se_flat_start(network);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
  qr.setThreshold(kRankThreshold);

  double last_step = std::numeric_limits<double>::infinity();
  for (int iter = 1; iter <= options.max_iter; ++iter) {
    const Eigen::VectorXd r = (z - model.evaluate(x)).cwiseProduct(inv_sigma);
    const Eigen::MatrixXd hw = inv_sigma.asDiagonal() * model.jacobian(x, vars);
    qr.compute(hw);
    if (qr.rank() < ns) {
      throw UnobservableError(fmt::format("measurement Jacobian rank {} < {} states", qr.rank(), ns));
    }
    const Eigen::VectorXd dx = qr.solve(r);
    if (!dx.allFinite()) break;
    for (Eigen::Index k = 0; k < ns; ++k) {
      const auto& v = vars[static_cast<std::size_t>(k)];
      (v.kind == VarKind::Angle ? x.v_ang : x.v_mag)[v.bus] += dx(k);
    }
    last_step = dx.cwiseAbs().maxCoeff();
    result.iterations = iter;
    const bool sane = std::all_of(x.v_mag.begin(), x.v_mag.end(), [](double m) { return m > 0.0 && m < 10.0; });
    if (!sane) break;
    if (last_step < options.tol) {
      result.converged = true;
      break;
    }
  }
  if (!result.converged) {
    throw DivergenceError(fmt::format("state estimation did not converge (last step {:.3e})", last_step),
                          result.iterations, last_step);
  }

  const Eigen::VectorXd h = model.evaluate(x);
  result.estimated_state = x;
  result.calculated.assign(h.data(), h.data() + nm);
  std::vector<double> sig(static_cast<std::size_t>(nm));
  for (std::size_t i = 0; i < sig.size(); ++i) sig[i] = measurements.entries[i].sigma;
  std::vector<double> zs(z.data(), z.data() + nm);
  result.residual_j = residual_j(zs, result.calculated, sig);

  // Omega_ii / sigma_i^2 = 1 - ||row i of Q1||^2 for the weighted Jacobian.
  const Eigen::MatrixXd hw = inv_sigma.asDiagonal() * model.jacobian(x, vars);
  Eigen::HouseholderQR<Eigen::MatrixXd> hqr(hw);
  const Eigen::MatrixXd q1 = hqr.householderQ() * Eigen::MatrixXd::Identity(nm, ns);
  result.normalized_residuals.resize(static_cast<std::size_t>(nm));
  for (Eigen::Index i = 0; i < nm; ++i) {
    const double omega = 1.0 - q1.row(i).squaredNorm();
    const double rw = (z(i) - h(i)) * inv_sigma(i);
    result.normalized_residuals[static_cast<std::size_t>(i)] =
        omega > 1e-10 ? std::abs(rw) / std::sqrt(omega) : std::numeric_limits<double>::quiet_NaN();
  }
  return result;
}

}  // namespace fdi::estimation
