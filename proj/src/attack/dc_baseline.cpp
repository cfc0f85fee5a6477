#include "fdi/attack/dc_baseline.hpp"

#include <cmath>
#include <limits>
#include <random>

#include <fmt/format.h>

#include "fdi/error.hpp"
#include "fdi/estimation/bad_data.hpp"
#include "fdi/estimation/chi_square.hpp"

namespace fdi::attack {

powerflow::MeasurementSet dc_baseline_attack(const Eigen::MatrixXd& h, const Eigen::VectorXd& c,
                                             const powerflow::MeasurementSet& genuine) {
  if (h.rows() != static_cast<Eigen::Index>(genuine.size()) || h.cols() != c.size()) {
    throw DimensionError(fmt::format("H is {}x{}, expected {}x{}", h.rows(), h.cols(), genuine.size(), c.size()));
  }
  const Eigen::VectorXd a = h * c;
  auto out = genuine;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double shift = a(static_cast<Eigen::Index>(i));
    if (shift != 0.0) {
      out.entries[i].value += shift;
      out.entries[i].provenance = powerflow::Provenance::Manipulated;
    }
  }
  return out;
}

Eigen::MatrixXd dc_measurement_matrix(const grid::NetworkModel& network, const powerflow::MeasurementPlan& plan) {
  const auto n = static_cast<Eigen::Index>(network.bus_count());
  const auto slack = static_cast<Eigen::Index>(network.slack_index());
  auto column = [slack](Eigen::Index bus) { return bus < slack ? bus : bus - 1; };
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(plan.entries.size()), n - 1);

  // dP_ij/dtheta = +-base/x_ij for the metering end i.
  auto add_flow = [&](Eigen::Index row, int from_bus, int to_bus) {
    const auto k = network.branch_between(from_bus, to_bus);
    if (!k) throw PlanError(fmt::format("meter references missing branch {}-{}", from_bus, to_bus));
    const double s = network.base_mva() / network.branches()[*k].x;
    const auto i = static_cast<Eigen::Index>(network.index_of(from_bus));
    const auto j = static_cast<Eigen::Index>(network.index_of(to_bus));
    if (i != slack) h(row, column(i)) += s;
    if (j != slack) h(row, column(j)) -= s;
  };
  for (std::size_t r = 0; r < plan.entries.size(); ++r) {
    const auto& e = plan.entries[r];
    const auto row = static_cast<Eigen::Index>(r);
    if (e.kind == powerflow::MeasurementKind::PFlow) {
      add_flow(row, e.from_bus, e.to_bus);
    } else if (e.kind == powerflow::MeasurementKind::PInj) {
      const auto bus = network.index_of(e.from_bus);
      for (const auto k : network.incident_branches(bus)) {
        const auto& br = network.branches()[k];
        add_flow(row, e.from_bus, br.from_bus == e.from_bus ? br.to_bus : br.from_bus);
      }
    }
  }
  return h;
}

DcBaselineReport dc_baseline_experiment(const grid::NetworkModel& network, const DcBaselineOptions& options) {
  const auto state = powerflow::solve_ac_powerflow(network).state;
  const auto plan = powerflow::default_plan(network);
  const auto genuine = powerflow::generate_measurements(network, state, plan);
  const Eigen::MatrixXd h = dc_measurement_matrix(network, plan);
  const int k_dof = static_cast<int>(genuine.size()) - static_cast<int>(2 * network.bus_count() - 1);
  const double threshold = estimation::chi_square_threshold(k_dof, options.significance);

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> uniform(-options.magnitude, options.magnitude);

  DcBaselineReport report;
  report.trials = options.trials;
  for (int t = 0; t < options.trials; ++t) {
    Eigen::VectorXd c(h.cols());
    for (auto& v : c) v = uniform(rng);
    const auto corrupted = dc_baseline_attack(h, c, genuine);
    try {
      const auto est = estimation::estimate_wls(network, corrupted);
      report.first_pass_j.push_back(est.residual_j);
      if (est.residual_j <= threshold) {
        report.outcomes.push_back(TrialOutcome::Bypassed);
        ++report.bypassed;
      } else {
        report.outcomes.push_back(TrialOutcome::Flagged);
        ++report.flagged;
      }
    } catch (const DivergenceError&) {
      report.first_pass_j.push_back(std::numeric_limits<double>::quiet_NaN());
      report.outcomes.push_back(TrialOutcome::Diverged);
      ++report.diverged;
    } catch (const UnobservableError&) {
      report.first_pass_j.push_back(std::numeric_limits<double>::quiet_NaN());
      report.outcomes.push_back(TrialOutcome::Diverged);
      ++report.diverged;
    }
  }
  return report;
}

}  // namespace fdi::attack
