#pragma once

#include <filesystem>
#include <vector>

#include "fdi/grid/network.hpp"

namespace fdi::powerflow {

/// Bus voltages in polar form, ordered like NetworkModel::buses().
struct OperatingState {
  std::vector<double> v_mag;  // p.u.
  std::vector<double> v_ang;  // rad, slack = 0

  std::size_t size() const noexcept { return v_mag.size(); }
  bool operator==(const OperatingState&) const = default;
};

/// Flat start: 1.0 p.u. everywhere except Slack/PV setpoints, zero angles.
OperatingState flat_start(const grid::NetworkModel& network);

struct AcOptions {
  double tol = 1e-8;  // max |mismatch|, p.u.
  int max_iter = 50;
  bool flat_start = true;
};

struct AcSolution {
  OperatingState state;
  int iterations = 0;
  double max_mismatch = 0.0;
};

/// Full Newton-Raphson in polar coordinates. PV reactive limits are not
/// enforced. Throws DivergenceError when max_iter is exhausted.
AcSolution solve_ac_powerflow(const grid::NetworkModel& network, const AcOptions& options = {},
                              const OperatingState* initial = nullptr);

/// Linear B'theta = P solve; magnitudes fixed at 1.
OperatingState solve_dc_powerflow(const grid::NetworkModel& network);

/// Scheduled net injection (generation minus load) in p.u.; the slack entry
/// is meaningless and left at its file value.
std::vector<double> scheduled_p(const grid::NetworkModel& network);
std::vector<double> scheduled_q(const grid::NetworkModel& network);

// CSV columns: bus_id,v_mag_pu,v_ang_deg. Rows may come in any order but
// must cover every bus exactly once.
void write_state_csv(const grid::NetworkModel& network, const OperatingState& state,
                     const std::filesystem::path& path);
OperatingState read_state_csv(const grid::NetworkModel& network, const std::filesystem::path& path);

}  // namespace fdi::powerflow
