#include "fdi/powerflow/powerflow.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "fdi/csv.hpp"
#include "fdi/error.hpp"
#include "fdi/grid/admittance.hpp"

namespace fdi::powerflow {

using grid::BusKind;
using grid::Complex;

OperatingState flat_start(const grid::NetworkModel& network) {
  OperatingState s;
  s.v_mag.assign(network.bus_count(), 1.0);
  s.v_ang.assign(network.bus_count(), 0.0);
  for (std::size_t i = 0; i < network.bus_count(); ++i) {
    const auto& b = network.buses()[i];
    if (b.kind != BusKind::PQ) s.v_mag[i] = b.voltage_setpoint;
  }
  return s;
}

std::vector<double> scheduled_p(const grid::NetworkModel& network) {
  std::vector<double> p;
  for (const auto& b : network.buses()) p.push_back((b.gen_p - b.load_p) / network.base_mva());
  return p;
}

std::vector<double> scheduled_q(const grid::NetworkModel& network) {
  std::vector<double> q;
  for (const auto& b : network.buses()) q.push_back((b.gen_q - b.load_q) / network.base_mva());
  return q;
}

AcSolution solve_ac_powerflow(const grid::NetworkModel& network, const AcOptions& options,
                              const OperatingState* initial) {
  const auto n = static_cast<Eigen::Index>(network.bus_count());
  const Eigen::MatrixXcd ybus = grid::build_admittance_matrix(network);
  const auto p_sched = scheduled_p(network);
  const auto q_sched = scheduled_q(network);

  OperatingState state = (initial && !options.flat_start) ? *initial : flat_start(network);
  // Setpoints always win over the initial guess.
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& b = network.buses()[static_cast<std::size_t>(i)];
    if (b.kind != BusKind::PQ) state.v_mag[static_cast<std::size_t>(i)] = b.voltage_setpoint;
  }
  state.v_ang[network.slack_index()] = 0.0;

  // Unknown ordering: angles of non-slack buses, then magnitudes of PQ buses.
  std::vector<Eigen::Index> ang_idx;
  std::vector<Eigen::Index> mag_idx;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto kind = network.buses()[static_cast<std::size_t>(i)].kind;
    if (kind != BusKind::Slack) ang_idx.push_back(i);
    if (kind == BusKind::PQ) mag_idx.push_back(i);
  }
  const auto na = static_cast<Eigen::Index>(ang_idx.size());
  const auto nm = static_cast<Eigen::Index>(mag_idx.size());
  const auto dim = na + nm;

  Eigen::VectorXcd v(n);
  Eigen::VectorXd mismatch(dim);
  double worst = 0.0;

  for (int iter = 0; iter <= options.max_iter; ++iter) {
    for (Eigen::Index i = 0; i < n; ++i) {
      v(i) = std::polar(state.v_mag[static_cast<std::size_t>(i)], state.v_ang[static_cast<std::size_t>(i)]);
    }
    const Eigen::VectorXcd current = ybus * v;
    const Eigen::VectorXcd s = v.cwiseProduct(current.conjugate());

    for (Eigen::Index k = 0; k < na; ++k) mismatch(k) = s(ang_idx[k]).real() - p_sched[ang_idx[k]];
    for (Eigen::Index k = 0; k < nm; ++k) mismatch(na + k) = s(mag_idx[k]).imag() - q_sched[mag_idx[k]];
    worst = dim > 0 ? mismatch.cwiseAbs().maxCoeff() : 0.0;
    if (worst < options.tol) return {state, iter, worst};
    if (iter == options.max_iter) break;

    // dS/dtheta and dS/d|V| in the usual complex-matrix form.
    const Eigen::VectorXcd v_unit = v.cwiseQuotient(v.cwiseAbs().cast<Complex>());
    const Eigen::MatrixXcd ds_dang =
        Complex(0.0, 1.0) * v.asDiagonal() * (Eigen::MatrixXcd(current.asDiagonal()) - ybus * v.asDiagonal()).conjugate();
    const Eigen::MatrixXcd ds_dmag =
        v.asDiagonal() * (ybus * v_unit.asDiagonal()).conjugate() +
        Eigen::MatrixXcd(current.conjugate().asDiagonal()) * v_unit.asDiagonal();

    Eigen::MatrixXd jac(dim, dim);
    for (Eigen::Index r = 0; r < na; ++r) {
      for (Eigen::Index c = 0; c < na; ++c) jac(r, c) = ds_dang(ang_idx[r], ang_idx[c]).real();
      for (Eigen::Index c = 0; c < nm; ++c) jac(r, na + c) = ds_dmag(ang_idx[r], mag_idx[c]).real();
    }
    for (Eigen::Index r = 0; r < nm; ++r) {
      for (Eigen::Index c = 0; c < na; ++c) jac(na + r, c) = ds_dang(mag_idx[r], ang_idx[c]).imag();
      for (Eigen::Index c = 0; c < nm; ++c) jac(na + r, na + c) = ds_dmag(mag_idx[r], mag_idx[c]).imag();
    }

    const Eigen::VectorXd step = jac.partialPivLu().solve(mismatch);
    if (!step.allFinite()) break;
    for (Eigen::Index k = 0; k < na; ++k) state.v_ang[ang_idx[k]] -= step(k);
    for (Eigen::Index k = 0; k < nm; ++k) state.v_mag[mag_idx[k]] -= step(na + k);
  }
  throw DivergenceError(
      fmt::format("AC power flow did not converge in {} iterations (max mismatch {:.3e} p.u.)",
                  options.max_iter, worst),
      options.max_iter, worst);
}

OperatingState solve_dc_powerflow(const grid::NetworkModel& network) {
  const auto n = static_cast<Eigen::Index>(network.bus_count());
  const auto slack = static_cast<Eigen::Index>(network.slack_index());
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
  for (const auto& br : network.branches()) {
    const auto f = static_cast<Eigen::Index>(network.index_of(br.from_bus));
    const auto t = static_cast<Eigen::Index>(network.index_of(br.to_bus));
    const double s = 1.0 / br.x;
    b(f, f) += s;
    b(t, t) += s;
    b(f, t) -= s;
    b(t, f) -= s;
  }
  const auto p = scheduled_p(network);

  Eigen::MatrixXd reduced(n - 1, n - 1);
  Eigen::VectorXd rhs(n - 1);
  auto map = [slack](Eigen::Index i) { return i < slack ? i : i - 1; };
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i == slack) continue;
    rhs(map(i)) = p[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != slack) reduced(map(i), map(j)) = b(i, j);
    }
  }

  OperatingState state;
  state.v_mag.assign(static_cast<std::size_t>(n), 1.0);
  state.v_ang.assign(static_cast<std::size_t>(n), 0.0);
  if (n == 1) return state;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(reduced);
  if (!lu.isInvertible()) throw TopologyError("DC susceptance matrix is singular");
  const Eigen::VectorXd theta = lu.solve(rhs);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i != slack) state.v_ang[static_cast<std::size_t>(i)] = theta(map(i));
  }
  return state;
}

void write_state_csv(const grid::NetworkModel& network, const OperatingState& state,
                     const std::filesystem::path& path) {
  if (state.size() != network.bus_count()) throw DimensionError("state does not match the network");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  out << "bus_id,v_mag_pu,v_ang_deg\n";
  for (std::size_t i = 0; i < state.size(); ++i) {
    out << fmt::format("{},{},{}\n", network.buses()[i].id, state.v_mag[i], state.v_ang[i] * 180.0 / std::numbers::pi);
  }
}

OperatingState read_state_csv(const grid::NetworkModel& network, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open state file", path.string(), 0);
  csv::Reader reader(in, path.string());
  reader.expect_header({"bus_id", "v_mag_pu", "v_ang_deg"});
  OperatingState state;
  state.v_mag.assign(network.bus_count(), std::nan(""));
  state.v_ang.assign(network.bus_count(), std::nan(""));
  std::vector<std::string> f;
  while (reader.next(f)) {
    if (f.size() != 3) throw ParseError("expected 3 fields", reader.source(), reader.line());
    const int id = reader.to_int(f[0], "bus_id");
    const auto i = network.find_index(id);
    if (!i) throw ParseError(fmt::format("unknown bus {}", id), reader.source(), reader.line());
    if (!std::isnan(state.v_mag[*i])) throw ParseError(fmt::format("bus {} listed twice", id), reader.source(), reader.line());
    state.v_mag[*i] = reader.to_double(f[1], "v_mag_pu");
    state.v_ang[*i] = reader.to_double(f[2], "v_ang_deg") * std::numbers::pi / 180.0;
  }
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (std::isnan(state.v_mag[i])) {
      throw ParseError(fmt::format("bus {} missing", network.buses()[i].id), path.string(), reader.line());
    }
  }
  return state;
}

}  // namespace fdi::powerflow
