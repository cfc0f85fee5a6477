#include "fdi/grid/admittance.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "fdi/error.hpp"

namespace fdi::grid {

BranchAdmittance branch_admittance(const Branch& branch) {
  const Complex series = 1.0 / Complex(branch.r, branch.x);
  const Complex half_charging(0.0, branch.b_shunt / 2.0);
  const double t = branch.tap;
  return {(series + half_charging) / (t * t), -series / t, -series / t, series + half_charging};
}

Eigen::MatrixXcd build_admittance_matrix(const NetworkModel& network) {
  const auto n = static_cast<Eigen::Index>(network.bus_count());
  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& br : network.branches()) {
    const auto f = static_cast<Eigen::Index>(network.index_of(br.from_bus));
    const auto t = static_cast<Eigen::Index>(network.index_of(br.to_bus));
    const auto a = branch_admittance(br);
    y(f, f) += a.ff;
    y(f, t) += a.ft;
    y(t, f) += a.tf;
    y(t, t) += a.tt;
  }
  return y;
}

ExtendedAdmittanceMatrix::ExtendedAdmittanceMatrix(Eigen::MatrixXcd y, std::vector<int> injection_column,
                                                   std::vector<int> bus_ids)
    : y_(std::move(y)), injection_column_(std::move(injection_column)), bus_ids_(std::move(bus_ids)) {
  if (y_.rows() != y_.cols() || static_cast<std::size_t>(y_.rows()) != injection_column_.size() ||
      injection_column_.size() != bus_ids_.size()) {
    throw DimensionError("extended admittance matrix parts disagree in size");
  }
}

Complex ExtendedAdmittanceMatrix::at(Eigen::Index row, Eigen::Index col) const {
  if (col == y_.cols()) return {static_cast<double>(injection_column_[static_cast<std::size_t>(row)]), 0.0};
  return y_(row, col);
}

std::size_t ExtendedAdmittanceMatrix::index_of(int bus_id) const {
  auto it = std::lower_bound(bus_ids_.begin(), bus_ids_.end(), bus_id);
  if (it == bus_ids_.end() || *it != bus_id) {
    throw InvariantError(fmt::format("unknown bus id {}", bus_id));
  }
  return static_cast<std::size_t>(it - bus_ids_.begin());
}

ExtendedAdmittanceMatrix build_extended_ybus(const NetworkModel& network) {
  std::vector<int> column;
  std::vector<int> ids;
  for (const auto& b : network.buses()) {
    column.push_back(static_cast<int>(b.injection_class()));
    ids.push_back(b.id);
  }
  return {build_admittance_matrix(network), std::move(column), std::move(ids)};
}

}  // namespace fdi::grid
