#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "fdi/grid/network.hpp"

namespace fdi::grid {

using Complex = std::complex<double>;

/// Two-port admittances of one branch (pi model, tap on the from side).
struct BranchAdmittance {
  Complex ff;
  Complex ft;
  Complex tf;
  Complex tt;
};

BranchAdmittance branch_admittance(const Branch& branch);

/// Standard bus admittance matrix, rows/columns in ascending bus id order.
Eigen::MatrixXcd build_admittance_matrix(const NetworkModel& network);

/// Ybus with an appended injection-class column, n rows by n+1 columns.
class ExtendedAdmittanceMatrix {
 public:
  ExtendedAdmittanceMatrix(Eigen::MatrixXcd y, std::vector<int> injection_column,
                           std::vector<int> bus_ids);

  const Eigen::MatrixXcd& y() const noexcept { return y_; }
  const std::vector<int>& injection_column() const noexcept { return injection_column_; }
  const std::vector<int>& bus_ids() const noexcept { return bus_ids_; }

  Eigen::Index rows() const noexcept { return y_.rows(); }
  Eigen::Index cols() const noexcept { return y_.cols() + 1; }

  /// Entry of the concatenated matrix; column n holds the injection class.
  Complex at(Eigen::Index row, Eigen::Index col) const;

  std::size_t index_of(int bus_id) const;

 private:
  Eigen::MatrixXcd y_;
  std::vector<int> injection_column_;
  std::vector<int> bus_ids_;
};

ExtendedAdmittanceMatrix build_extended_ybus(const NetworkModel& network);

}  // namespace fdi::grid
