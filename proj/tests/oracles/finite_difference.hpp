#pragma once

// Central-difference Jacobian of a vector function.

#include <functional>

#include <Eigen/Dense>

namespace oracle {

inline Eigen::MatrixXd central_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                        const Eigen::VectorXd& x, double h = 1e-6) {
  const Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd jac(f0.size(), x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Eigen::VectorXd xp = x;
    Eigen::VectorXd xm = x;
    xp(j) += h;
    xm(j) -= h;
    jac.col(j) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return jac;
}

}  // namespace oracle
