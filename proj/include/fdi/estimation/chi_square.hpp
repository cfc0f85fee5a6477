#pragma once

namespace fdi::estimation {

/// Upper-tail chi-square quantile: P(chi2(k_dof) > threshold) = significance.
/// Throws InvalidArgument for k_dof < 1 or significance outside (0, 1).
double chi_square_threshold(int k_dof, double significance);

}  // namespace fdi::estimation
