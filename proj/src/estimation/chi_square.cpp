#include "fdi/estimation/chi_square.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <fmt/format.h>

#include "fdi/error.hpp"

namespace fdi::estimation {

double chi_square_threshold(int k_dof, double significance) {
  if (k_dof < 1) throw InvalidArgument(fmt::format("degrees of freedom must be >= 1, got {}", k_dof));
  if (!(significance > 0.0 && significance < 1.0)) {
    throw InvalidArgument(fmt::format("significance must lie in (0, 1), got {}", significance));
  }
  const boost::math::chi_squared dist(static_cast<double>(k_dof));
  return boost::math::quantile(boost::math::complement(dist, significance));
}

}  // namespace fdi::estimation
