#include "cmnl/types.hpp"

#include <string>

namespace cmnl {

ContextMatrix::ContextMatrix(Matrix rows) : rows_(std::move(rows)) {
  if (rows_.rows() < 1 || rows_.cols() < 1) {
    throw DimensionError("ContextMatrix: need at least one row and one column");
  }
  for (Eigen::Index j = 0; j < rows_.rows(); ++j) {
    if (!rows_.row(j).allFinite()) {
      throw InfeasibleError("ContextMatrix: row " + std::to_string(j) +
                            " is not finite");
    }
    const double n = rows_.row(j).norm();
    if (n > 1.0 + kFeatureNormSlack) {
      throw InfeasibleError("ContextMatrix: row " + std::to_string(j) +
                            " has norm " + std::to_string(n) + " > 1");
    }
  }
}

ContextMatrix ContextMatrix::select(const std::vector<std::size_t>& indices) const {
  Matrix out(static_cast<Eigen::Index>(indices.size()), rows_.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= size()) {
      throw DimensionError("ContextMatrix::select: index " +
                           std::to_string(indices[i]) + " out of range");
    }
    out.row(static_cast<Eigen::Index>(i)) = row(indices[i]);
  }
  return ContextMatrix(std::move(out));
}

Vector PricingParams::stacked() const {
  Vector gamma(theta.size() + alpha.size());
  gamma << theta, alpha;
  return gamma;
}

PricingParams PricingParams::from_stacked(const Vector& gamma) {
  if (gamma.size() % 2 != 0) {
    throw DimensionError("PricingParams::from_stacked: odd length");
  }
  const Eigen::Index d = gamma.size() / 2;
  return PricingParams{gamma.head(d), gamma.tail(d)};
}

}  // namespace cmnl
