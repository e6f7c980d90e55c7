#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "cmnl/error.hpp"

namespace cmnl {

using Vector = Eigen::VectorXd;
using Rng = std::mt19937_64;
using Matrix = Eigen::MatrixXd;

/// Rows whose Euclidean norm exceeds one by more than this are rejected.
inline constexpr double kFeatureNormSlack = 1e-12;

/// One period's feature vectors, one row per product (k x d).
///
/// Every row has norm at most one; construction validates this so the rest of
/// the library can rely on it.
class ContextMatrix {
 public:
  ContextMatrix() = default;
  explicit ContextMatrix(Matrix rows);

  std::size_t size() const { return static_cast<std::size_t>(rows_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(rows_.cols()); }
  const Matrix& rows() const { return rows_; }
  auto row(std::size_t j) const { return rows_.row(static_cast<Eigen::Index>(j)); }

  /// Sub-context made of the listed rows, in the listed order.
  ContextMatrix select(const std::vector<std::size_t>& indices) const;

 private:
  Matrix rows_;
};

/// The pricing parameter pair (theta, alpha); utility of product j at price p
/// is x_j'theta - (x_j'alpha) p.
struct PricingParams {
  Vector theta;
  Vector alpha;

  std::size_t dim() const { return static_cast<std::size_t>(theta.size()); }

  /// Concatenation [theta; alpha] of length 2d.
  Vector stacked() const;
  static PricingParams from_stacked(const Vector& gamma);
};

/// Index of the chosen option: 0 is the outside (no-purchase) option, j >= 1
/// is the j-th offered product.
struct PurchaseOutcome {
  std::size_t chosen = 0;
};

/// Choice probabilities, index 0 = outside option.
using ProbVector = Vector;

/// Offered products as indices into a candidate ContextMatrix.
using Assortment = std::vector<std::size_t>;

}  // namespace cmnl
