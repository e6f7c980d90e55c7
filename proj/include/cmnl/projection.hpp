#pragma once

#include "cmnl/types.hpp"

namespace cmnl {

/// {x : |x|_2 <= radius} intersected with {x : A x >= b}.
struct FeasibleSet {
  double radius = 1.0;
  Matrix normals;  // m x n, one half-space per row; m may be zero
  Vector offsets;  // length m

  std::size_t dim() const { return static_cast<std::size_t>(normals.cols()); }
  std::size_t constraints() const { return static_cast<std::size_t>(normals.rows()); }
  bool contains(const Vector& x, double tol = 0.0) const;

  static FeasibleSet ball(Eigen::Index n, double radius);
};

struct KktResiduals {
  /// |H(x - y) + nu x - A'lambda|_inf / (1 + |H(x - y)|_inf)
  double stationarity = 0.0;
  /// Largest constraint violation.
  double primal = 0.0;
  /// max(nu |(|x| - r)|, max_i lambda_i |a_i'x - b_i|), plus any negative multiplier.
  double complementarity = 0.0;
};

struct Projection {
  Vector point;
  /// Multiplier of the ball constraint in
  ///   1/2 (x-y)'H(x-y) + nu/2 (|x|^2 - r^2) - lambda'(A x - b).
  double ball_multiplier = 0.0;
  Vector halfspace_multipliers;
  KktResiduals kkt;
};

/// argmin_{x in set} (x - y)' H (x - y) for symmetric positive definite H.
///
/// The ball multiplier is found by a safeguarded root search on |x(nu)| = r,
/// where x(nu) solves the half-space-only problem with metric H + nu I; that
/// inner problem is solved exactly by an active-set method on its
/// nonnegative dual. Throws InfeasibleError when the set is empty.
Projection project_h_norm(const Vector& y, const Matrix& H, const FeasibleSet& set);

KktResiduals kkt_residuals(const Vector& y, const Matrix& H, const FeasibleSet& set,
                           const Vector& x, double nu, const Vector& lambda);

/// Minimizer of 1/2 x'Qx - c'x subject to A x >= b for SPD Q, with the
/// multipliers of the half-spaces. Exposed for testing.
struct HalfspaceQpSolution {
  Vector x;
  Vector lambda;
};
HalfspaceQpSolution solve_halfspace_qp(const Matrix& Q, const Vector& c,
                                       const Matrix& A, const Vector& b);

}  // namespace cmnl
