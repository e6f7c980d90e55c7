#pragma once

#include <cstddef>

#include "cmnl/types.hpp"

namespace cmnl {

/// Fixed point B0 of B = sum_i (1/b_i) exp(-(1 + b_i B)) exp(a_i), where
/// b_i = x_i'alpha are the price sensitivities and a_i = x_i'theta the base
/// utilities. The revenue-maximizing prices are p_i = 1/b_i + B0.
struct FixedPointSolution {
  double b0 = 0.0;
  /// |b0 - f(b0)| at the returned point.
  double residual = 0.0;
  std::size_t iterations = 0;
};

inline constexpr double kDefaultFixedPointTol = 1e-12;
inline constexpr std::size_t kFixedPointMaxIter = 200;

/// Right-hand side f(B) of the fixed-point equation.
double fixed_point_map(const Vector& sensitivities, const Vector& base_utilities,
                       double b);

/// Bisection on [0, f(0)]; f(B) - B is strictly decreasing with f(0) > 0, so
/// the bracket always holds the unique root. Requires every sensitivity > 0.
FixedPointSolution solve_fixed_point(const Vector& sensitivities,
                                     const Vector& base_utilities,
                                     double tol = kDefaultFixedPointTol);

/// Same, from parameters and context. Throws InfeasibleError when some
/// x_j'alpha < L.
FixedPointSolution solve_fixed_point(const PricingParams& params,
                                     const ContextMatrix& ctx, double L,
                                     double tol = kDefaultFixedPointTol);

/// Myopic prices g(X alpha, X theta)_i = 1/b_i + B0.
Vector greedy_prices(const Vector& sensitivities, const Vector& base_utilities,
                     double tol = kDefaultFixedPointTol);
Vector greedy_prices(const PricingParams& params, const ContextMatrix& ctx,
                     double L, double tol = kDefaultFixedPointTol);

/// h(p) = sum_j q_j(params, p) p_j.
double expected_revenue(const PricingParams& params, const ContextMatrix& ctx,
                        const Vector& prices);

/// Revenue for explicit sensitivities and base utilities: utilities are
/// a_j - b_j p_j.
double expected_revenue(const Vector& sensitivities, const Vector& base_utilities,
                        const Vector& prices);

/// Upper bound on every posted price: (1 + K max(W, 1)) / L + 1/W.
double price_upper_bound(double W, double L, std::size_t K);

/// Upper bound K max(W, 1) / L on the fixed point B0.
double fixed_point_upper_bound(double W, double L, std::size_t K);

}  // namespace cmnl
