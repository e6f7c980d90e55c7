#include "cmnl/price_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cmnl/mnl_core.hpp"

namespace cmnl {

namespace {

void check_oracle_args(const Vector& sens, const Vector& base) {
  if (sens.size() != base.size() || sens.size() == 0) {
    throw DimensionError("price oracle: sensitivities and utilities must have equal nonzero length");
  }
  if (!sens.allFinite() || !base.allFinite()) {
    throw InfeasibleError("price oracle: non-finite inputs");
  }
  if (sens.minCoeff() <= 0.0) {
    throw InfeasibleError("price oracle: price sensitivities must be positive");
  }
}

void check_sensitivity_floor(const Vector& sens, double L) {
  for (Eigen::Index j = 0; j < sens.size(); ++j) {
    if (sens(j) < L) {
      throw InfeasibleError("price oracle: x_" + std::to_string(j) +
                            "'alpha = " + std::to_string(sens(j)) +
                            " is below L = " + std::to_string(L));
    }
  }
}

}  // namespace

double fixed_point_map(const Vector& sensitivities, const Vector& base_utilities,
                       double b) {
  double f = 0.0;
  for (Eigen::Index i = 0; i < sensitivities.size(); ++i) {
    const double s = sensitivities(i);
    f += std::exp(base_utilities(i) - 1.0 - s * b - std::log(s));
  }
  return f;
}

FixedPointSolution solve_fixed_point(const Vector& sensitivities,
                                     const Vector& base_utilities, double tol) {
  check_oracle_args(sensitivities, base_utilities);
  const auto gap = [&](double b) {
    return fixed_point_map(sensitivities, base_utilities, b) - b;
  };

  double lo = 0.0;
  double hi = fixed_point_map(sensitivities, base_utilities, 0.0);
  FixedPointSolution best{hi, std::abs(gap(hi)), 0};
  if (std::abs(gap(lo)) < best.residual) best = {lo, std::abs(gap(lo)), 0};

  for (std::size_t it = 1; it <= kFixedPointMaxIter; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    const double g = gap(mid);
    if (std::abs(g) < best.residual) best = {mid, std::abs(g), it};
    best.iterations = it;
    if (best.residual <= tol) return best;
    if (mid <= lo || mid >= hi) break;  // bracket exhausted at double precision
    (g > 0.0 ? lo : hi) = mid;
  }
  if (best.residual <= tol) return best;
  throw ConvergenceError("solve_fixed_point: tolerance not reached", best.residual);
}

FixedPointSolution solve_fixed_point(const PricingParams& params,
                                     const ContextMatrix& ctx, double L,
                                     double tol) {
  if (params.dim() != ctx.dim() || params.alpha.size() != params.theta.size()) {
    throw DimensionError("solve_fixed_point: parameter length does not match context width");
  }
  const Vector sens = ctx.rows() * params.alpha;
  check_sensitivity_floor(sens, L);
  return solve_fixed_point(sens, ctx.rows() * params.theta, tol);
}

Vector greedy_prices(const Vector& sensitivities, const Vector& base_utilities,
                     double tol) {
  const double b0 = solve_fixed_point(sensitivities, base_utilities, tol).b0;
  return sensitivities.cwiseInverse().array() + b0;
}

Vector greedy_prices(const PricingParams& params, const ContextMatrix& ctx,
                     double L, double tol) {
  const double b0 = solve_fixed_point(params, ctx, L, tol).b0;
  return (ctx.rows() * params.alpha).cwiseInverse().array() + b0;
}

double expected_revenue(const PricingParams& params, const ContextMatrix& ctx,
                        const Vector& prices) {
  const ProbVector q = purchase_probs_pricing(params, ctx, prices);
  return q.tail(q.size() - 1).dot(prices);
}

double expected_revenue(const Vector& sensitivities, const Vector& base_utilities,
                        const Vector& prices) {
  if (sensitivities.size() != base_utilities.size() ||
      prices.size() != base_utilities.size()) {
    throw DimensionError("expected_revenue: length mismatch");
  }
  const ProbVector q =
      choice_probabilities(base_utilities - sensitivities.cwiseProduct(prices));
  return q.tail(q.size() - 1).dot(prices);
}

double price_upper_bound(double W, double L, std::size_t K) {
  if (!(W > 0.0) || !(L > 0.0) || K == 0) {
    throw ConfigError("price_upper_bound: W, L and K must be positive");
  }
  return (1.0 + static_cast<double>(K) * std::max(W, 1.0)) / L + 1.0 / W;
}

double fixed_point_upper_bound(double W, double L, std::size_t K) {
  if (!(W > 0.0) || !(L > 0.0) || K == 0) {
    throw ConfigError("fixed_point_upper_bound: W, L and K must be positive");
  }
  return static_cast<double>(K) * std::max(W, 1.0) / L;
}

}  // namespace cmnl
