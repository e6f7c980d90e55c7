#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>

#include "cmnl/mnl_core.hpp"
#include "cmnl/projection.hpp"
#include "cmnl/types.hpp"

namespace cmnl {

/// 1 / (2 (1 + (1 + p_max) sqrt(6K) W)); the inverse step size of the learner.
double mu_constant(double W, double p_max, std::size_t K);

/// lambda_1 = 1 and lambda_t = d ln t for t >= 2.
double lambda_schedule(std::size_t t, std::size_t d);

using LambdaSchedule = std::function<double(std::size_t)>;

/// |delta_j| = 1 / (W t^{1/4}).
double shock_magnitude(std::size_t t, double W);

/// Independent fair +-magnitude price shocks, one per product.
struct ShockSample {
  Vector delta;
  double magnitude = 0.0;
};
ShockSample draw_shocks(std::size_t k, std::size_t t, double W, Rng& rng);

/// How a pricing learner maps (parameters, context, prices) to utilities.
///
/// With learned sensitivities the parameter is gamma = (theta, alpha) in R^{2d}
/// and the utility is x'theta - (x'alpha) p. With a known unit sensitivity
/// (single-product logistic pricing) the parameter is theta in R^d and the
/// utility is x'theta - p.
class PricingModel {
 public:
  /// With a known unit sensitivity L is fixed to 1.
  PricingModel(std::size_t d, double W, double L, std::size_t K,
               bool known_sensitivity = false);

  std::size_t feature_dim() const { return d_; }
  std::size_t param_dim() const { return known_ ? d_ : 2 * d_; }
  double W() const { return W_; }
  double L() const { return L_; }
  std::size_t K() const { return K_; }
  bool known_sensitivity() const { return known_; }
  double p_max() const { return p_max_; }
  /// Bound on the Euclidean norm of any loss feature row.
  double feature_bound() const { return known_ ? 1.0 : 1.0 + p_max_; }
  /// Bound on |utility| over feasible parameters and prices in [0, p_max].
  double utility_bound() const { return known_ ? W_ + p_max_ : W_ * (1.0 + p_max_); }
  /// Bound on the norm of a loss gradient: sum_j |q_j - y_j| <= 2 (1 for one product).
  double gradient_bound() const { return (K_ == 1 ? 1.0 : 2.0) * feature_bound(); }

  /// Ball of radius W, intersected with {x_j'alpha >= L} for learned sensitivities.
  FeasibleSet feasible_set(const ContextMatrix& ctx) const;

  Vector sensitivities(const Vector& w, const ContextMatrix& ctx) const;
  Vector base_utilities(const Vector& w, const ContextMatrix& ctx) const;
  Vector utilities(const Vector& w, const ContextMatrix& ctx, const Vector& prices) const;
  ProbVector probabilities(const Vector& w, const ContextMatrix& ctx,
                           const Vector& prices) const;
  double revenue(const Vector& w, const ContextMatrix& ctx, const Vector& prices) const;
  Vector greedy_prices(const Vector& w, const ContextMatrix& ctx, double tol) const;
  MnlLoss loss(const ContextMatrix& ctx, const Vector& prices,
               PurchaseOutcome outcome) const;

 private:
  void check(const Vector& w, const ContextMatrix& ctx) const;

  std::size_t d_;
  double W_;
  double L_;
  std::size_t K_;
  bool known_;
  double p_max_;
};

struct PriceDecision {
  Vector prices;
  Vector greedy;
  ShockSample shocks;
};

/// Interface the experiment harness drives each period:
/// select_prices(ctx_t) -> observe(ctx_t, prices, outcome, ctx_{t+1}).
class PricingPolicy {
 public:
  virtual ~PricingPolicy() = default;
  virtual std::string name() const = 0;
  virtual PriceDecision select_prices(const ContextMatrix& ctx, Rng& shock_rng) = 0;
  virtual void observe(const ContextMatrix& ctx, const Vector& prices,
                       PurchaseOutcome outcome, const ContextMatrix& next_ctx) = 0;
  /// Current estimate (gamma_t, or theta_t with a known sensitivity).
  virtual const Vector& parameters() const = 0;
};

/// w_next = Proj^A_set(w - step A^{-1} grad), the projected Newton-type move
/// shared by both learners. A must be symmetric positive definite.
Projection newton_projected_step(const Vector& w, const Matrix& A,
                                 const Vector& grad, double step,
                                 const FeasibleSet& next_set);

struct OnsOptions {
  bool shocks = true;
  double fixed_point_tol = 1e-12;
  /// Defaults to lambda_schedule(t, d).
  LambdaSchedule lambda;
  /// Overrides mu_constant when positive.
  double mu = 0.0;
};

/// Online Newton learner with random price shocks:
///
///   H_t = sum_{s<=t} hess l_s(gamma_s) + lambda_t I
///   gamma_{t+1} = Proj^{H_t}_{B_{t+1}}(gamma_t - (1/mu) H_t^{-1} grad l_t(gamma_t))
///
/// B_{t+1} depends on the next period's context, which observe() receives.
class OnsPricer final : public PricingPolicy {
 public:
  /// gamma_1 is the Euclidean projection of zero onto B_1.
  OnsPricer(PricingModel model, OnsOptions options, const ContextMatrix& first_ctx);

  std::string name() const override { return "onssc"; }
  PriceDecision select_prices(const ContextMatrix& ctx, Rng& shock_rng) override;
  void observe(const ContextMatrix& ctx, const Vector& prices,
               PurchaseOutcome outcome, const ContextMatrix& next_ctx) override;
  const Vector& parameters() const override { return w_; }

  const PricingModel& model() const { return model_; }
  const Matrix& hessian() const { return H_; }
  /// Index of the next period to be priced (starts at 1).
  std::size_t period() const { return t_; }
  double mu() const { return mu_; }
  double lambda(std::size_t t) const;
  const Projection& last_projection() const { return last_projection_; }

 private:
  void ensure_feasible(const ContextMatrix& ctx);

  PricingModel model_;
  OnsOptions options_;
  double mu_;
  Vector w_;
  Matrix H_;
  std::size_t t_ = 1;
  double lambda_prev_ = 0.0;
  Projection last_projection_;
};

struct OnspOptions {
  /// Exp-concavity parameter; defaults to default_exp_concavity(model).
  double kappa = 0.0;
  /// eta = eta_scale * min(1 / (4 G D), kappa) with G the gradient bound and D = 2W.
  double eta_scale = 0.5;
  /// Initial A_0 = epsilon I; defaults to 1 / (eta^2 D^2) with D = 2W.
  double epsilon = 0.0;
  double fixed_point_tol = 1e-12;
};

/// Exp-concavity of the log loss over the feasible domain, e^{-M} with M the
/// utility bound: the loss is alpha-exp-concave iff hess >= alpha grad grad',
/// and for the logistic case that ratio is e^{-|u|}.
double default_exp_concavity(const PricingModel& model);

/// Classic Online Newton Step baseline with greedy pricing and no shocks:
///
///   A_t = sum_{s<=t} g_s g_s' + epsilon I
///   w_{t+1} = Proj^{A_t}(w_t - (1/eta) A_t^{-1} g_t)
///
/// A reconstruction of the exp-concavity-driven comparator with the standard
/// ONS constants; its step size scales with 1/kappa.
class OnspPricer final : public PricingPolicy {
 public:
  OnspPricer(PricingModel model, OnspOptions options, const ContextMatrix& first_ctx);

  std::string name() const override { return "onsp"; }
  PriceDecision select_prices(const ContextMatrix& ctx, Rng& shock_rng) override;
  void observe(const ContextMatrix& ctx, const Vector& prices,
               PurchaseOutcome outcome, const ContextMatrix& next_ctx) override;
  const Vector& parameters() const override { return w_; }

  const Matrix& gram() const { return A_; }
  double eta() const { return eta_; }
  double epsilon() const { return epsilon_; }

 private:
  PricingModel model_;
  OnspOptions options_;
  double eta_;
  double epsilon_;
  Vector w_;
  Matrix A_;
};

/// Prices greedily at the true parameter; zero regret by construction.
class OraclePricer final : public PricingPolicy {
 public:
  OraclePricer(PricingModel model, Vector truth, double fixed_point_tol = 1e-12);

  std::string name() const override { return "oracle"; }
  PriceDecision select_prices(const ContextMatrix& ctx, Rng& shock_rng) override;
  void observe(const ContextMatrix&, const Vector&, PurchaseOutcome,
               const ContextMatrix&) override {}
  const Vector& parameters() const override { return truth_; }

 private:
  PricingModel model_;
  Vector truth_;
  double tol_;
};

}  // namespace cmnl
