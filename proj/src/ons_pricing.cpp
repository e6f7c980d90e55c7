#include "cmnl/ons_pricing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cmnl/price_oracle.hpp"

namespace cmnl {

double mu_constant(double W, double p_max, std::size_t K) {
  if (W < 0.0 || p_max < 0.0 || K == 0) {
    throw ConfigError("mu_constant: need W >= 0, p_max >= 0, K >= 1");
  }
  return 1.0 / (2.0 * (1.0 + (1.0 + p_max) * std::sqrt(6.0 * static_cast<double>(K)) * W));
}

double lambda_schedule(std::size_t t, std::size_t d) {
  if (t == 0) throw ConfigError("lambda_schedule: periods start at 1");
  if (t == 1) return 1.0;
  return static_cast<double>(d) * std::log(static_cast<double>(t));
}

double shock_magnitude(std::size_t t, double W) {
  if (t == 0 || !(W > 0.0)) throw ConfigError("shock_magnitude: need t >= 1, W > 0");
  return 1.0 / (W * std::pow(static_cast<double>(t), 0.25));
}

ShockSample draw_shocks(std::size_t k, std::size_t t, double W, Rng& rng) {
  ShockSample s{Vector(static_cast<Eigen::Index>(k)), shock_magnitude(t, W)};
  for (Eigen::Index j = 0; j < s.delta.size(); ++j) {
    s.delta(j) = (rng() >> 63) ? s.magnitude : -s.magnitude;
  }
  return s;
}

PricingModel::PricingModel(std::size_t d, double W, double L, std::size_t K,
                           bool known_sensitivity)
    : d_(d), W_(W), L_(known_sensitivity ? 1.0 : L), K_(K), known_(known_sensitivity) {
  if (d == 0 || K == 0) throw ConfigError("PricingModel: d and K must be >= 1");
  if (!(W > 0.0) || !(L > 0.0)) throw ConfigError("PricingModel: W and L must be positive");
  p_max_ = price_upper_bound(W, L_, K);
}

void PricingModel::check(const Vector& w, const ContextMatrix& ctx) const {
  if (static_cast<std::size_t>(w.size()) != param_dim() || ctx.dim() != d_) {
    throw DimensionError("PricingModel: parameter or context width mismatch");
  }
}

FeasibleSet PricingModel::feasible_set(const ContextMatrix& ctx) const {
  const auto n = static_cast<Eigen::Index>(param_dim());
  if (known_) return FeasibleSet::ball(n, W_);
  const auto d = static_cast<Eigen::Index>(d_);
  FeasibleSet set{W_, Matrix::Zero(ctx.rows().rows(), n),
                  Vector::Constant(ctx.rows().rows(), L_)};
  set.normals.rightCols(d) = ctx.rows();
  return set;
}

Vector PricingModel::sensitivities(const Vector& w, const ContextMatrix& ctx) const {
  check(w, ctx);
  if (known_) return Vector::Ones(ctx.rows().rows());
  return ctx.rows() * w.tail(static_cast<Eigen::Index>(d_));
}

Vector PricingModel::base_utilities(const Vector& w, const ContextMatrix& ctx) const {
  check(w, ctx);
  return ctx.rows() * w.head(static_cast<Eigen::Index>(d_));
}

Vector PricingModel::utilities(const Vector& w, const ContextMatrix& ctx,
                               const Vector& prices) const {
  if (static_cast<std::size_t>(prices.size()) != ctx.size()) {
    throw DimensionError("PricingModel: price count does not match context rows");
  }
  return base_utilities(w, ctx) - sensitivities(w, ctx).cwiseProduct(prices);
}

ProbVector PricingModel::probabilities(const Vector& w, const ContextMatrix& ctx,
                                       const Vector& prices) const {
  return choice_probabilities(utilities(w, ctx, prices));
}

double PricingModel::revenue(const Vector& w, const ContextMatrix& ctx,
                             const Vector& prices) const {
  const ProbVector q = probabilities(w, ctx, prices);
  return q.tail(q.size() - 1).dot(prices);
}

Vector PricingModel::greedy_prices(const Vector& w, const ContextMatrix& ctx,
                                   double tol) const {
  return cmnl::greedy_prices(sensitivities(w, ctx), base_utilities(w, ctx), tol);
}

MnlLoss PricingModel::loss(const ContextMatrix& ctx, const Vector& prices,
                           PurchaseOutcome outcome) const {
  if (known_) return MnlLoss(ctx.rows(), -prices, outcome);
  return pricing_loss(ctx, prices, outcome);
}

Projection newton_projected_step(const Vector& w, const Matrix& A,
                                 const Vector& grad, double step,
                                 const FeasibleSet& next_set) {
  Eigen::LLT<Matrix> llt(A);
  if (llt.info() != Eigen::Success) {
    throw InfeasibleError("newton_projected_step: matrix is not positive definite");
  }
  const Vector target = w - step * llt.solve(grad);
  return project_h_norm(target, A, next_set);
}

namespace {

Vector initial_parameters(const PricingModel& model, const ContextMatrix& ctx) {
  const auto n = static_cast<Eigen::Index>(model.param_dim());
  return project_h_norm(Vector::Zero(n), Matrix::Identity(n, n),
                        model.feasible_set(ctx))
      .point;
}

constexpr double kFeasibilitySlack = 1e-9;

}  // namespace

OnsPricer::OnsPricer(PricingModel model, OnsOptions options,
                     const ContextMatrix& first_ctx)
    : model_(std::move(model)),
      options_(std::move(options)),
      mu_(options_.mu > 0.0 ? options_.mu
                            : mu_constant(model_.W(), model_.p_max(), model_.K())),
      w_(initial_parameters(model_, first_ctx)),
      H_(Matrix::Zero(static_cast<Eigen::Index>(model_.param_dim()),
                      static_cast<Eigen::Index>(model_.param_dim()))) {}

double OnsPricer::lambda(std::size_t t) const {
  return options_.lambda ? options_.lambda(t) : lambda_schedule(t, model_.feature_dim());
}

void OnsPricer::ensure_feasible(const ContextMatrix& ctx) {
  const FeasibleSet set = model_.feasible_set(ctx);
  if (set.contains(w_, kFeasibilitySlack)) return;
  const auto n = static_cast<Eigen::Index>(model_.param_dim());
  const Matrix metric = t_ > 1 ? H_ : Matrix::Identity(n, n);
  w_ = project_h_norm(w_, metric, set).point;
}

PriceDecision OnsPricer::select_prices(const ContextMatrix& ctx, Rng& shock_rng) {
  ensure_feasible(ctx);
  PriceDecision out;
  out.greedy = model_.greedy_prices(w_, ctx, options_.fixed_point_tol);
  if (options_.shocks) {
    out.shocks = draw_shocks(ctx.size(), t_, model_.W(), shock_rng);
  } else {
    out.shocks = ShockSample{Vector::Zero(out.greedy.size()), 0.0};
  }
  out.prices = out.greedy + out.shocks.delta;
  return out;
}

void OnsPricer::observe(const ContextMatrix& ctx, const Vector& prices,
                        PurchaseOutcome outcome, const ContextMatrix& next_ctx) {
  const MnlLoss loss = model_.loss(ctx, prices, outcome);
  const double lambda_t = lambda(t_);
  H_ += loss.hessian(w_);
  H_.diagonal().array() += lambda_t - lambda_prev_;
  lambda_prev_ = lambda_t;
  last_projection_ = newton_projected_step(w_, H_, loss.gradient(w_), 1.0 / mu_,
                                           model_.feasible_set(next_ctx));
  w_ = last_projection_.point;
  ++t_;
}

double default_exp_concavity(const PricingModel& model) {
  return std::exp(-model.utility_bound());
}

OnspPricer::OnspPricer(PricingModel model, OnspOptions options,
                       const ContextMatrix& first_ctx)
    : model_(std::move(model)), options_(options) {
  if (options_.kappa == 0.0) options_.kappa = default_exp_concavity(model_);
  if (!(options_.kappa > 0.0)) throw ConfigError("onsp: kappa must be positive");
  if (!(options_.eta_scale > 0.0)) throw ConfigError("onsp: eta_scale must be positive");
  const double diameter = 2.0 * model_.W();
  eta_ = options_.eta_scale *
         std::min(1.0 / (4.0 * model_.gradient_bound() * diameter), options_.kappa);
  epsilon_ = options_.epsilon > 0.0 ? options_.epsilon
                                    : 1.0 / (eta_ * eta_ * diameter * diameter);
  if (!(eta_ > 0.0) || !std::isfinite(epsilon_)) {
    throw ConfigError("onsp: step constants out of floating-point range (eta = " +
                      std::to_string(eta_) + "); set onsp.kappa and onsp.epsilon explicitly");
  }
  const auto n = static_cast<Eigen::Index>(model_.param_dim());
  w_ = initial_parameters(model_, first_ctx);
  A_ = epsilon_ * Matrix::Identity(n, n);
}

PriceDecision OnspPricer::select_prices(const ContextMatrix& ctx, Rng&) {
  const FeasibleSet set = model_.feasible_set(ctx);
  if (!set.contains(w_, kFeasibilitySlack)) w_ = project_h_norm(w_, A_, set).point;
  PriceDecision out;
  out.greedy = model_.greedy_prices(w_, ctx, options_.fixed_point_tol);
  out.shocks = ShockSample{Vector::Zero(out.greedy.size()), 0.0};
  out.prices = out.greedy;
  return out;
}

void OnspPricer::observe(const ContextMatrix& ctx, const Vector& prices,
                         PurchaseOutcome outcome, const ContextMatrix& next_ctx) {
  const Vector g = model_.loss(ctx, prices, outcome).gradient(w_);
  A_.noalias() += g * g.transpose();
  w_ = newton_projected_step(w_, A_, g, 1.0 / eta_, model_.feasible_set(next_ctx)).point;
}

OraclePricer::OraclePricer(PricingModel model, Vector truth, double fixed_point_tol)
    : model_(std::move(model)), truth_(std::move(truth)), tol_(fixed_point_tol) {}

PriceDecision OraclePricer::select_prices(const ContextMatrix& ctx, Rng&) {
  PriceDecision out;
  out.greedy = model_.greedy_prices(truth_, ctx, tol_);
  out.shocks = ShockSample{Vector::Zero(out.greedy.size()), 0.0};
  out.prices = out.greedy;
  return out;
}

}  // namespace cmnl
